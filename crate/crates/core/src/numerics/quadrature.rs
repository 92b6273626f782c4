//! Adaptive Gauss–Kronrod quadrature (G10/K21 pairs, global bisection).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(Error::Config(format!(
                "quadrature tolerances must be positive and max_subdivisions >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// One G10/K21 panel on `[a, b]`: returns (Kronrod estimate, |K − G|).
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integration over a finite interval split at `breaks`.
///
/// Breakpoints outside `(lower, upper)` are ignored. The returned value
/// satisfies `error <= max(abs_tol, rel_tol * |value|)` or an
/// [`Error::Quadrature`] is raised carrying the best estimate.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    lower: f64,
    upper: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if lower == upper {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if lower < upper {
        (lower, upper, 1.0)
    } else {
        (upper, lower, -1.0)
    };
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > lo && x < hi)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut left = lo;
    for &right in points.iter().chain(std::iter::once(&hi)) {
        let (value, error) = gk21(&mut f, left, right);
        total += value;
        total_err += error;
        heap.push(Panel {
            a: left,
            b: right,
            value,
            error,
        });
        left = right;
    }

    let mut subdivisions = heap.len();
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error_bound: total_err,
            });
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(sign * total);
        }
        if subdivisions >= spec.max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }

    // Recompute sums from the panels to shed accumulated rounding before the
    // final verdict.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
        Ok(sign * value)
    } else {
        Err(Error::Quadrature {
            estimate: sign * value,
            error_bound: error,
        })
    }
}

/// Integrates `f` over `[lower, upper]`, where `upper` may be `+∞`.
///
/// Semi-infinite ranges are mapped onto `[0, 1)` with `x = lower + t/(1-t)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    lower: f64,
    upper: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !lower.is_finite() {
        return Err(Error::Domain(format!("lower limit must be finite, got {lower}")));
    }
    if upper == f64::INFINITY {
        let g = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(lower + t / s) / (s * s);
            if v.is_finite() { v } else { 0.0 }
        };
        integrate_with_breaks(g, 0.0, 1.0, &[], spec)
    } else if upper.is_finite() {
        integrate_with_breaks(f, lower, upper, &[], spec)
    } else {
        Err(Error::Domain(format!("unsupported upper limit {upper}")))
    }
}
