//! Chi-square density and the truncated chi moments behind the group-LASSO
//! phase-transition formulas.

use libm::lgamma as ln_gamma;

use super::quadrature::{QuadratureSpec, integrate_with_breaks};
use crate::error::{Error, Result};

/// Degrees of freedom of the chi-square law Γ(B/2, 1/2), i.e. the block size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChiSquareDof(usize);

impl ChiSquareDof {
    pub fn new(block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::Domain("block size must be at least 1".into()));
        }
        Ok(Self(block_size))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// ln(2^(B/2) Γ(B/2)), the log of the chi-square normalizing constant.
    pub fn ln_normalizer(self) -> f64 {
        let half = 0.5 * self.as_f64();
        half * std::f64::consts::LN_2 + ln_gamma(half)
    }
}

impl TryFrom<usize> for ChiSquareDof {
    type Error = Error;
    fn try_from(value: usize) -> Result<Self> {
        Self::new(value)
    }
}

/// Density of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_sq_pdf(x: f64, dof: ChiSquareDof) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("chi-square density needs x >= 0, got {x}")));
    }
    let shape = 0.5 * dof.as_f64() - 1.0;
    if x == 0.0 {
        return Ok(match dof.get() {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        });
    }
    Ok((shape * x.ln() - 0.5 * x - dof.ln_normalizer()).exp())
}

/// Log density of the chi distribution (the law of ‖z‖ for z ~ N(0, I_B)).
pub fn chi_ln_pdf(r: f64, dof: ChiSquareDof) -> f64 {
    if r <= 0.0 {
        return if dof.get() == 1 && r == 0.0 {
            std::f64::consts::LN_2 - dof.ln_normalizer()
        } else {
            f64::NEG_INFINITY
        };
    }
    std::f64::consts::LN_2 + (dof.as_f64() - 1.0) * r.ln() - 0.5 * r * r - dof.ln_normalizer()
}

fn moment_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_subdivisions: 500,
    }
}

// Envelope cutoff, relative to the integrand peak: abs_tol(1e-12) * 1e-3.
const LOG_TRUNCATION: f64 = 34.538_776_394_910_684;

/// Jₚ(τ, B) = ∫_{τ²}^∞ (√x − τ)^p f(x) dx for p ∈ {1, 2}, with f the
/// chi-square density: the truncated moments E[(χ_B − τ)₊^p].
///
/// Evaluated after substituting y = √x − τ, with the e^(−τ²/2) boundary
/// factor pulled out so that the remaining integrand is O(1).
pub fn j_moment(p: u32, tau: f64, dof: ChiSquareDof) -> Result<f64> {
    if p != 1 && p != 2 {
        return Err(Error::UnsupportedExponent(p));
    }
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::Domain(format!("threshold must be >= 0, got {tau}")));
    }
    let b = dof.as_f64();
    let pf = p as f64;
    let scale = tau.max(1.0);
    // ln of y^p ((y+τ)/scale)^(B-1) e^(-y²/2 - τy)
    let log_g = |y: f64| -> f64 {
        if y <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut v = pf * y.ln() - 0.5 * y * y - tau * y;
        if dof.get() > 1 {
            v += (b - 1.0) * ((y + tau) / scale).ln();
        }
        v
    };

    let step = 1.0 / (1.0 + tau);
    let mut breaks = Vec::new();
    let mut y = step;
    let mut peak = f64::NEG_INFINITY;
    let mut peak_at = 0.0;
    loop {
        let lg = log_g(y);
        if lg > peak {
            peak = lg;
            peak_at = y;
        }
        breaks.push(y);
        if y > peak_at && lg < peak - LOG_TRUNCATION {
            break;
        }
        y *= 2.0;
    }
    let upper = *breaks.last().expect("at least one breakpoint");

    let scaled = integrate_with_breaks(
        |y| if y <= 0.0 { 0.0 } else { log_g(y).exp() },
        0.0,
        upper,
        &breaks,
        &moment_spec(),
    )?;
    let log_prefactor = std::f64::consts::LN_2 - dof.ln_normalizer() - 0.5 * tau * tau
        + (b - 1.0) * scale.ln();
    Ok(scaled * log_prefactor.exp())
}

/// Laplace asymptote of I₁ = ∫_{τ²}^∞ (τ − √x) x^(B/2−1) e^(−x/2) dx:
/// −2 e^(−τ²/2) τ^(B−3).
pub fn laplace_i1(tau: f64, dof: ChiSquareDof) -> Result<f64> {
    check_positive(tau)?;
    Ok(-2.0 * (-0.5 * tau * tau).exp() * tau.powf(dof.as_f64() - 3.0))
}

/// Laplace asymptote of I₂ = ∫_{τ²}^∞ (√x − τ)² x^(B/2−1) e^(−x/2) dx:
/// 4 e^(−τ²/2) τ^(B−4).
pub fn laplace_i2(tau: f64, dof: ChiSquareDof) -> Result<f64> {
    check_positive(tau)?;
    Ok(4.0 * (-0.5 * tau * tau).exp() * tau.powf(dof.as_f64() - 4.0))
}

/// The exact (unnormalized) I₁, i.e. −J₁ · 2^(B/2) Γ(B/2).
pub fn exact_i1(tau: f64, dof: ChiSquareDof) -> Result<f64> {
    Ok(-j_moment(1, tau, dof)? * dof.ln_normalizer().exp())
}

/// The exact (unnormalized) I₂, i.e. J₂ · 2^(B/2) Γ(B/2).
pub fn exact_i2(tau: f64, dof: ChiSquareDof) -> Result<f64> {
    Ok(j_moment(2, tau, dof)? * dof.ln_normalizer().exp())
}

fn check_positive(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("threshold must be positive, got {tau}")))
    }
}
