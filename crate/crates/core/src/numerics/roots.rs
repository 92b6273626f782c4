//! Bracketed scalar root finding and minimization (Brent's methods).

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;

/// Finds a root of `g` in `[lo, hi]` with Brent's bisection/secant/inverse
/// quadratic hybrid. Requires `g(lo) * g(hi) <= 0`; terminates once the
/// bracket is narrower than `tol` (or `g` hits exactly zero).
pub fn find_root<F: FnMut(f64) -> f64>(mut g: F, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut a, mut b) = bracket;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Bracket {
            lo: a,
            hi: b,
            reason: "endpoints must be finite".into(),
        });
    }
    let mut fa = g(a);
    let mut fb = g(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Bracket {
            lo: a,
            hi: b,
            reason: format!("no sign change (g(lo) = {fa:e}, g(hi) = {fb:e})"),
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = g(b);
        if !fb.is_finite() {
            return Err(Error::Numerical(format!("root function returned {fb} at {b}")));
        }
    }
    Err(Error::Numerical(format!(
        "root finding did not converge in {MAX_ITER} iterations"
    )))
}

/// Minimizes a unimodal `g` on `[lo, hi]` by golden-section search with
/// parabolic steps. Unimodality is the caller's responsibility; for other
/// functions a local minimum is returned.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(
    mut g: F,
    bracket: (f64, f64),
    tol: f64,
) -> Result<(f64, f64)> {
    let (lo, hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Bracket {
            lo,
            hi,
            reason: "requires finite lo < hi".into(),
        });
    }
    let golden = 0.5 * (3.0 - 5f64.sqrt());
    let (mut a, mut b) = (lo, hi);
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = g(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..MAX_ITER {
        let xm = 0.5 * (a + b);
        let tol1 = f64::EPSILON.sqrt() * 1e-4 * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = g(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    // The endpoints are never sampled by the search itself.
    let (flo, fhi) = (g(lo), g(hi));
    if flo < fx {
        return Ok((lo, flo));
    }
    if fhi < fx {
        return Ok((hi, fhi));
    }
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_root() {
        let r = find_root(|x| x * x - 4.0, (0.0, 5.0), 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn root_at_zero() {
        let r = find_root(|x| x, (-1.0, 1.0), 1e-12).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn missing_sign_change_is_bracket_error() {
        let err = find_root(|x| x * x + 1.0, (-1.0, 1.0), 1e-12).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn cubic_root_to_tolerance() {
        let r = find_root(|x| x * x * x - 2.0 * x - 5.0, (2.0, 3.0), 1e-14).unwrap();
        assert!((r - 2.094_551_481_542_326_5).abs() < 1e-13);
    }

    #[test]
    fn parabola_minimum() {
        let (x, fx) = minimize_scalar(|x| (x - 3.0).powi(2), (0.0, 10.0), 1e-9).unwrap();
        assert!((x - 3.0).abs() < 1e-8);
        assert!(fx < 1e-15);
    }

    #[test]
    fn absolute_value_minimum() {
        let (x, fx) = minimize_scalar(f64::abs, (-1.0, 2.0), 1e-10).unwrap();
        assert!(x.abs() < 1e-9);
        assert!(fx < 1e-9);
    }

    #[test]
    fn minimum_at_endpoint() {
        let (x, _) = minimize_scalar(|x| x, (1.0, 2.0), 1e-10).unwrap();
        assert_eq!(x, 1.0);
    }

    #[test]
    fn empty_bracket_rejected() {
        assert!(matches!(
            minimize_scalar(|x| x, (2.0, 2.0), 1e-6),
            Err(Error::Bracket { .. })
        ));
    }
}
