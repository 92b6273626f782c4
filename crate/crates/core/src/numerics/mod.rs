//! Special functions, quadrature and scalar solvers.

mod chi;
mod quadrature;
mod roots;

pub use chi::{
    ChiSquareDof, chi_ln_pdf, chi_sq_pdf, exact_i1, exact_i2, j_moment, laplace_i1, laplace_i2,
};
pub use quadrature::{QuadratureSpec, integrate, integrate_with_breaks};
pub use roots::{find_root, minimize_scalar};

/// Standard normal upper tail P(Z > x).
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal CDF Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    normal_sf(-x)
}

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}
