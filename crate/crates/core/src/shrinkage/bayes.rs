//! Posterior mean for the spike-and-sphere prior
//! (1−ε) δ₀ + ε · Uniform(μ S^(B−1)) under N(0, I_B) noise.
//!
//! The posterior mean is collinear with y. Its magnitude reduces to the
//! angular integrals
//!
//! ```text
//! S₀(s) = ∫₀^π e^(s cos φ) sin^(B−2) φ dφ,
//! S₁(s) = ∫₀^π cos φ e^(s cos φ) sin^(B−2) φ dφ,     s = μ‖y‖,
//! ```
//!
//! which are evaluated with the e^s factor removed so that μ‖y‖ in the
//! thousands stays finite.

use libm::lgamma;

use crate::error::{Error, Result};
use crate::numerics::{QuadratureSpec, integrate_with_breaks};

/// The least-favorable style prior: spike at zero plus a uniform sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GStarPrior {
    pub epsilon: f64,
    pub mu: f64,
    pub block_size: usize,
}

impl GStarPrior {
    pub fn new(epsilon: f64, mu: f64, block_size: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("sphere radius must be positive, got {mu}")));
        }
        if block_size == 0 {
            return Err(Error::Domain("block size must be at least 1".into()));
        }
        Ok(Self {
            epsilon,
            mu,
            block_size,
        })
    }

    /// ln((1−ε)/ε)
    pub fn log_odds(&self) -> f64 {
        (1.0 - self.epsilon).ln() - self.epsilon.ln()
    }
}

/// Posterior summary for an observation of norm r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    /// P(block active | y)
    pub slab_prob: f64,
    /// 1 − slab_prob, computed without cancellation.
    pub spike_prob: f64,
    /// E[cos ∠(θ, y) | y, active]
    pub mean_cos: f64,
    /// 1 − mean_cos, computed without cancellation.
    pub one_minus_cos: f64,
}

impl Posterior {
    /// ‖E[x | y]‖ for sphere radius μ.
    pub fn magnitude(&self, mu: f64) -> f64 {
        (mu * self.slab_prob * self.mean_cos).min(mu)
    }

    /// tr Cov(x | y) = E[‖x‖² | y] − ‖E[x | y]‖².
    pub fn total_variance(&self, mu: f64) -> f64 {
        // π μ² (1 − π c²) with 1 − π c² = (1 − π) + π (1 − c)(1 + c)
        let p = self.slab_prob;
        let c = self.mean_cos;
        mu * mu * p * (self.spike_prob + p * self.one_minus_cos * (1.0 + c))
    }
}

fn angular_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        max_subdivisions: 200,
    }
}

/// ln ∫₀^π sin^(B−2) φ dφ = ln(√π Γ((B−1)/2) / Γ(B/2)), for B ≥ 2.
fn ln_sphere_angle_norm(b: usize) -> f64 {
    let bf = b as f64;
    0.5 * std::f64::consts::PI.ln() + lgamma(0.5 * (bf - 1.0)) - lgamma(0.5 * bf)
}

/// Returns (ln E_θ[e^(s⟨e₁,θ⟩)], E[cos], 1 − E[cos]) under the tilted
/// Haar measure, for s ≥ 0.
fn tilted_sphere(s: f64, b: usize) -> (f64, f64, f64) {
    if b == 1 {
        // θ ∈ {±1}: E e^(sθ) = cosh s, E[θ] = tanh s
        let e2 = (-2.0 * s).exp();
        let log_mgf = s + (0.5 * (1.0 + e2)).ln();
        let one_minus = 2.0 * e2 / (1.0 + e2);
        return (log_mgf, 1.0 - one_minus, one_minus);
    }
    if s == 0.0 {
        // untilted: E[cos] = 0
        return (0.0, 0.0, 1.0);
    }
    let power = b as f64 - 2.0;
    // Beyond s(1 − cos φ) = 45 the tilted weight is below e^-45.
    let phi_max = if s > 22.5 {
        (1.0 - 45.0 / s).acos()
    } else {
        std::f64::consts::PI
    };
    let weight = |phi: f64| -> f64 {
        let vc = 1.0 - phi.cos();
        let base = (-s * vc).exp();
        if power == 0.0 { base } else { base * phi.sin().powf(power) }
    };
    let breaks = [phi_max / 8.0, phi_max / 4.0, phi_max / 2.0];
    let spec = angular_spec();
    // Adaptive GK on a smooth integrand; fall back to the best estimate if
    // the tight relative tolerance is not met (contributions ~1e-15 apart).
    let run = |f: &dyn Fn(f64) -> f64| -> f64 {
        match integrate_with_breaks(f, 0.0, phi_max, &breaks, &spec) {
            Ok(v) => v,
            Err(Error::Quadrature { estimate, .. }) => estimate,
            Err(_) => f64::NAN,
        }
    };
    let k0 = run(&|phi| weight(phi));
    // 1 − cos φ = 2 sin²(φ/2) avoids cancellation for small φ
    let d = run(&|phi| {
        let h = (0.5 * phi).sin();
        2.0 * h * h * weight(phi)
    });
    let log_mgf = s + k0.ln() - ln_sphere_angle_norm(b);
    let one_minus = (d / k0).clamp(0.0, 2.0);
    (log_mgf, 1.0 - one_minus, one_minus)
}

/// Posterior quantities for an observation with ‖y‖ = `norm` (unit noise).
pub fn gstar_posterior(norm: f64, prior: &GStarPrior) -> Posterior {
    let s = prior.mu * norm;
    let (log_mgf, mean_cos, one_minus_cos) = tilted_sphere(s, prior.block_size);
    // ln(slab weight / spike weight); the common e^(-‖y‖²/2) cancels.
    let log_ratio = -prior.log_odds() - 0.5 * prior.mu * prior.mu + log_mgf;
    let (slab_prob, spike_prob) = if log_ratio >= 0.0 {
        let e = (-log_ratio).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = log_ratio.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    Posterior {
        slab_prob,
        spike_prob,
        mean_cos,
        one_minus_cos,
    }
}

/// Exact posterior mean E[x_B | y_B] for the spike-and-sphere prior under
/// unit Gaussian noise.
pub fn bayes_gstar(y: &[f64], prior: &GStarPrior) -> Vec<f64> {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; y.len()];
    }
    let mag = gstar_posterior(norm, prior).magnitude(prior.mu);
    y.iter().map(|v| mag * v / norm).collect()
}
