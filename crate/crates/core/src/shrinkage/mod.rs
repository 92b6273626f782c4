//! Per-block denoisers and their divergences.
//!
//! Every rule here acts radially, η(y) = c(‖y‖)·y, so it fixes the origin
//! and commutes with rotations of the block.

mod bayes;

use std::fmt;
use std::str::FromStr;

pub use bayes::{GStarPrior, Posterior, bayes_gstar, gstar_posterior};

use crate::error::{Error, Result};

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Block soft thresholding (y/‖y‖)(‖y‖ − τ)₊.
pub fn block_soft(y: &[f64], tau: f64) -> Vec<f64> {
    let r = norm(y);
    let c = soft_gain(r, tau);
    y.iter().map(|v| c * v).collect()
}

fn soft_gain(r: f64, threshold: f64) -> f64 {
    if r <= threshold || r == 0.0 {
        0.0
    } else {
        1.0 - threshold / r
    }
}

/// Trace of the Jacobian of [`block_soft`]: B − (B−1)τ/‖y‖ outside the dead
/// zone, 0 inside and on its boundary.
pub fn block_soft_divergence(y: &[f64], tau: f64) -> f64 {
    let r = norm(y);
    if r <= tau || r == 0.0 {
        0.0
    } else {
        let b = y.len() as f64;
        b - (b - 1.0) * tau / r
    }
}

/// Hard-threshold limit of the spike-and-sphere Bayes rule: 0 below
/// ‖y‖ = μ + a, radial projection onto the μ-sphere above.
pub fn hard_approx(y: &[f64], mu: f64, a: f64) -> Result<Vec<f64>> {
    if !(mu > 0.0 && a > 0.0) {
        return Err(Error::Domain(format!("hard threshold needs mu, a > 0, got {mu}, {a}")));
    }
    Ok(hard_project(y, mu, mu + a))
}

fn hard_project(y: &[f64], mu: f64, cutoff: f64) -> Vec<f64> {
    let r = norm(y);
    if r < cutoff || r == 0.0 {
        vec![0.0; y.len()]
    } else {
        y.iter().map(|v| mu * v / r).collect()
    }
}

/// Positive-part block James–Stein rule (1 − (B−2)s²/‖y‖²)₊ y.
pub fn block_james_stein(y: &[f64], scale: f64) -> Result<Vec<f64>> {
    if y.len() < 3 {
        return Err(Error::UnsupportedBlockSize(y.len()));
    }
    let c = james_stein_gain(norm(y), y.len(), scale);
    Ok(y.iter().map(|v| c * v).collect())
}

fn james_stein_gain(r: f64, b: usize, scale: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    (1.0 - (b as f64 - 2.0) * scale * scale / (r * r)).max(0.0)
}

/// A per-block denoiser for observations in Gaussian noise of standard
/// deviation `sigma`.
pub trait ShrinkageRule: Send + Sync {
    fn name(&self) -> &'static str;

    /// Writes η(y; σ) into `out`.
    fn apply(&self, y: &[f64], sigma: f64, out: &mut [f64]);

    /// Trace of ∂η/∂y at y.
    fn divergence(&self, y: &[f64], sigma: f64) -> f64;

    /// Checks that the rule is defined for blocks of this size.
    fn check_block_size(&self, _block_size: usize) -> Result<()> {
        Ok(())
    }
}

/// Rule names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Soft,
    BayesGStar,
    HardApprox,
    JamesStein,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Soft => "soft",
            RuleKind::BayesGStar => "bayes-gstar",
            RuleKind::HardApprox => "hard-approx",
            RuleKind::JamesStein => "james-stein",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => Ok(RuleKind::Soft),
            "bayes-gstar" => Ok(RuleKind::BayesGStar),
            "hard-approx" => Ok(RuleKind::HardApprox),
            "james-stein" => Ok(RuleKind::JamesStein),
            other => Err(Error::UnknownRule(other.to_string())),
        }
    }
}

/// The concrete denoisers, each calibrated to the noise level it is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// Soft threshold at τσ.
    BlockSoft { tau: f64 },
    /// Posterior mean for (1−ε)δ₀ + ε·Uniform(μ S^(B−1)) in N(0, σ²I) noise.
    BayesGStar { epsilon: f64, mu: f64 },
    /// Hard-threshold approximation of `BayesGStar`: projects onto the
    /// μ-sphere once the posterior odds exceed one, i.e. for
    /// ‖y‖ ≥ μ/2 + σ² ln((1−ε)/ε)/μ.
    HardApprox { epsilon: f64, mu: f64 },
    /// Positive-part James–Stein with scale σ (B ≥ 3).
    JamesStein,
}

impl Rule {
    pub fn soft(tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::Domain(format!("threshold multiplier must be >= 0, got {tau}")));
        }
        Ok(Rule::BlockSoft { tau })
    }

    pub fn bayes_gstar(epsilon: f64, mu: f64) -> Result<Self> {
        GStarPrior::new(epsilon, mu, 1)?;
        Ok(Rule::BayesGStar { epsilon, mu })
    }

    pub fn hard_approx(epsilon: f64, mu: f64) -> Result<Self> {
        GStarPrior::new(epsilon, mu, 1)?;
        Ok(Rule::HardApprox { epsilon, mu })
    }

    pub fn kind(&self) -> RuleKind {
        match self {
            Rule::BlockSoft { .. } => RuleKind::Soft,
            Rule::BayesGStar { .. } => RuleKind::BayesGStar,
            Rule::HardApprox { .. } => RuleKind::HardApprox,
            Rule::JamesStein => RuleKind::JamesStein,
        }
    }

    /// τ for the soft rule.
    pub fn threshold_multiplier(&self) -> Option<f64> {
        match self {
            Rule::BlockSoft { tau } => Some(*tau),
            _ => None,
        }
    }

    /// The prior in noise-σ units (unit noise, radius μ/σ).
    fn scaled_prior(epsilon: f64, mu: f64, sigma: f64, b: usize) -> GStarPrior {
        GStarPrior {
            epsilon,
            mu: mu / sigma,
            block_size: b,
        }
    }
}

impl ShrinkageRule for Rule {
    fn name(&self) -> &'static str {
        self.kind().as_str()
    }

    fn apply(&self, y: &[f64], sigma: f64, out: &mut [f64]) {
        debug_assert_eq!(y.len(), out.len());
        let r = norm(y);
        let gain = match *self {
            Rule::BlockSoft { tau } => soft_gain(r, tau * sigma),
            Rule::JamesStein => james_stein_gain(r, y.len(), sigma),
            Rule::HardApprox { epsilon, mu } => {
                let cutoff = 0.5 * mu + sigma * sigma * ((1.0 - epsilon) / epsilon).ln() / mu;
                if r == 0.0 || r < cutoff { 0.0 } else { mu / r }
            }
            Rule::BayesGStar { epsilon, mu } => {
                if r == 0.0 {
                    0.0
                } else if sigma == 0.0 {
                    mu / r
                } else {
                    let prior = Self::scaled_prior(epsilon, mu, sigma, y.len());
                    sigma * gstar_posterior(r / sigma, &prior).magnitude(prior.mu) / r
                }
            }
        };
        for (o, v) in out.iter_mut().zip(y) {
            *o = gain * v;
        }
    }

    fn divergence(&self, y: &[f64], sigma: f64) -> f64 {
        let r = norm(y);
        let b = y.len() as f64;
        match *self {
            Rule::BlockSoft { tau } => block_soft_divergence(y, tau * sigma),
            Rule::JamesStein => {
                let c = (b - 2.0) * sigma * sigma;
                if r == 0.0 || r * r <= c {
                    0.0
                } else {
                    b - c * (b - 2.0) / (r * r)
                }
            }
            Rule::HardApprox { epsilon, mu } => {
                let cutoff = 0.5 * mu + sigma * sigma * ((1.0 - epsilon) / epsilon).ln() / mu;
                if r == 0.0 || r < cutoff { 0.0 } else { (b - 1.0) * mu / r }
            }
            Rule::BayesGStar { epsilon, mu } => {
                if sigma == 0.0 {
                    return if r == 0.0 { 0.0 } else { (b - 1.0) * mu / r };
                }
                let prior = Self::scaled_prior(epsilon, mu, sigma, y.len());
                if r == 0.0 {
                    // isotropic: Cov = (π μ²/B) I at the origin
                    return gstar_posterior(0.0, &prior).total_variance(prior.mu);
                }
                gstar_posterior(r / sigma, &prior).total_variance(prior.mu)
            }
        }
    }

    fn check_block_size(&self, block_size: usize) -> Result<()> {
        match self {
            Rule::JamesStein if block_size < 3 => Err(Error::UnsupportedBlockSize(block_size)),
            _ if block_size == 0 => Err(Error::Domain("block size must be at least 1".into())),
            _ => Ok(()),
        }
    }
}
