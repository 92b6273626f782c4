//! Scalar state evolution of AMP with a scale-calibrated denoiser.
//!
//! With effective noise variance m, one step maps
//!
//! ```text
//! m ↦ (1/(δB)) E‖x_B − η(x_B + √m z_B; √m)‖²,   x_B ~ F, z_B ~ N(0, I_B)
//! ```
//!
//! where η(·; σ) is the rule calibrated to noise level σ (the soft rule
//! thresholds at τσ).

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{BlockPrior, RngStream, Slab};
use crate::numerics::{ChiSquareDof, QuadratureSpec, chi_ln_pdf, integrate, integrate_with_breaks, j_moment};
use crate::shrinkage::{Rule, ShrinkageRule};

/// Iterates above this MSE are reported as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Relative fixed-point level below which SE predicts exact recovery.
pub const SUCCESS_FLOOR: f64 = 1e-8;

/// How the expectation in one SE step is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeEstimator {
    /// Block samples shared by every step (common random numbers).
    MonteCarlo { samples: usize, seed: u64 },
    /// Deterministic quadrature; soft rule only.
    SemiAnalytic,
}

impl Default for SeEstimator {
    fn default() -> Self {
        SeEstimator::MonteCarlo {
            samples: 200_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SEConfig {
    pub delta: f64,
    pub prior: BlockPrior,
    pub rule: Rule,
    pub mse0: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub estimator: SeEstimator,
}

impl SEConfig {
    /// Defaults: AMP's starting MSE E‖x‖²/n, 500 iterations, tol 1e−12,
    /// Monte Carlo with 2×10⁵ samples.
    pub fn new(delta: f64, prior: BlockPrior, rule: Rule) -> Result<Self> {
        let cfg = Self {
            delta,
            prior,
            rule,
            mse0: initial_mse(delta, &prior),
            max_iter: 500,
            tol: 1e-12,
            estimator: SeEstimator::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.mse0 > 0.0 && self.mse0.is_finite()) {
            return Err(Error::Config(format!("mse0 must be positive, got {}", self.mse0)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        BlockPrior::new(self.prior.epsilon, self.prior.block_size, self.prior.slab)?;
        self.rule.check_block_size(self.prior.block_size)?;
        match self.estimator {
            SeEstimator::MonteCarlo { samples: 0, .. } => {
                Err(Error::Config("Monte Carlo estimator needs samples > 0".into()))
            }
            SeEstimator::SemiAnalytic if !matches!(self.rule, Rule::BlockSoft { .. }) => Err(Error::Config(format!(
                "semi-analytic estimator covers the soft rule only, not '{}'",
                self.rule.name()
            ))),
            _ => Ok(()),
        }
    }
}

/// E‖x‖²/n = ε E‖x_B‖² / (Bδ), the MSE of the all-zero start; 1 when the
/// prior is all spike.
pub fn initial_mse(delta: f64, prior: &BlockPrior) -> f64 {
    let b = prior.block_size as f64;
    let m = prior.epsilon * prior.slab.mean_square_norm(prior.block_size) / (b * delta);
    if m > 0.0 { m } else { 1.0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SETrajectory {
    /// mse0 followed by each iterate.
    pub mse_sequence: Vec<f64>,
    pub converged: bool,
    /// True when the iterates passed [`DIVERGENCE_LIMIT`].
    pub diverged: bool,
    pub fixed_point: f64,
}

/// A ready-to-evaluate SE map; Monte Carlo samples are drawn once.
pub struct SeMap {
    cfg: SEConfig,
    draws: Option<Draws>,
}

struct Draws {
    /// slab samples, `samples × B`
    signal: Vec<f64>,
    /// noise samples, `samples × B`
    noise: Vec<f64>,
}

impl SeMap {
    pub fn new(cfg: &SEConfig) -> Result<Self> {
        cfg.validate()?;
        let draws = match cfg.estimator {
            SeEstimator::MonteCarlo { samples, seed } => {
                let b = cfg.prior.block_size;
                let mut rng = RngStream::new(seed, 0).rng();
                let mut signal = Vec::with_capacity(samples * b);
                let mut noise = Vec::with_capacity(samples * b);
                for _ in 0..samples {
                    signal.extend(cfg.prior.slab.sample(b, &mut rng)?);
                    for _ in 0..b {
                        noise.push(Distribution::<f64>::sample(&StandardNormal, &mut rng));
                    }
                }
                Some(Draws { signal, noise })
            }
            SeEstimator::SemiAnalytic => None,
        };
        Ok(Self {
            cfg: cfg.clone(),
            draws,
        })
    }

    /// One step and its Monte Carlo standard error (an error bound for the
    /// semi-analytic estimator).
    pub fn eval_with_error(&self, mse: f64) -> Result<(f64, f64)> {
        if !(mse > 0.0 && mse.is_finite()) {
            return Err(Error::Domain(format!("mse must be positive and finite, got {mse}")));
        }
        match &self.draws {
            Some(d) => Ok(self.monte_carlo(d, mse)),
            None => self.semi_analytic(mse),
        }
    }

    pub fn eval(&self, mse: f64) -> Result<f64> {
        self.eval_with_error(mse).map(|v| v.0)
    }

    fn monte_carlo(&self, d: &Draws, mse: f64) -> (f64, f64) {
        let cfg = &self.cfg;
        let b = cfg.prior.block_size;
        let eps = cfg.prior.epsilon;
        let sigma = mse.sqrt();
        let scale = 1.0 / (cfg.delta * b as f64);
        let n = d.noise.len() / b;
        let mut y = vec![0.0; b];
        let mut out = vec![0.0; b];
        let (mut mean, mut m2) = (0.0f64, 0.0f64);
        for i in 0..n {
            let x = &d.signal[i * b..(i + 1) * b];
            let z = &d.noise[i * b..(i + 1) * b];
            let mut spike = 0.0;
            if eps < 1.0 {
                for k in 0..b {
                    y[k] = sigma * z[k];
                }
                cfg.rule.apply(&y, sigma, &mut out);
                spike = out.iter().map(|v| v * v).sum::<f64>();
            }
            let mut active = 0.0;
            if eps > 0.0 {
                for k in 0..b {
                    y[k] = x[k] + sigma * z[k];
                }
                cfg.rule.apply(&y, sigma, &mut out);
                active = out.iter().zip(x).map(|(o, v)| (v - o) * (v - o)).sum::<f64>();
            }
            let loss = scale * (eps * active + (1.0 - eps) * spike);
            let delta = loss - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (loss - mean);
        }
        let se = if n > 1 {
            (m2 / ((n - 1) as f64 * n as f64)).sqrt()
        } else {
            f64::INFINITY
        };
        (mean, se)
    }

    fn semi_analytic(&self, mse: f64) -> Result<(f64, f64)> {
        let cfg = &self.cfg;
        let tau = match cfg.rule {
            Rule::BlockSoft { tau } => tau,
            _ => unreachable!("validated"),
        };
        let b = cfg.prior.block_size;
        let dof = ChiSquareDof::new(b)?;
        let eps = cfg.prior.epsilon;
        let spike = if eps < 1.0 { mse * j_moment(2, tau, dof)? } else { 0.0 };
        let active = if eps > 0.0 {
            match cfg.prior.slab {
                Slab::SphereUniform { radius } => mse * soft_sphere_risk(radius / mse.sqrt(), tau, b)?,
                Slab::GaussianIso { std } => soft_gaussian_risk(std, mse, tau, b)?,
            }
        } else {
            0.0
        };
        let value = (eps * active + (1.0 - eps) * spike) / (cfg.delta * b as f64);
        Ok((value, semi_spec().rel_tol * value))
    }
}

fn semi_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        max_subdivisions: 400,
    }
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// E‖λe₁ − η(λe₁ + z; τ)‖² for unit noise, η the block soft threshold,
/// reduced to the noise component along e₁ and the orthogonal radius.
pub fn soft_sphere_risk(lambda: f64, tau: f64, b: usize) -> Result<f64> {
    const Z_RANGE: f64 = 12.0;
    let spec = semi_spec();
    // loss at signal-axis coordinate y₁ = λ + z₁ and orthogonal radius r
    let loss = |z1: f64, r: f64| -> f64 {
        let y1 = lambda + z1;
        let norm = (y1 * y1 + r * r).sqrt();
        if norm <= tau {
            lambda * lambda
        } else {
            // ‖−z + τŷ‖² = ‖z‖² − 2τ⟨z, ŷ⟩ + τ²
            let zz = z1 * z1 + r * r;
            let zy = (z1 * y1 + r * r) / norm;
            zz - 2.0 * tau * zy + tau * tau
        }
    };
    let outer_breaks = [-tau - lambda, tau - lambda];
    if b == 1 {
        return integrate_with_breaks(
            |z1| loss(z1, 0.0) * std_normal_pdf(z1),
            -Z_RANGE,
            Z_RANGE,
            &outer_breaks,
            &spec,
        );
    }
    let ortho = ChiSquareDof::new(b - 1)?;
    let mut fail = None;
    let total = integrate_with_breaks(
        |z1| {
            let y1 = lambda + z1;
            let kink = if y1.abs() < tau { Some((tau * tau - y1 * y1).sqrt()) } else { None };
            let breaks: Vec<f64> = kink.into_iter().collect();
            let density = |r: f64| if r == 0.0 && b > 2 { 0.0 } else { chi_ln_pdf(r, ortho).exp() };
            let inner = integrate_with_breaks(
                |r| if r < 0.0 { 0.0 } else { loss(z1, r) * density(r) },
                0.0,
                kink.unwrap_or(0.0) + (b as f64).sqrt() + 12.0,
                &breaks,
                &spec,
            );
            match inner {
                Ok(v) => v * std_normal_pdf(z1),
                Err(e) => {
                    fail.get_or_insert(e);
                    0.0
                }
            }
        },
        -Z_RANGE,
        Z_RANGE,
        &outer_breaks,
        &spec,
    );
    if let Some(e) = fail {
        return Err(e);
    }
    total
}

/// E‖x − η(x + √m z; τ√m)‖² for x ~ N(0, s²I_B): the Gaussian posterior
/// splits it into B s²m/(s²+m) plus a radial integral.
fn soft_gaussian_risk(std: f64, mse: f64, tau: f64, b: usize) -> Result<f64> {
    let s2 = std * std;
    let total_var = s2 + mse;
    let shrink = s2 / total_var;
    let dof = ChiSquareDof::new(b)?;
    let threshold = tau * mse.sqrt();
    let scale = total_var.sqrt();
    // ‖y‖ = scale·χ_B; η(y) = c(‖y‖) y
    let kink = threshold / scale;
    let excess = integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let r = scale * u;
            let c = if r <= threshold { 0.0 } else { 1.0 - threshold / r };
            let d = shrink - c;
            d * d * r * r * chi_ln_pdf(u, dof).exp()
        },
        0.0,
        f64::INFINITY,
        &semi_spec(),
    );
    let excess = match excess {
        Ok(v) => v,
        Err(_) => integrate_with_breaks(
            |u| {
                let r = scale * u;
                let c = if r <= threshold { 0.0 } else { 1.0 - threshold / r };
                let d = shrink - c;
                if u <= 0.0 { 0.0 } else { d * d * r * r * chi_ln_pdf(u, dof).exp() }
            },
            0.0,
            kink + (b as f64).sqrt() + 40.0,
            &[kink.max(1e-12)],
            &semi_spec(),
        )?,
    };
    Ok(b as f64 * s2 * mse / total_var + excess)
}

/// One SE step from `mse`.
pub fn se_map(mse: f64, cfg: &SEConfig) -> Result<f64> {
    SeMap::new(cfg)?.eval(mse)
}

/// Iterates [`se_map`] from `cfg.mse0` until |Δ| < tol·max(1, mse), the
/// iterate passes [`DIVERGENCE_LIMIT`], or `max_iter` steps.
pub fn se_iterate(cfg: &SEConfig) -> Result<SETrajectory> {
    let map = SeMap::new(cfg)?;
    let mut seq = vec![cfg.mse0];
    let mut m = cfg.mse0;
    let mut converged = false;
    let mut diverged = false;
    for _ in 0..cfg.max_iter {
        let next = map.eval(m)?;
        seq.push(next);
        if !next.is_finite() || next > DIVERGENCE_LIMIT {
            diverged = true;
            break;
        }
        let done = (next - m).abs() < cfg.tol * m.max(1.0) || next == 0.0;
        m = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(SETrajectory {
        fixed_point: *seq.last().expect("nonempty"),
        mse_sequence: seq,
        converged,
        diverged,
    })
}

/// SE predicts recovery: converged with fixed point ≤ 1e−8·mse0.
pub fn se_success(cfg: &SEConfig) -> Result<bool> {
    let t = se_iterate(cfg)?;
    Ok(t.converged && t.fixed_point <= SUCCESS_FLOOR * cfg.mse0)
}
