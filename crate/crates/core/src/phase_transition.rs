//! Analytic phase transitions of block soft thresholding and the
//! least-favorable spike-and-sphere prior.
//!
//! Two independent routes give the group-LASSO transition ρ^L(δ):
//!
//! * the implicit route solves δ = [(B+τ²)J₁ + τJ₂] / [B(τ+J₁)] for τ and
//!   substitutes into ρ = (Bδ − J₂) / (δ(B + τ² − J₂));
//! * the fixed-point route finds ε with min_τ M(ε, τ) = δ, where
//!   M(ε, τ) = [ε(B+τ²) + (1−ε)J₂(τ)]/B is the minimax block-soft risk,
//!   and reports ρ = ε/δ.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::RngStream;
use crate::numerics::{
    ChiSquareDof, QuadratureSpec, chi_ln_pdf, find_root, integrate_with_breaks, j_moment,
    minimize_scalar,
};
use crate::shrinkage::{GStarPrior, Posterior, gstar_posterior};

/// One point of a phase-transition curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PTPoint {
    pub delta: f64,
    pub rho: f64,
    pub tau_star: f64,
    pub block_size: usize,
}

/// Phase-transition curve for one block size, ascending in δ.
#[derive(Debug, Clone, PartialEq)]
pub struct PTCurve {
    pub block_size: usize,
    pub points: Vec<PTPoint>,
}

/// Which solver produces ρ^L(δ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PtRoute {
    #[default]
    Lemma,
    FixedPoint,
}

impl std::str::FromStr for PtRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma" => Ok(PtRoute::Lemma),
            "fixedpoint" | "fixed-point" => Ok(PtRoute::FixedPoint),
            other => Err(Error::Config(format!("unknown PT route '{other}' (lemma, fixedpoint)"))),
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("threshold must be finite and >= 0, got {tau}")));
    }
    Ok(())
}

/// M(ε, τ) = [ε(B+τ²) + (1−ε)J₂(τ, B)] / B.
pub fn minimax_mse(epsilon: f64, tau: f64, dof: ChiSquareDof) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    check_tau(tau)?;
    let b = dof.as_f64();
    let j2 = j_moment(2, tau, dof)?;
    Ok((epsilon * (b + tau * tau) + (1.0 - epsilon) * j2) / b)
}

/// A τ beyond every minimizer of M(ε, ·).
fn tau_search_limit(epsilon: f64) -> f64 {
    // the minimizer grows like √(2 ln(1/ε))
    2.0 * (2.0 * (1.0 / epsilon).ln().max(1.0)).sqrt() + 4.0
}

/// argmin_τ M(ε, τ): located by Brent minimization, then polished on the
/// stationarity condition ετ = (1−ε)J₁(τ).
pub fn optimal_tau(epsilon: f64, dof: ChiSquareDof) -> Result<f64> {
    if epsilon == 0.0 || epsilon == 1.0 {
        return Err(Error::DegeneratePrior(format!(
            "epsilon = {epsilon} has no interior minimax threshold"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let hi = tau_search_limit(epsilon);
    let mut fail = None;
    let (tau0, _) = minimize_scalar(
        |t| match minimax_mse(epsilon, t, dof) {
            Ok(v) => v,
            Err(e) => {
                fail.get_or_insert(e);
                f64::INFINITY
            }
        },
        (0.0, hi),
        1e-8,
    )?;
    if let Some(e) = fail {
        return Err(e);
    }
    let stationarity = |t: f64| -> f64 {
        match j_moment(1, t, dof) {
            Ok(j1) => epsilon * t - (1.0 - epsilon) * j1,
            Err(_) => f64::NAN,
        }
    };
    // the residual is increasing in τ; widen around the minimizer
    let mut width = 1e-3 * tau0.max(1.0);
    loop {
        let lo = (tau0 - width).max(0.0);
        let up = tau0 + width;
        let (glo, gup) = (stationarity(lo), stationarity(up));
        if glo.is_nan() || gup.is_nan() {
            return Err(Error::Numerical("stationarity residual is not finite".into()));
        }
        if glo <= 0.0 && gup >= 0.0 {
            return find_root(stationarity, (lo, up), 1e-14);
        }
        if width > hi {
            return Err(Error::Bracket {
                lo,
                hi: up,
                reason: "stationarity residual does not change sign".into(),
            });
        }
        width *= 4.0;
    }
}

/// Right-hand side of the implicit δ(τ) relation of the group-LASSO
/// transition: [(B+τ²)J₁ + τJ₂] / [B(τ+J₁)].
pub fn lemma_delta(tau: f64, dof: ChiSquareDof) -> Result<f64> {
    check_tau(tau)?;
    let b = dof.as_f64();
    let j1 = j_moment(1, tau, dof)?;
    let j2 = j_moment(2, tau, dof)?;
    Ok(((b + tau * tau) * j1 + tau * j2) / (b * (tau + j1)))
}

/// ρ = (Bδ − J₂) / (δ(B + τ² − J₂)) at a given threshold.
pub fn lemma_rho(delta: f64, tau: f64, dof: ChiSquareDof) -> Result<f64> {
    check_delta(delta)?;
    check_tau(tau)?;
    let b = dof.as_f64();
    let j2 = j_moment(2, tau, dof)?;
    Ok((b * delta - j2) / (delta * (b + tau * tau - j2)))
}

const LEMMA_TAU_LO: f64 = 1e-4;
const LEMMA_TAU_CAP: f64 = 1e3;
const LEMMA_SCAN_STEP: f64 = 0.01;

/// ρ^L(δ) through the implicit relation: τ* is the root of
/// `lemma_delta(τ) − δ`, bracketed on [1e−4, τ_hi] with τ_hi doubled until
/// the residual changes sign, and checked for uniqueness on a 0.01 grid.
pub fn lasso_pt_lemma(delta: f64, dof: ChiSquareDof) -> Result<PTPoint> {
    check_delta(delta)?;
    let residual = |t: f64| lemma_delta(t, dof).map(|d| d - delta);
    let r_lo = residual(LEMMA_TAU_LO)?;
    let mut hi = 1.0;
    let mut r_hi = residual(hi)?;
    while r_hi.signum() == r_lo.signum() && r_hi != 0.0 {
        hi *= 2.0;
        if hi > LEMMA_TAU_CAP {
            return Err(Error::Bracket {
                lo: LEMMA_TAU_LO,
                hi,
                reason: format!("no sign change of the implicit residual for delta = {delta}"),
            });
        }
        r_hi = residual(hi)?;
    }

    let mut cells = Vec::new();
    let mut a = LEMMA_TAU_LO;
    let mut ra = r_lo;
    while a < hi {
        let b = (a + LEMMA_SCAN_STEP).min(hi);
        let rb = if b == hi { r_hi } else { residual(b)? };
        if ra == 0.0 || ra.signum() != rb.signum() {
            cells.push((a, b));
        }
        a = b;
        ra = rb;
    }
    let (lo, up) = match cells.as_slice() {
        [one] => *one,
        [] => (LEMMA_TAU_LO, hi),
        many => {
            return Err(Error::Numerical(format!(
                "implicit relation has {} roots for delta = {delta} near tau = {:?}",
                many.len(),
                many.iter().map(|c| c.0).collect::<Vec<_>>()
            )));
        }
    };
    let mut fail = None;
    let tau = find_root(
        |t| match residual(t) {
            Ok(v) => v,
            Err(e) => {
                fail.get_or_insert(e);
                f64::NAN
            }
        },
        (lo, up),
        1e-15,
    )?;
    if let Some(e) = fail {
        return Err(e);
    }
    let rho = lemma_rho(delta, tau, dof)?;
    Ok(PTPoint {
        delta,
        rho,
        tau_star: tau,
        block_size: dof.get(),
    })
}

/// (τ̂, min_τ M(ε, τ)) by direct minimization.
fn minimized_mse(epsilon: f64, dof: ChiSquareDof) -> Result<(f64, f64)> {
    let mut fail = None;
    let best = minimize_scalar(
        |t| match minimax_mse(epsilon, t, dof) {
            Ok(v) => v,
            Err(e) => {
                fail.get_or_insert(e);
                f64::INFINITY
            }
        },
        (0.0, tau_search_limit(epsilon)),
        1e-11,
    )?;
    match fail {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// ρ^L(δ) as the ρ where the minimized minimax risk at ε = ρδ equals δ,
/// by bisection (the minimized risk increases with ε).
pub fn lasso_pt_fixedpoint(delta: f64, dof: ChiSquareDof) -> Result<PTPoint> {
    check_delta(delta)?;
    // min_τ M(δ, τ) ≥ δ, and the minimized risk vanishes as ε → 0
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best_tau = f64::NAN;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (tau, m) = minimized_mse(mid * delta, dof)?;
        if m < delta {
            lo = mid;
        } else {
            hi = mid;
            best_tau = tau;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let rho = 0.5 * (lo + hi);
    let tau_star = if best_tau.is_nan() {
        minimized_mse(rho * delta, dof)?.0
    } else {
        minimized_mse(rho * delta, dof).map(|r| r.0).unwrap_or(best_tau)
    };
    Ok(PTPoint {
        delta,
        rho,
        tau_star,
        block_size: dof.get(),
    })
}

/// PT curve on the given δ grid (sorted ascending). Points are independent
/// and computed in parallel.
pub fn pt_curve(deltas: &[f64], dof: ChiSquareDof, route: PtRoute) -> Result<PTCurve> {
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let points = sorted
        .par_iter()
        .map(|&d| match route {
            PtRoute::Lemma => lasso_pt_lemma(d, dof),
            PtRoute::FixedPoint => lasso_pt_fixedpoint(d, dof),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PTCurve {
        block_size: dof.get(),
        points,
    })
}

/// Strong-undersampling limit B / (2 ln(1/δ)).
pub fn asymptotic_rho(delta: f64, dof: ChiSquareDof) -> Result<f64> {
    check_delta(delta)?;
    Ok(dof.as_f64() / (2.0 * (1.0 / delta).ln()))
}

/// Large-τ approximation δ ≈ τ^(B−2) e^(−τ²/2) / (2^(B/2−1) B Γ(B/2)).
pub fn asymptotic_delta_of_tau(tau: f64, dof: ChiSquareDof) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("threshold must be positive, got {tau}")));
    }
    let b = dof.as_f64();
    let ln = (b - 2.0) * tau.ln() - 0.5 * tau * tau
        - ((0.5 * b - 1.0) * std::f64::consts::LN_2 + b.ln() + libm::lgamma(0.5 * b));
    Ok(ln.exp())
}

/// Large-τ approximation ρ ≈ B/τ².
pub fn asymptotic_rho_of_tau(tau: f64, dof: ChiSquareDof) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("threshold must be positive, got {tau}")));
    }
    Ok(dof.as_f64() / (tau * tau))
}

/// Spike-and-sphere prior with radius and hard-threshold offset tied to ε
/// through (1−γ)L = μ²/2 and γL = aμ, where L = ln((1−ε)/ε).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GStarParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub mu: f64,
    pub a: f64,
    pub block_size: usize,
}

impl GStarParams {
    /// ln((1−ε)/ε)
    pub fn log_odds(&self) -> f64 {
        log_odds(self.epsilon)
    }

    pub fn prior(&self) -> GStarPrior {
        GStarPrior {
            epsilon: self.epsilon,
            mu: self.mu,
            block_size: self.block_size,
        }
    }
}

fn log_odds(epsilon: f64) -> f64 {
    (1.0 - epsilon).ln() - epsilon.ln()
}

fn check_small_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    Ok(())
}

/// γ(ε) = L^(−1/4); below one only while L > 1, i.e. ε < 1/(1+e).
pub fn default_gamma(epsilon: f64) -> Result<f64> {
    check_small_epsilon(epsilon)?;
    let gamma = log_odds(epsilon).powf(-0.25);
    if gamma >= 1.0 {
        return Err(Error::Domain(format!(
            "default gamma policy needs ln((1-eps)/eps) > 1, got eps = {epsilon}"
        )));
    }
    Ok(gamma)
}

pub fn gstar_params(epsilon: f64, gamma: f64, block_size: usize) -> Result<GStarParams> {
    check_small_epsilon(epsilon)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if block_size == 0 {
        return Err(Error::Domain("block size must be at least 1".into()));
    }
    let l = log_odds(epsilon);
    let mu = (2.0 * (1.0 - gamma) * l).sqrt();
    Ok(GStarParams {
        epsilon,
        gamma,
        mu,
        a: gamma * l / mu,
        block_size,
    })
}

/// [`gstar_params`] with γ from [`default_gamma`].
pub fn gstar_params_default(epsilon: f64, block_size: usize) -> Result<GStarParams> {
    gstar_params(epsilon, default_gamma(epsilon)?, block_size)
}

/// How [`gstar_risk`] evaluates its expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskEstimator {
    MonteCarlo { samples: usize, seed: u64 },
    Quadrature2D,
}

impl Default for RiskEstimator {
    fn default() -> Self {
        RiskEstimator::MonteCarlo {
            samples: 1_000_000,
            seed: 0,
        }
    }
}

/// Value with a Monte Carlo standard error or a quadrature error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// ‖μe₁ − x̂(y)‖² for y = μe₁ + z with y₁ = μ + z₁ and ‖y‖ = norm, written
/// without cancellation as (μ − m)² + 2μm(1 − y₁/‖y‖).
fn active_loss(mu: f64, y1: f64, ortho_sq: f64, norm: f64, post: &Posterior) -> f64 {
    let m = post.magnitude(mu);
    let shortfall = mu * (post.spike_prob + post.slab_prob * post.one_minus_cos);
    let off_axis = if norm == 0.0 {
        1.0
    } else if y1 > 0.0 {
        ortho_sq / (norm * (norm + y1))
    } else {
        (norm - y1) / norm
    };
    shortfall * shortfall + 2.0 * mu * m * off_axis
}

/// Bayes risk per coordinate of the posterior-mean estimator under the
/// spike-and-sphere prior:
/// (ε/B) E‖μθ − x̂(μθ+z)‖² + ((1−ε)/B) E‖x̂(z)‖².
pub fn gstar_risk(params: &GStarParams, estimator: RiskEstimator) -> Result<RiskEstimate> {
    let prior = params.prior();
    GStarPrior::new(prior.epsilon, prior.mu, prior.block_size)?;
    match estimator {
        RiskEstimator::MonteCarlo { samples, seed } => gstar_risk_mc(&prior, samples, seed),
        RiskEstimator::Quadrature2D => gstar_risk_quad(&prior),
    }
}

fn gstar_risk_mc(prior: &GStarPrior, samples: usize, seed: u64) -> Result<RiskEstimate> {
    if samples < 2 {
        return Err(Error::Config("Monte Carlo risk needs at least 2 samples".into()));
    }
    let b = prior.block_size;
    let (eps, mu) = (prior.epsilon, prior.mu);
    let bf = b as f64;
    let mut rng = RngStream::new(seed, 0).rng();
    let mut z = vec![0.0; b];
    // Welford accumulation of the per-sample combined loss
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..samples {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let ortho_sq: f64 = z[1..].iter().map(|v| v * v).sum();
        let noise_norm = (z[0] * z[0] + ortho_sq).sqrt();
        let spike_mag = gstar_posterior(noise_norm, prior).magnitude(mu);
        let y1 = mu + z[0];
        let norm = (y1 * y1 + ortho_sq).sqrt();
        let post = gstar_posterior(norm, prior);
        let loss = (eps * active_loss(mu, y1, ortho_sq, norm, &post)
            + (1.0 - eps) * spike_mag * spike_mag)
            / bf;
        let delta = loss - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (loss - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(RiskEstimate {
        value: mean,
        std_error: (var / samples as f64).sqrt(),
    })
}

fn risk_quad_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-9,
        abs_tol: 1e-16,
        max_subdivisions: 400,
    }
}

fn gstar_risk_quad(prior: &GStarPrior) -> Result<RiskEstimate> {
    let b = prior.block_size;
    let (eps, mu) = (prior.epsilon, prior.mu);
    let spec = risk_quad_spec();
    let dof = ChiSquareDof::new(b)?;
    // observation norm at which the posterior odds are even
    let cutoff = 0.5 * mu + prior.log_odds() / mu;

    let spike = integrate_with_breaks(
        |r| {
            if r <= 0.0 {
                return 0.0;
            }
            let m = gstar_posterior(r, prior).magnitude(mu);
            m * m * chi_ln_pdf(r, dof).exp()
        },
        0.0,
        cutoff.max(1.0) + 40.0,
        &[cutoff.max(1e-3), (b as f64).sqrt()],
        &spec,
    )?;

    const Z_RANGE: f64 = 12.0;
    let gauss = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let active = if b == 1 {
        integrate_with_breaks(
            |z1| {
                let y1 = mu + z1;
                let norm = y1.abs();
                let post = gstar_posterior(norm, prior);
                active_loss(mu, y1, 0.0, norm, &post) * gauss(z1)
            },
            -Z_RANGE,
            Z_RANGE,
            &[cutoff - mu, -mu, 0.0],
            &spec,
        )?
    } else {
        let ortho = ChiSquareDof::new(b - 1)?;
        let mut fail = None;
        let outer = integrate_with_breaks(
            |z1| {
                let y1 = mu + z1;
                let inner_breaks: Vec<f64> = if cutoff > y1.abs() {
                    vec![(cutoff * cutoff - y1 * y1).sqrt()]
                } else {
                    Vec::new()
                };
                let upper = inner_breaks.first().copied().unwrap_or(0.0) + (b as f64).sqrt() + 12.0;
                let inner = integrate_with_breaks(
                    |r| {
                        if r < 0.0 {
                            return 0.0;
                        }
                        let ortho_sq = r * r;
                        let norm = (y1 * y1 + ortho_sq).sqrt();
                        let post = gstar_posterior(norm, prior);
                        let w = if r == 0.0 && b > 2 {
                            0.0
                        } else {
                            chi_ln_pdf(r, ortho).exp()
                        };
                        active_loss(mu, y1, ortho_sq, norm, &post) * w
                    },
                    0.0,
                    upper,
                    &inner_breaks,
                    &spec,
                );
                match inner {
                    Ok(v) => v * gauss(z1),
                    Err(e) => {
                        fail.get_or_insert(e);
                        0.0
                    }
                }
            },
            -Z_RANGE,
            Z_RANGE,
            &[cutoff - mu, -mu, 0.0],
            &spec,
        );
        if let Some(e) = fail {
            return Err(e);
        }
        outer?
    };
    let value = (eps * active + (1.0 - eps) * spike) / b as f64;
    Ok(RiskEstimate {
        value,
        std_error: spec.rel_tol * value.abs(),
    })
}

/// ε·2(1−γ)ln((1−ε)/ε)/B, the small-ε behavior of [`gstar_risk`].
pub fn gstar_risk_asymptote(epsilon: f64, gamma: f64, dof: ChiSquareDof) -> Result<f64> {
    check_small_epsilon(epsilon)?;
    if !(gamma >= 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    Ok(epsilon * 2.0 * (1.0 - gamma) * log_odds(epsilon) / dof.as_f64())
}

/// Upper bound on P{‖μθ + z‖ > μ + a}:
/// 2e^(−a²/2) + e^(−(1/2 − B/(2a²))a²) (B/a²)^(−B/2), clamped to 1 (and
/// equal to 1 when a² ≤ B).
pub fn tail_bound(dof: ChiSquareDof, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("offset must be positive, got {a}")));
    }
    let b = dof.as_f64();
    let a2 = a * a;
    if a2 <= b {
        return Ok(1.0);
    }
    let gauss = 2.0 * (-0.5 * a2).exp();
    let chi = (-(0.5 - b / (2.0 * a2)) * a2 - 0.5 * b * (b / a2).ln()).exp();
    Ok((gauss + chi).min(1.0))
}

/// Monte Carlo estimate (and standard error) of P{‖μe₁ + z‖ > μ + a}.
pub fn tail_prob_mc(
    dof: ChiSquareDof,
    mu: f64,
    a: f64,
    samples: usize,
    stream: RngStream,
) -> Result<(f64, f64)> {
    let mut axis = vec![0.0; dof.get()];
    axis[0] = 1.0;
    tail_prob_mc_along(&axis, mu, a, samples, stream)
}

/// As [`tail_prob_mc`] with the signal direction θ given explicitly.
pub fn tail_prob_mc_along(
    direction: &[f64],
    mu: f64,
    a: f64,
    samples: usize,
    stream: RngStream,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::Config("tail probability needs at least 1 sample".into()));
    }
    if !(mu > 0.0 && a > 0.0) {
        return Err(Error::Domain(format!("mu and a must be positive, got {mu}, {a}")));
    }
    let n2: f64 = direction.iter().map(|v| v * v).sum();
    if direction.is_empty() || (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::Dimension("direction must be a unit vector".into()));
    }
    let mut rng = stream.rng();
    let threshold = (mu + a) * (mu + a);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut s = 0.0;
        for &t in direction {
            let z: f64 = rng.sample(StandardNormal);
            let y = mu * t + z;
            s += y * y;
        }
        if s > threshold {
            hits += 1;
        }
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    Ok((p, (p * (1.0 - p) / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_sf;

    fn dof(b: usize) -> ChiSquareDof {
        ChiSquareDof::new(b).unwrap()
    }

    #[test]
    fn minimax_mse_at_zero_threshold_is_one() {
        for b in [1, 2, 3, 8] {
            for eps in [0.0, 0.1, 0.7, 1.0] {
                assert!((minimax_mse(eps, 0.0, dof(b)).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        let j2 = j_moment(2, 1.7, dof(3)).unwrap();
        assert!((minimax_mse(0.0, 1.7, dof(3)).unwrap() - j2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn minimax_mse_matches_large_amplitude_monte_carlo() {
        // Oracle: block soft risk at unit noise for a prior with mass ε on
        // a sphere of radius 10⁴, estimated by direct simulation.
        let (eps, tau, b) = (0.05, 2.0, 2usize);
        let mut rng = RngStream::new(5, 0).rng();
        let n = 400_000usize;
        let radius = 1e4;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let active = rng.gen_bool(eps);
            let x = [if active { radius } else { 0.0 }, 0.0];
            let y: Vec<f64> = x.iter().map(|v| v + rng.sample::<f64, _>(StandardNormal)).collect();
            let est = crate::shrinkage::block_soft(&y, tau);
            let loss: f64 = est.iter().zip(&x).map(|(e, v)| (e - v).powi(2)).sum::<f64>() / b as f64;
            s += loss;
            s2 += loss * loss;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let m = minimax_mse(eps, tau, dof(b)).unwrap();
        assert!((mean - m).abs() < 3.0 * se, "{mean} ± {se} vs {m}");
    }

    #[test]
    fn optimal_tau_is_stationary_and_global() {
        let eps = 0.05;
        let t = optimal_tau(eps, dof(2)).unwrap();
        let j1 = j_moment(1, t, dof(2)).unwrap();
        assert!((eps * t - (1.0 - eps) * j1).abs() < 1e-8);
        let best = minimax_mse(eps, t, dof(2)).unwrap();
        let mut g = 0.0;
        while g <= 6.0 {
            assert!(minimax_mse(eps, g, dof(2)).unwrap() >= best - 1e-14, "tau = {g}");
            g += 1e-4;
        }
    }

    #[test]
    fn optimal_tau_grows_as_epsilon_shrinks() {
        for b in [1, 2, 4, 8] {
            assert!(optimal_tau(1e-4, dof(b)).unwrap() > optimal_tau(1e-2, dof(b)).unwrap());
        }
        assert!(matches!(optimal_tau(0.0, dof(2)), Err(Error::DegeneratePrior(_))));
        assert!(matches!(optimal_tau(1.0, dof(2)), Err(Error::DegeneratePrior(_))));
    }

    #[test]
    fn routes_agree_at_quarter() {
        for b in [1, 2] {
            let l = lasso_pt_lemma(0.25, dof(b)).unwrap();
            let f = lasso_pt_fixedpoint(0.25, dof(b)).unwrap();
            assert!((l.rho - f.rho).abs() < 1e-6, "B = {b}: {} vs {}", l.rho, f.rho);
            assert!(l.rho > 0.0 && l.rho < 1.0);
            let residual = lemma_delta(l.tau_star, dof(b)).unwrap() - 0.25;
            assert!(residual.abs() < 1e-10);
        }
    }

    #[test]
    fn reference_values() {
        // computed independently with scipy quadrature + brentq
        let cases = [
            (1, 0.05, 0.15436),
            (1, 0.5, 0.38569),
            (2, 0.25, 0.34563),
            (4, 0.95, 0.80224),
            (8, 0.05, 0.35761),
        ];
        for (b, d, rho) in cases {
            let p = lasso_pt_lemma(d, dof(b)).unwrap();
            assert!((p.rho - rho).abs() < 1e-5, "B = {b}, δ = {d}: {}", p.rho);
        }
    }

    #[test]
    fn lemma_threshold_is_minimax_stationary_point() {
        for b in [1, 2, 4] {
            for d in [0.1, 0.5, 0.9] {
                let p = lasso_pt_lemma(d, dof(b)).unwrap();
                let eps = p.rho * d;
                let j1 = j_moment(1, p.tau_star, dof(b)).unwrap();
                assert!((eps * p.tau_star - (1.0 - eps) * j1).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fixed_point_epsilon_unwinds() {
        let d = 0.3;
        let p = lasso_pt_fixedpoint(d, dof(2)).unwrap();
        let eps = p.rho * d;
        let t = optimal_tau(eps, dof(2)).unwrap();
        let m = minimax_mse(eps, t, dof(2)).unwrap();
        assert!((m - d).abs() < 1e-8);
        let near_one = lasso_pt_fixedpoint(0.999, dof(1)).unwrap();
        assert!(near_one.rho.is_finite() && near_one.rho <= 1.0 && near_one.rho > 0.9);
    }

    #[test]
    fn transition_increases_with_block_size() {
        let rhos: Vec<f64> = [1, 2, 4, 8]
            .iter()
            .map(|&b| lasso_pt_lemma(0.25, dof(b)).unwrap().rho)
            .collect();
        assert!(rhos.windows(2).all(|w| w[0] < w[1]), "{rhos:?}");
    }

    #[test]
    fn deep_undersampling_trend_for_pairs() {
        let r = |d: f64| {
            let p = lasso_pt_lemma(d, dof(2)).unwrap();
            p.rho * 2.0 * (1.0 / d).ln() / 2.0
        };
        assert!((r(1e-8) - 1.0).abs() < (r(1e-3) - 1.0).abs());
    }

    #[test]
    fn asymptotic_formulas() {
        assert!((asymptotic_rho(1e-6, dof(2)).unwrap() - 0.072382).abs() < 1e-6);
        assert!((asymptotic_rho((-1.0f64).exp(), dof(2)).unwrap() - 1.0).abs() < 1e-15);
        let r2 = asymptotic_rho(1e-6, dof(2)).unwrap();
        assert!((asymptotic_rho(1e-6, dof(8)).unwrap() - 4.0 * r2).abs() < 1e-15);
        assert!(asymptotic_rho(1.0, dof(2)).is_err());

        let e = (-12.5f64).exp();
        assert!((asymptotic_delta_of_tau(5.0, dof(2)).unwrap() / (e / 2.0) - 1.0).abs() < 1e-13);
        assert!((asymptotic_delta_of_tau(5.0, dof(2)).unwrap() / 1.86330e-6 - 1.0).abs() < 5e-5);
        assert!((asymptotic_delta_of_tau(5.0, dof(4)).unwrap() / (25.0 * e / 8.0) - 1.0).abs() < 1e-13);

        assert!((asymptotic_rho_of_tau(2f64.sqrt(), dof(2)).unwrap() - 1.0).abs() < 1e-15);
        assert!((asymptotic_rho_of_tau(10.0, dof(4)).unwrap() - 0.04).abs() < 1e-16);
    }

    #[test]
    fn deep_point_matches_large_threshold_approximations() {
        let p = lasso_pt_lemma(1e-7, dof(2)).unwrap();
        let d = asymptotic_delta_of_tau(p.tau_star, dof(2)).unwrap();
        assert!((d / 1e-7 - 1.0).abs() < 0.3, "{d}");
        let r = asymptotic_rho_of_tau(p.tau_star, dof(2)).unwrap();
        assert!((p.rho / r - 1.0).abs() < 0.2, "{} vs {r}", p.rho);
    }

    #[test]
    fn gstar_parameter_arithmetic() {
        let l = 999f64.ln();
        let p = gstar_params(1e-3, 0.2, 2).unwrap();
        assert!((p.mu - 3.32427).abs() < 1e-5);
        assert!((p.a - 0.2 * l / p.mu).abs() < 1e-15);
        assert!((p.a - 0.41558).abs() < 1e-4);
        let tiny = gstar_params(1e-3, 1e-12, 2).unwrap();
        assert!((tiny.mu - (2.0 * l).sqrt()).abs() < 1e-6);
        assert!(((2.0 * l).sqrt() - 3.71665).abs() < 1e-5);
        assert!((default_gamma(1e-3).unwrap() - l.powf(-0.25)).abs() < 1e-15);
        assert!(gstar_params(0.5, 0.2, 2).is_err());
        assert!(gstar_params(0.1, 1.0, 2).is_err());
    }

    #[test]
    fn gstar_invariants_and_limits() {
        let (mut g_prev, mut a_prev, mut mu_prev) = (f64::INFINITY, 0.0, 0.0);
        for k in 2..=8 {
            let eps = 10f64.powi(-k);
            let p = gstar_params_default(eps, 2).unwrap();
            let lo = (eps / (1.0 - eps)).ln();
            assert!(((1.0 - p.gamma) * lo + 0.5 * p.mu * p.mu).abs() < 1e-10);
            assert!((p.gamma * lo + p.a * p.mu).abs() < 1e-10);
            assert!(p.gamma < g_prev && p.a > a_prev && p.mu > mu_prev);
            (g_prev, a_prev, mu_prev) = (p.gamma, p.a, p.mu);
        }
    }

    #[test]
    fn risk_asymptote_arithmetic() {
        let v = gstar_risk_asymptote(1e-3, 0.2, dof(2)).unwrap();
        assert!((v - 1e-3 * 1.6 * 999f64.ln() / 2.0).abs() < 1e-15);
        assert!((v - 5.5250e-3).abs() < 1e-6);
        let eps: f64 = 1e-4;
        let g0 = gstar_risk_asymptote(eps, 0.0, dof(1)).unwrap();
        assert!((g0 - 2.0 * eps * ((1.0 - eps) / eps).ln()).abs() < 1e-18);
        // setting the asymptote to δ gives ρ = ε/δ = B/(2(1−γ)L), which
        // approaches B/(2 ln(1/δ)) as δ → 0
        let gap = |delta: f64| {
            let gamma = 1e-3;
            let eps = find_root(
                |e| gstar_risk_asymptote(e, gamma, dof(2)).unwrap() - delta,
                (1e-300, 0.4),
                1e-300,
            )
            .unwrap();
            let rho = eps / delta;
            let l = ((1.0 - eps) / eps).ln();
            assert!((rho * 2.0 * (1.0 - gamma) * l / 2.0 - 1.0).abs() < 1e-9);
            (rho / asymptotic_rho(delta, dof(2)).unwrap() - 1.0).abs()
        };
        assert!(gap(1e-30) < gap(1e-6));
    }

    #[test]
    fn risk_estimators_agree() {
        for b in [1, 2, 3] {
            let p = gstar_params(1e-2, 0.3, b).unwrap();
            let q = gstar_risk(&p, RiskEstimator::Quadrature2D).unwrap();
            let mc = gstar_risk(&p, RiskEstimator::MonteCarlo { samples: 100_000, seed: 3 }).unwrap();
            assert!((q.value - mc.value).abs() < 3.5 * mc.std_error, "B = {b}: {} vs {} ± {}", q.value, mc.value, mc.std_error);
            // zero estimator has risk εμ²/B
            assert!(q.value <= p.epsilon * p.mu * p.mu / b as f64);
        }
    }

    #[test]
    fn risk_vanishes_without_slab_mass() {
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6] {
            let p = GStarParams {
                epsilon: eps,
                gamma: 0.5,
                mu: 3.0,
                a: 1.0,
                block_size: 2,
            };
            let r = gstar_risk(&p, RiskEstimator::Quadrature2D).unwrap().value;
            assert!(r > 0.0 && r < prev);
            prev = r;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn tail_bound_arithmetic() {
        let v = tail_bound(dof(2), 4.0).unwrap();
        assert!((v - (2.0 * (-8.0f64).exp() + 8.0 * (-7.0f64).exp())).abs() < 1e-12);
        assert!((v - 7.9655e-3).abs() < 1e-6);
        assert_eq!(tail_bound(dof(8), 2.0).unwrap(), 1.0);
        assert_eq!(tail_bound(dof(4), 2.0).unwrap(), 1.0);
    }

    #[test]
    fn tail_probability_scalar_case_matches_normal_tails() {
        // B = 1: P{|μ + z| > μ + a} = Q(a) + Q(2μ + a)
        let (mu, a) = (2.0, 1.5);
        let (p, se) = tail_prob_mc(dof(1), mu, a, 400_000, RngStream::new(8, 1)).unwrap();
        let exact = normal_sf(a) + normal_sf(2.0 * mu + a);
        assert!((p - exact).abs() < 3.5 * se);
    }

    #[test]
    fn tail_probability_is_direction_free() {
        let mut rng = RngStream::new(4, 4).rng();
        let dir = crate::model::sample_sphere_uniform(4, 1.0, &mut rng).unwrap();
        let (p1, s1) = tail_prob_mc(dof(4), 3.0, 3.0, 1_000_000, RngStream::new(1, 0)).unwrap();
        let (p2, s2) = tail_prob_mc_along(&dir, 3.0, 3.0, 1_000_000, RngStream::new(1, 1)).unwrap();
        assert!((p1 - p2).abs() < 3.0 * (s1 * s1 + s2 * s2).sqrt());
        let (tiny, _) = tail_prob_mc(dof(2), 50.0, 8.0, 10_000, RngStream::new(1, 2)).unwrap();
        assert_eq!(tiny, 0.0);
    }

    #[test]
    fn pt_curve_sorted_and_monotone() {
        let c = pt_curve(&[0.9, 0.1, 0.5], dof(2), PtRoute::Lemma).unwrap();
        let d: Vec<f64> = c.points.iter().map(|p| p.delta).collect();
        assert_eq!(d, vec![0.1, 0.5, 0.9]);
        assert!(c.points.windows(2).all(|w| w[0].rho <= w[1].rho));
        assert!(lasso_pt_lemma(0.0, dof(2)).is_err());
        assert!(lasso_pt_fixedpoint(1.0, dof(2)).is_err());
    }
}
