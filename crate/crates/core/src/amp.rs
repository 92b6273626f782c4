//! Approximate message passing for noiseless block-sparse recovery.
//!
//! ```text
//! u^t     = x^t + Aᵀ z^t
//! x^{t+1} = η(u^t; σ̂_t)                      blockwise
//! z^{t+1} = y − A x^{t+1} + z^t · (1/n) Σ_b div η(u^t_b; σ̂_t)
//! σ̂_t     = ‖z^t‖ / √n
//! ```
//!
//! Starting from x⁰ = 0, z⁰ = 0 the first step only sets z¹ = y.

use crate::error::{Error, Result};
use crate::model::{BlockSignal, ProblemInstance};
use crate::numerics::ChiSquareDof;
use crate::phase_transition::lasso_pt_lemma;
use crate::shrinkage::{Rule, ShrinkageRule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpConfig {
    pub rule: Rule,
    pub max_iter: usize,
    /// Stop once ‖x^{t+1} − x^t‖ ≤ rtol·‖x^t‖.
    pub rtol: f64,
    pub onsager: bool,
    /// Relative ℓ₂ error below which a solve counts as a recovery.
    pub success_tol: f64,
}

impl AmpConfig {
    pub fn new(rule: Rule) -> Self {
        Self {
            rule,
            max_iter: 500,
            rtol: 1e-10,
            onsager: true,
            success_tol: 1e-4,
        }
    }

    /// Soft rule at the transition threshold τ*(δ) for blocks of size B.
    pub fn soft_at_transition(delta: f64, block_size: usize) -> Result<Self> {
        let p = lasso_pt_lemma(delta, ChiSquareDof::new(block_size)?)?;
        Ok(Self::new(Rule::soft(p.tau_star)?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.rtol > 0.0 && self.success_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub sigma_hat: f64,
    pub iter: usize,
}

impl AmpState {
    /// x⁰ = 0, z⁰ = 0.
    pub fn zeros(signal_dim: usize, n: usize) -> Self {
        Self {
            x: vec![0.0; signal_dim],
            z: vec![0.0; n],
            sigma_hat: 0.0,
            iter: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpResult {
    pub estimate: Vec<f64>,
    pub iterations: usize,
    /// σ̂ after each step.
    pub sigma_history: Vec<f64>,
    pub converged: bool,
}

/// ‖z‖ / √n.
pub fn estimate_noise(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let ss: f64 = z.iter().map(|v| v * v).sum();
    (ss / z.len() as f64).sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// One AMP iteration.
pub fn amp_step(state: &AmpState, instance: &ProblemInstance, cfg: &AmpConfig) -> Result<AmpState> {
    let a = &instance.matrix;
    let (n, dim) = (a.rows(), a.cols());
    if state.x.len() != dim || state.z.len() != n {
        return Err(Error::Dimension(format!(
            "state has |x| = {}, |z| = {} for a {n}×{dim} instance",
            state.x.len(),
            state.z.len()
        )));
    }
    let mut corr = vec![0.0; dim];
    a.tr_mul_vec(&state.z, &mut corr);
    advance(state, &corr, instance, cfg).map(|(next, _)| next)
}

/// The step given Aᵀz^t; also returns Aᵀz^{t+1} for the next call.
fn advance(
    state: &AmpState,
    corr: &[f64],
    instance: &ProblemInstance,
    cfg: &AmpConfig,
) -> Result<(AmpState, Vec<f64>)> {
    let a = &instance.matrix;
    let (n, dim) = (a.rows(), a.cols());
    let b = instance.block_size();
    let sigma = state.sigma_hat;

    let u: Vec<f64> = corr.iter().zip(&state.x).map(|(c, x)| c + x).collect();

    let mut x = vec![0.0; dim];
    let mut div = 0.0;
    for (ub, xb) in u.chunks_exact(b).zip(x.chunks_exact_mut(b)) {
        cfg.rule.apply(ub, sigma, xb);
        if cfg.onsager {
            div += cfg.rule.divergence(ub, sigma);
        }
    }
    let onsager = div / n as f64;

    let mut z = vec![0.0; n];
    let mut next_corr = vec![0.0; dim];
    let y = &instance.observations;
    a.mul_then_tr_mul(&x, |i, ax| y[i] - ax + onsager * state.z[i], &mut z, &mut next_corr);
    let sigma_hat = estimate_noise(&z);
    let iter = state.iter + 1;
    if !sigma_hat.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            iteration: iter,
            sigma_history: vec![sigma_hat],
        });
    }
    Ok((AmpState { x, z, sigma_hat, iter }, next_corr))
}

/// Runs AMP from zero until the estimate stops moving or `max_iter`.
pub fn amp_solve(instance: &ProblemInstance, cfg: &AmpConfig) -> Result<AmpResult> {
    amp_solve_observed(instance, cfg, |_| {})
}

/// [`amp_solve`] calling `observe` on every new state.
pub fn amp_solve_observed<F: FnMut(&AmpState)>(
    instance: &ProblemInstance,
    cfg: &AmpConfig,
    mut observe: F,
) -> Result<AmpResult> {
    cfg.validate()?;
    cfg.rule.check_block_size(instance.block_size())?;
    let mut state = AmpState::zeros(instance.signal_dim, instance.n);
    if state.z.len() != instance.matrix.rows() || state.x.len() != instance.matrix.cols() {
        return Err(Error::Dimension("instance sizes disagree with its matrix".into()));
    }
    let mut corr = vec![0.0; instance.signal_dim];
    let mut history = Vec::new();
    let mut converged = false;
    while state.iter < cfg.max_iter {
        let next = match advance(&state, &corr, instance, cfg) {
            Ok((s, c)) => {
                corr = c;
                s
            }
            Err(Error::Divergence { iteration, sigma_history }) => {
                history.extend(sigma_history);
                return Err(Error::Divergence {
                    iteration,
                    sigma_history: history,
                });
            }
            Err(e) => return Err(e),
        };
        history.push(next.sigma_hat);
        observe(&next);
        let change: f64 = next
            .x
            .iter()
            .zip(&state.x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let size = norm(&state.x);
        let done = if size > 0.0 {
            change <= cfg.rtol * size
        } else {
            change == 0.0 && next.sigma_hat == state.sigma_hat
        };
        state = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(AmpResult {
        estimate: state.x,
        iterations: state.iter,
        sigma_history: history,
        converged,
    })
}

/// ‖x̂ − x‖ / max(‖x‖, 1).
pub fn relative_error(estimate: &[f64], truth: &BlockSignal) -> f64 {
    let err: f64 = estimate
        .iter()
        .zip(truth.entries())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    err / norm(truth.entries()).max(1.0)
}

pub fn recovery_success(result: &AmpResult, truth: &BlockSignal, success_tol: f64) -> bool {
    result.estimate.len() == truth.len() && relative_error(&result.estimate, truth) <= success_tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DenseMatrix, RngStream, Slab, make_instance};
    use rand_distr::{Distribution, StandardNormal};

    fn rho_l(delta: f64, b: usize) -> f64 {
        lasso_pt_lemma(delta, ChiSquareDof::new(b).unwrap()).unwrap().rho
    }

    #[test]
    fn noise_estimate_examples() {
        assert_eq!(estimate_noise(&[0.0; 5]), 0.0);
        assert_eq!(estimate_noise(&[1.0; 4]), 1.0);
        let mut rng = RngStream::new(1, 0).rng();
        let z: Vec<f64> = (0..10_000).map(|_| 2.5 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        assert!((estimate_noise(&z) / 2.5 - 1.0).abs() < 0.05);
    }

    fn tiny_instance(seed: u64) -> ProblemInstance {
        make_instance(0.5, 0.5, 8, 2, Slab::SphereUniform { radius: 3.0 }, seed).unwrap()
    }

    #[test]
    fn zero_problem_stays_zero() {
        let inst = make_instance(0.5, 0.0, 40, 2, Slab::SphereUniform { radius: 1.0 }, 3).unwrap();
        let cfg = AmpConfig::new(Rule::soft(1.5).unwrap());
        let s = amp_step(&AmpState::zeros(40, 20), &inst, &cfg).unwrap();
        assert!(s.x.iter().chain(&s.z).all(|&v| v == 0.0));
        let r = amp_solve(&inst, &cfg).unwrap();
        assert!(r.converged && r.iterations <= 2);
        assert!(r.estimate.iter().all(|&v| v == 0.0));
        assert!(recovery_success(&r, &inst.truth, 1e-4));
    }

    #[test]
    fn dead_zone_step_returns_observations() {
        let inst = tiny_instance(4);
        let mut cfg = AmpConfig::new(Rule::soft(1e6).unwrap());
        cfg.onsager = false;
        let mut state = AmpState::zeros(8, 4);
        state.z = inst.observations.clone();
        state.sigma_hat = estimate_noise(&state.z);
        let s = amp_step(&state, &inst, &cfg).unwrap();
        assert!(s.x.iter().all(|&v| v == 0.0));
        assert_eq!(s.z, inst.observations);
    }

    #[test]
    fn step_matches_straight_line_computation() {
        let inst = tiny_instance(11);
        let a = &inst.matrix;
        let tau = 0.8;
        let cfg = AmpConfig::new(Rule::soft(tau).unwrap());
        let mut state = AmpState::zeros(8, 4);
        state.x = vec![0.3, -0.2, 0.0, 0.0, 1.1, 0.4, 0.0, -0.7];
        state.z = vec![0.5, -1.0, 0.25, 0.75];
        state.sigma_hat = estimate_noise(&state.z);
        let got = amp_step(&state, &inst, &cfg).unwrap();

        let sigma = (state.z.iter().map(|v| v * v).sum::<f64>() / 4.0).sqrt();
        let mut u = [0.0; 8];
        for j in 0..8 {
            u[j] = state.x[j];
            for i in 0..4 {
                u[j] += a.get(i, j) * state.z[i];
            }
        }
        let mut x = [0.0; 8];
        let mut div = 0.0;
        for blk in 0..4 {
            let (p, q) = (u[2 * blk], u[2 * blk + 1]);
            let r = (p * p + q * q).sqrt();
            let t = tau * sigma;
            if r > t {
                x[2 * blk] = p * (1.0 - t / r);
                x[2 * blk + 1] = q * (1.0 - t / r);
                div += 2.0 - t / r;
            }
        }
        for i in 0..4 {
            let mut ax = 0.0;
            for j in 0..8 {
                ax += a.get(i, j) * x[j];
            }
            let z = inst.observations[i] - ax + state.z[i] * div / 4.0;
            assert!((got.z[i] - z).abs() < 1e-13);
        }
        for j in 0..8 {
            assert!((got.x[j] - x[j]).abs() < 1e-14);
        }
        assert_eq!(got.iter, 1);
    }

    #[test]
    fn truth_is_nearly_fixed() {
        let inst = make_instance(0.5, 0.2, 400, 2, Slab::SphereUniform { radius: 10.0 }, 5).unwrap();
        let cfg = AmpConfig::new(Rule::soft(1.0).unwrap());
        let mut state = AmpState::zeros(400, 200);
        state.x = inst.truth.entries().to_vec();
        let s = amp_step(&state, &inst, &cfg).unwrap();
        assert_eq!(s.x, state.x);
        assert!(s.z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn recovers_below_and_fails_above_transition() {
        let (delta, b) = (0.5, 2);
        let cfg = AmpConfig::soft_at_transition(delta, b).unwrap();
        let slab = Slab::SphereUniform { radius: 10.0 };
        let rl = rho_l(delta, b);
        let below = make_instance(delta, 0.3 * rl, 1000, b, slab, 21).unwrap();
        let r = amp_solve(&below, &cfg).unwrap();
        assert!(relative_error(&r.estimate, &below.truth) <= 1e-4);
        assert!(r.converged && recovery_success(&r, &below.truth, cfg.success_tol));
        let above = make_instance(delta, 2.0 * rl, 1000, b, slab, 21).unwrap();
        let r = amp_solve(&above, &cfg).unwrap();
        assert!(relative_error(&r.estimate, &above.truth) > 1e-2);
    }

    #[test]
    fn success_threshold_arithmetic() {
        let truth = BlockSignal::new(2, vec![3.0, 4.0, 0.0, 0.0]).unwrap();
        let exact = AmpResult {
            estimate: truth.entries().to_vec(),
            iterations: 1,
            sigma_history: vec![0.0],
            converged: true,
        };
        assert!(recovery_success(&exact, &truth, 1e-4));
        let zero = AmpResult { estimate: vec![0.0; 4], ..exact.clone() };
        assert!(!recovery_success(&zero, &truth, 1e-4));
        // ‖x‖ = 5: a relative perturbation of half the tolerance passes
        let near = AmpResult {
            estimate: truth.entries().iter().map(|v| v * (1.0 + 0.5e-4)).collect(),
            ..exact.clone()
        };
        assert!(recovery_success(&near, &truth, 1e-4));
        let far = AmpResult {
            estimate: truth.entries().iter().map(|v| v * (1.0 + 2e-4)).collect(),
            ..exact
        };
        assert!(!recovery_success(&far, &truth, 1e-4));
    }

    #[test]
    fn block_permutation_commutes_with_solve() {
        let inst = make_instance(0.5, 0.2, 60, 3, Slab::GaussianIso { std: 2.0 }, 8).unwrap();
        let b = 3;
        let m = 20;
        let block_perm: Vec<usize> = (0..m).map(|i| (7 * i + 3) % m).collect();
        let perm: Vec<usize> = block_perm.iter().flat_map(|&p| (0..b).map(move |k| p * b + k)).collect();
        let a2 = inst.matrix.permute_columns(&perm);
        let x2: Vec<f64> = perm.iter().map(|&j| inst.truth.entries()[j]).collect();
        let inst2 = ProblemInstance::from_parts(a2, BlockSignal::new(b, x2).unwrap(), inst.stream).unwrap();
        let cfg = AmpConfig::new(Rule::soft(1.2).unwrap());
        let r1 = amp_solve(&inst, &cfg).unwrap();
        let r2 = amp_solve(&inst2, &cfg).unwrap();
        for (k, &j) in perm.iter().enumerate() {
            assert!((r2.estimate[k] - r1.estimate[j]).abs() < 1e-9 * (1.0 + r1.estimate[j].abs()));
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let inst = tiny_instance(1);
        let cfg = AmpConfig::new(Rule::soft(1.0).unwrap());
        assert!(matches!(amp_step(&AmpState::zeros(6, 4), &inst, &cfg), Err(Error::Dimension(_))));
        let bad = AmpConfig { max_iter: 0, ..cfg };
        assert!(amp_solve(&inst, &bad).is_err());
    }

    #[test]
    fn overflow_is_reported_with_history() {
        let a = DenseMatrix::from_row_major(1, 2, vec![1e200, 1e200]).unwrap();
        let truth = BlockSignal::new(1, vec![1e200, 0.0]).unwrap();
        let inst = ProblemInstance::from_parts(a, truth, RngStream::new(0, 0)).unwrap();
        let cfg = AmpConfig::new(Rule::soft(0.1).unwrap());
        match amp_solve(&inst, &cfg) {
            Err(Error::Divergence { iteration, sigma_history }) => {
                assert!(iteration >= 1);
                assert_eq!(sigma_history.len(), iteration);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
