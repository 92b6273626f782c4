//! Monte Carlo phase-transition sweeps and empirical transition fits.

use rayon::prelude::*;

use crate::amp::{AmpConfig, amp_solve, relative_error};
use crate::error::{Error, Result};
use crate::model::{InstanceSpec, RngStream, Slab, build_instance};
use crate::numerics::{ChiSquareDof, find_root, minimize_scalar, normal_cdf};
use crate::phase_transition::{asymptotic_rho, lasso_pt_lemma};
use crate::shrinkage::Rule;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "BLOCKSPARSE_THREADS";

/// ρ values of a sweep, either absolute or as multiples of ρ^L(δ).
#[derive(Debug, Clone, PartialEq)]
pub enum RhoGrid {
    Absolute(Vec<f64>),
    Multipliers(Vec<f64>),
}

impl RhoGrid {
    fn values(&self) -> &[f64] {
        match self {
            RhoGrid::Absolute(v) | RhoGrid::Multipliers(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub block_sizes: Vec<usize>,
    pub delta_grid: Vec<f64>,
    pub rho_grid: RhoGrid,
    pub trials_per_cell: usize,
    pub signal_dim: usize,
    pub slab: Slab,
    pub master_seed: u64,
    pub success_tol: f64,
    pub onsager: bool,
    pub max_iter: usize,
}

impl SweepConfig {
    /// Soft-rule AMP at τ*(δ), ρ multipliers 0.5, 0.6, …, 1.5, sphere μ = 10.
    pub fn new(block_sizes: Vec<usize>, delta_grid: Vec<f64>, trials_per_cell: usize, signal_dim: usize) -> Self {
        Self {
            block_sizes,
            delta_grid,
            rho_grid: RhoGrid::Multipliers(parse_grid("0.5:1.5:0.1").expect("static grid")),
            trials_per_cell,
            signal_dim,
            slab: Slab::SphereUniform { radius: 10.0 },
            master_seed: 0,
            success_tol: 1e-4,
            onsager: true,
            max_iter: 500,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.delta_grid.is_empty() || self.rho_grid.values().is_empty() {
            return Err(Error::Config("sweep grids must be nonempty".into()));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::Config("trials per cell must be at least 1".into()));
        }
        for &b in &self.block_sizes {
            if b == 0 || self.signal_dim % b != 0 {
                return Err(Error::Dimension(format!(
                    "block size {b} must divide N = {}",
                    self.signal_dim
                )));
            }
        }
        for &d in &self.delta_grid {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::Domain(format!("delta must lie in (0, 1), got {d}")));
            }
        }
        if self.rho_grid.values().iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::Domain("rho values must be finite and nonnegative".into()));
        }
        if !(self.success_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("success_tol and max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Aggregate over the trials of one (B, δ, ρ) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub block_size: usize,
    pub delta: f64,
    pub rho: f64,
    pub trials: usize,
    pub successes: usize,
    pub mean_rel_error: f64,
    pub mean_iterations: f64,
    /// Why a cell was skipped (trials = 0).
    pub skipped: Option<String>,
}

impl SweepRow {
    pub fn success_fraction(&self) -> f64 {
        if self.trials == 0 {
            f64::NAN
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

/// Fitted 50%-success sparsity at one (B, δ).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPT {
    pub block_size: usize,
    pub delta: f64,
    pub rho50: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// The data never crosses 1/2 inside the grid; rho50 is a grid boundary.
    pub open: bool,
}

/// Parses `lo:hi:step` into lo, lo+step, …, hi (inclusive up to rounding).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("grid must look like lo:hi:step, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi >= lo) {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::Config(format!("grid '{spec}' has too many points")));
    }
    // rounded so that 0.1 steps print as 0.3, not 0.30000000000000004
    Ok((0..count)
        .map(|i| {
            let v = lo + i as f64 * step;
            (v * 1e12).round() / 1e12
        })
        .collect())
}

/// Parses `v1,v2,...`.
pub fn parse_list(spec: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{s}' in list")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Config("empty list".into()));
    }
    Ok(values)
}

/// Thread count from [`THREADS_ENV`], or the machine's parallelism.
pub fn configured_threads() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        _ => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

struct Cell {
    block_size: usize,
    delta: f64,
    rho: f64,
    tau: f64,
    skipped: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    success: bool,
    rel_error: f64,
    iterations: usize,
}

fn run_trial(cell: &Cell, cfg: &SweepConfig, stream: RngStream) -> Result<Outcome> {
    let spec = InstanceSpec {
        delta: cell.delta,
        rho: cell.rho,
        signal_dim: cfg.signal_dim,
        block_size: cell.block_size,
        slab: cfg.slab,
    };
    let inst = build_instance(&spec, stream)?;
    let amp = AmpConfig {
        rule: Rule::soft(cell.tau)?,
        max_iter: cfg.max_iter,
        rtol: 1e-10,
        onsager: cfg.onsager,
        success_tol: cfg.success_tol,
    };
    match amp_solve(&inst, &amp) {
        Ok(r) => {
            let e = relative_error(&r.estimate, &inst.truth);
            Ok(Outcome {
                success: e <= cfg.success_tol,
                rel_error: e,
                iterations: r.iterations,
            })
        }
        Err(Error::Divergence { iteration, .. }) => Ok(Outcome {
            success: false,
            rel_error: f64::INFINITY,
            iterations: iteration,
        }),
        Err(e) => Err(e),
    }
}

/// Runs every (B, δ, ρ) cell; trial t of cell c uses
/// `RngStream::for_trial(master_seed, c, t)`, so rows do not depend on the
/// schedule. Cells whose sparsity cannot be realized are kept with
/// trials = 0.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let threads = configured_threads()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| sweep_in_pool(cfg))
}

fn sweep_in_pool(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut cells = Vec::new();
    for &b in &cfg.block_sizes {
        let dof = ChiSquareDof::new(b)?;
        for &delta in &cfg.delta_grid {
            let pt = lasso_pt_lemma(delta, dof)?;
            for &v in cfg.rho_grid.values() {
                let rho = match cfg.rho_grid {
                    RhoGrid::Absolute(_) => v,
                    RhoGrid::Multipliers(_) => v * pt.rho,
                };
                let spec = InstanceSpec {
                    delta,
                    rho,
                    signal_dim: cfg.signal_dim,
                    block_size: b,
                    slab: cfg.slab,
                };
                let skipped = match spec.validate() {
                    Ok(()) => None,
                    Err(e @ (Error::InfeasibleSparsity { .. } | Error::Dimension(_))) => Some(e.to_string()),
                    Err(e) => return Err(e),
                };
                cells.push(Cell {
                    block_size: b,
                    delta,
                    rho,
                    tau: pt.tau_star,
                    skipped,
                });
            }
        }
    }
    if cells.len() > u32::MAX as usize || cfg.trials_per_cell > u32::MAX as usize {
        return Err(Error::Config("sweep too large for 32-bit cell/trial ids".into()));
    }

    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.skipped.is_none())
        .flat_map(|(c, _)| (0..cfg.trials_per_cell).map(move |t| (c, t)))
        .collect();
    // collect() keeps job order, so aggregation below is schedule-free
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let stream = RngStream::for_trial(cfg.master_seed, c as u32, t as u32);
            run_trial(&cells[c], cfg, stream)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cells.len());
    let mut k = 0;
    for cell in cells {
        let mut row = SweepRow {
            block_size: cell.block_size,
            delta: cell.delta,
            rho: cell.rho,
            trials: 0,
            successes: 0,
            mean_rel_error: f64::NAN,
            mean_iterations: f64::NAN,
            skipped: cell.skipped.clone(),
        };
        if cell.skipped.is_none() {
            let chunk = &outcomes[k..k + cfg.trials_per_cell];
            k += cfg.trials_per_cell;
            let n = chunk.len() as f64;
            row.trials = chunk.len();
            row.successes = chunk.iter().filter(|o| o.success).count();
            row.mean_rel_error = chunk.iter().map(|o| o.rel_error).sum::<f64>() / n;
            row.mean_iterations = chunk.iter().map(|o| o.iterations as f64).sum::<f64>() / n;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// ln Φ(x), accurate in the far left tail.
fn ln_normal_cdf(x: f64) -> f64 {
    if x > -30.0 {
        normal_cdf(x).ln()
    } else {
        let x2 = x * x;
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Binomial counts at one ρ.
#[derive(Debug, Clone, Copy)]
struct Counts {
    rho: f64,
    trials: f64,
    successes: f64,
}

/// Probit log-likelihood with P(success | ρ) = Φ((ρ50 − ρ)/s).
fn log_lik(data: &[Counts], rho50: f64, s: f64) -> f64 {
    data.iter()
        .map(|c| {
            let eta = (rho50 - c.rho) / s;
            let mut l = 0.0;
            if c.successes > 0.0 {
                l += c.successes * ln_normal_cdf(eta);
            }
            if c.trials > c.successes {
                l += (c.trials - c.successes) * ln_normal_cdf(-eta);
            }
            l
        })
        .sum()
}

struct ProbitFit<'a> {
    data: &'a [Counts],
    ln_s_range: (f64, f64),
}

impl ProbitFit<'_> {
    /// (max over s of the log-likelihood at fixed rho50, maximizing ln s)
    fn profile(&self, rho50: f64) -> (f64, f64) {
        match minimize_scalar(|t| -log_lik(self.data, rho50, t.exp()), self.ln_s_range, 1e-10) {
            Ok((t, v)) => (-v, t),
            Err(_) => (f64::NEG_INFINITY, f64::NAN),
        }
    }
}

/// χ²₁ 95% quantile.
const CHI2_95: f64 = 3.841_458_820_694_124;

/// Probit maximum-likelihood fit of success fraction against ρ, with a
/// profile-likelihood 95% interval for the 50% point. Expects rows at a
/// single (B, δ).
pub fn fit_transition(rows: &[SweepRow]) -> Result<EmpiricalPT> {
    let used: Vec<&SweepRow> = rows.iter().filter(|r| r.trials > 0).collect();
    let first = used
        .first()
        .ok_or_else(|| Error::Fit("no cells with trials".into()))?;
    let (block_size, delta) = (first.block_size, first.delta);
    if used.iter().any(|r| r.block_size != block_size || r.delta != delta) {
        return Err(Error::Fit("rows must share one (B, delta)".into()));
    }
    let mut data: Vec<Counts> = used
        .iter()
        .map(|r| Counts {
            rho: r.rho,
            trials: r.trials as f64,
            successes: r.successes as f64,
        })
        .collect();
    data.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    let mut distinct: Vec<f64> = data.iter().map(|c| c.rho).collect();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 distinct rho values, got {}",
            distinct.len()
        )));
    }
    let (rmin, rmax) = (distinct[0], *distinct.last().expect("nonempty"));
    let result = |rho50: f64, ci_lo: f64, ci_hi: f64, open: bool| EmpiricalPT {
        block_size,
        delta,
        rho50,
        ci_lo,
        ci_hi,
        open,
    };

    if data.iter().all(|c| c.successes == c.trials) {
        return Ok(result(rmax, rmax, f64::INFINITY, true));
    }
    if data.iter().all(|c| c.successes == 0.0) {
        return Ok(result(rmin, 0.0, rmin, true));
    }
    // complete separation: the MLE width collapses to zero
    let last_success = data.iter().filter(|c| c.successes > 0.0).map(|c| c.rho).fold(f64::NEG_INFINITY, f64::max);
    let first_failure = data
        .iter()
        .filter(|c| c.successes < c.trials)
        .map(|c| c.rho)
        .fold(f64::INFINITY, f64::min);
    let pure = data.iter().all(|c| c.successes == 0.0 || c.successes == c.trials);
    if pure && last_success < first_failure {
        return Ok(result(0.5 * (last_success + first_failure), last_success, first_failure, false));
    }

    let span = rmax - rmin;
    let min_gap = distinct.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let fit = ProbitFit {
        data: &data,
        ln_s_range: ((1e-3 * min_gap).ln(), (100.0 * span).ln()),
    };
    let (lo_r, hi_r) = (rmin - span, rmax + span);
    const GRID: usize = 400;
    let mut best = (f64::NEG_INFINITY, rmin);
    for i in 0..=GRID {
        let r = lo_r + (hi_r - lo_r) * i as f64 / GRID as f64;
        let (l, _) = fit.profile(r);
        if l > best.0 {
            best = (l, r);
        }
    }
    let cell = (hi_r - lo_r) / GRID as f64;
    let (rho50, neg) = minimize_scalar(|r| -fit.profile(r).0, (best.1 - cell, best.1 + cell), 1e-12)?;
    let lmax = -neg;
    if !lmax.is_finite() {
        return Err(Error::Fit("likelihood is not finite at the optimum".into()));
    }
    let deviance = |r: f64| 2.0 * (lmax - fit.profile(r).0) - CHI2_95;
    let endpoint = |direction: f64| -> Result<f64> {
        let mut step = cell.max(1e-3 * span);
        let mut inner = rho50;
        loop {
            let outer = rho50 + direction * step;
            if deviance(outer) > 0.0 {
                let (a, b) = if direction < 0.0 { (outer, inner) } else { (inner, outer) };
                return find_root(deviance, (a, b), 1e-12 * span.max(1e-300));
            }
            if step > 100.0 * span {
                return Ok(direction * f64::INFINITY);
            }
            inner = outer;
            step *= 2.0;
        }
    };
    let ci_lo = endpoint(-1.0)?;
    let ci_hi = endpoint(1.0)?;
    Ok(result(rho50, ci_lo.min(rho50), ci_hi.max(rho50), false))
}

/// Fits every (B, δ) group of a sweep, in first-appearance order.
pub fn fit_sweep(rows: &[SweepRow]) -> Result<Vec<EmpiricalPT>> {
    let mut keys: Vec<(usize, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(b, d)| b == r.block_size && d == r.delta) {
            keys.push((r.block_size, r.delta));
        }
    }
    keys.iter()
        .map(|&(b, d)| {
            let group: Vec<SweepRow> = rows
                .iter()
                .filter(|r| r.block_size == b && r.delta == d)
                .cloned()
                .collect();
            fit_transition(&group)
        })
        .collect()
}

/// Analytic against empirical transitions at one (B, δ).
#[derive(Debug, Clone, PartialEq)]
pub struct PtTableRow {
    pub block_size: usize,
    pub delta: f64,
    pub rho_lemma: f64,
    pub rho_asymptotic: f64,
    pub empirical: Option<EmpiricalPT>,
}

pub fn pt_table(
    block_sizes: &[usize],
    delta_grid: &[f64],
    empirical: Option<&[EmpiricalPT]>,
) -> Result<Vec<PtTableRow>> {
    let mut out = Vec::new();
    for &b in block_sizes {
        let dof = ChiSquareDof::new(b)?;
        for &delta in delta_grid {
            let emp = empirical
                .and_then(|e| e.iter().find(|p| p.block_size == b && p.delta == delta))
                .cloned();
            out.push(PtTableRow {
                block_size: b,
                delta,
                rho_lemma: lasso_pt_lemma(delta, dof)?.rho,
                rho_asymptotic: asymptotic_rho(delta, dof)?,
                empirical: emp,
            });
        }
    }
    Ok(out)
}
