//! Command-line front end.
//!
//! Every subcommand writes CSV or `key = value` text to `--out` (standard
//! output by default). Exit codes: 0 success, 1 numerical failure, 2 usage
//! or domain error.
//!
//! `--config FILE` reads `key = value` lines (`#` comments), keys being long
//! flag names with dashes replaced by underscores. Command-line flags win
//! over the file, the file over built-in defaults.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::amp::{AmpConfig, amp_solve_observed, relative_error};
use crate::error::{Error, Result};
use crate::experiments::{RhoGrid, SweepConfig, fit_sweep, parse_grid, parse_list, run_sweep};
use crate::model::{BlockPrior, InstanceSpec, RngStream, Slab, build_instance};
use crate::numerics::ChiSquareDof;
use crate::phase_transition::{
    GStarParams, RiskEstimator, asymptotic_rho, default_gamma, gstar_params, gstar_risk,
    gstar_risk_asymptote, lasso_pt_lemma, pt_curve, tail_bound, tail_prob_mc,
    PtRoute,
};
use crate::shrinkage::{Rule, RuleKind};
use crate::state_evolution::{SEConfig, SeEstimator, se_iterate};

/// Formats a float with the shortest digits that parse back to the same
/// value, laid out like C's `%g` (scientific below 1e−4 and from 1e17).
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };
    if !(-4..17).contains(&exp) {
        let es = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{mantissa}e{es}{:02}", exp.abs());
    }
    let n = digits.len() as i32;
    let body = if exp < 0 {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else if n <= exp + 1 {
        format!("{digits}{}", "0".repeat((exp + 1 - n) as usize))
    } else {
        let (a, b) = digits.split_at((exp + 1) as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{body}")
}

#[derive(Parser, Debug)]
#[command(name = "blocksparse", version, about = "Block-sparse recovery: phase transitions, state evolution and AMP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic phase-transition curves as CSV `B,delta,rho,tau_star,mode`.
    #[command(args_override_self = true)]
    Pt(PtArgs),
    /// State-evolution trajectory as CSV `iter,mse` plus a summary.
    #[command(args_override_self = true)]
    Se(SeArgs),
    /// One AMP recovery.
    #[command(args_override_self = true)]
    Solve(SolveArgs),
    /// Monte Carlo phase-transition sweep.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Bayes risk of the spike-and-sphere prior against its small-ε asymptote.
    #[command(args_override_self = true)]
    Risk(RiskArgs),
    /// Tail bound for ‖μθ + z‖ > μ + a against simulation.
    #[command(args_override_self = true)]
    Bound(BoundArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PtMode {
    Lemma,
    Fixedpoint,
    Asymptotic,
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output path; `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct PtArgs {
    #[arg(long, value_enum, default_value = "lemma")]
    mode: PtMode,
    /// Block size; repeat for several curves.
    #[arg(long = "block-size", default_values_t = [1usize, 2, 4, 8])]
    block_size: Vec<usize>,
    /// δ grid as lo:hi:step.
    #[arg(long = "delta-grid", conflicts_with = "delta_list")]
    delta_grid: Option<String>,
    /// δ values as v1,v2,...
    #[arg(long = "delta-list")]
    delta_list: Option<String>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct SeArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long = "block-size", default_value_t = 2)]
    block_size: usize,
    #[arg(long, default_value = "soft")]
    rule: String,
    /// Soft-threshold multiplier, or `auto` for τ*(δ).
    #[arg(long, default_value = "auto")]
    tau: String,
    /// Starting MSE, or `auto` for E‖x‖²/n.
    #[arg(long, default_value = "auto")]
    mse0: String,
    #[arg(long, default_value = "sphere:10")]
    slab: String,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `mc` or `semi` (soft rule only).
    #[arg(long, default_value = "mc")]
    estimator: String,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long = "signal-dim", default_value_t = 1000)]
    signal_dim: usize,
    #[arg(long = "block-size", default_value_t = 2)]
    block_size: usize,
    #[arg(long, default_value = "sphere:10")]
    slab: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "soft")]
    rule: String,
    #[arg(long, default_value = "auto")]
    tau: String,
    #[arg(long = "no-onsager")]
    no_onsager: bool,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
    #[arg(long = "success-tol", default_value_t = 1e-4)]
    success_tol: f64,
    /// Per-iteration CSV `iter,sigma_hat,rel_error`.
    #[arg(long)]
    trace: Option<String>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long = "block-sizes", default_value = "2")]
    block_sizes: String,
    #[arg(long = "delta-grid", conflicts_with = "delta_list")]
    delta_grid: Option<String>,
    #[arg(long = "delta-list")]
    delta_list: Option<String>,
    /// Multiples of ρ^L(δ) as lo:hi:step.
    #[arg(long = "rho-multipliers", conflicts_with = "rho_list")]
    rho_multipliers: Option<String>,
    /// Absolute ρ values as v1,v2,...
    #[arg(long = "rho-list")]
    rho_list: Option<String>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long = "signal-dim", default_value_t = 1000)]
    signal_dim: usize,
    #[arg(long, default_value = "sphere:10")]
    slab: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "no-onsager")]
    no_onsager: bool,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
    #[arg(long = "success-tol", default_value_t = 1e-4)]
    success_tol: f64,
    /// Append probit fits `B,delta,rho50,ci_lo,ci_hi`.
    #[arg(long)]
    fit: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct RiskArgs {
    #[arg(long)]
    epsilon: f64,
    /// γ in (0, 1), or `auto` for ln((1−ε)/ε)^(−1/4).
    #[arg(long, default_value = "auto")]
    gamma: String,
    #[arg(long = "block-size", default_value_t = 2)]
    block_size: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `mc` or `quad`.
    #[arg(long, default_value = "mc")]
    estimator: String,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long = "block-size", default_value_t = 2)]
    block_size: usize,
    #[arg(long, default_value_t = 10.0)]
    mu: f64,
    #[arg(long, default_value_t = 4.0)]
    a: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

/// Flags that take no value; a `true` in the config file turns them on.
const SWITCHES: &[&str] = &["no-onsager", "fit"];

/// Splices `key = value` lines of the file named by `--config` in front of
/// the command-line flags, so that later (command-line) values win.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    let program = it.next();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            let path = it
                .next()
                .ok_or_else(|| Error::Config("--config needs a file path".into()))?;
            config = Some(path.to_string_lossy().into_owned());
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let mut out: Vec<OsString> = program.into_iter().collect();
    let Some(path) = config else {
        out.extend(rest);
        return Ok(out);
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read config '{path}': {e}")))?;
    let mut injected = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{path}:{}: expected key = value", lineno + 1)))?;
        let flag = k.trim().replace('_', "-");
        let v = v.trim();
        if SWITCHES.contains(&flag.as_str()) {
            match v {
                "true" | "1" | "yes" => injected.push(OsString::from(format!("--{flag}"))),
                "false" | "0" | "no" => {}
                _ => return Err(Error::Config(format!("{path}:{}: '{flag}' takes true or false", lineno + 1))),
            }
        } else if flag == "block-size" && v.contains(',') {
            for part in v.split(',') {
                injected.push(OsString::from(format!("--{flag}={}", part.trim())));
            }
        } else {
            injected.push(OsString::from(format!("--{flag}={v}")));
        }
    }
    // the subcommand is the first argument; file flags go right after it
    let mut rest = rest.into_iter();
    out.extend(rest.next());
    out.extend(injected);
    out.extend(rest);
    Ok(out)
}

struct Output {
    path: String,
    buf: String,
}

impl Output {
    fn new(path: &str) -> Self {
        Self {
            path: path.to_string(),
            buf: String::new(),
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.buf.push_str(s.as_ref());
        self.buf.push('\n');
    }

    fn finish(self) -> Result<()> {
        write_target(&self.path, &self.buf)
    }
}

fn write_target(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Error::Numerical(format!("write failed: {e}")))
    } else {
        fs::write(path, text).map_err(|e| Error::Config(format!("cannot write '{path}': {e}")))
    }
}

fn delta_values(grid: &Option<String>, list: &Option<String>, default: &str) -> Result<Vec<f64>> {
    match (grid, list) {
        (Some(g), _) => parse_grid(g),
        (None, Some(l)) => parse_list(l),
        (None, None) => parse_grid(default),
    }
}

fn parse_slab(s: &str) -> Result<Slab> {
    s.parse()
}

/// Threshold multiplier from `--tau`: a number, or `auto` for τ*(δ).
fn resolve_tau(tau: &str, delta: f64, block_size: usize) -> Result<f64> {
    if tau == "auto" {
        Ok(lasso_pt_lemma(delta, ChiSquareDof::new(block_size)?)?.tau_star)
    } else {
        tau.parse::<f64>()
            .map_err(|_| Error::Config(format!("--tau must be a number or 'auto', got '{tau}'")))
    }
}

/// Builds a rule; the Bayes-type rules are matched to the prior ε and the
/// sphere radius of the slab.
fn build_rule(name: &str, tau: &str, delta: f64, epsilon: f64, block_size: usize, slab: Slab) -> Result<Rule> {
    let kind: RuleKind = name.parse()?;
    let rule = match kind {
        RuleKind::Soft => Rule::soft(resolve_tau(tau, delta, block_size)?)?,
        RuleKind::JamesStein => Rule::JamesStein,
        RuleKind::BayesGStar | RuleKind::HardApprox => {
            let Slab::SphereUniform { radius } = slab else {
                return Err(Error::Config(format!("rule '{kind}' needs a sphere slab")));
            };
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::DegeneratePrior(format!(
                    "rule '{kind}' needs 0 < rho*delta < 1, got {epsilon}"
                )));
            }
            if kind == RuleKind::BayesGStar {
                Rule::bayes_gstar(epsilon, radius)?
            } else {
                Rule::hard_approx(epsilon, radius)?
            }
        }
    };
    use crate::shrinkage::ShrinkageRule;
    rule.check_block_size(block_size)?;
    Ok(rule)
}

fn cmd_pt(a: PtArgs) -> Result<()> {
    let deltas = delta_values(&a.delta_grid, &a.delta_list, "0.05:0.95:0.05")?;
    if a.block_size.is_empty() {
        return Err(Error::Config("at least one --block-size is required".into()));
    }
    let mut out = Output::new(&a.out.out);
    out.line("B,delta,rho,tau_star,mode");
    for &b in &a.block_size {
        let dof = ChiSquareDof::new(b)?;
        match a.mode {
            PtMode::Asymptotic => {
                for &d in &deltas {
                    let rho = asymptotic_rho(d, dof)?;
                    out.line(format!("{b},{},{},,asymptotic", fmt_float(d), fmt_float(rho)));
                }
            }
            PtMode::Lemma | PtMode::Fixedpoint => {
                let (route, label) = if a.mode == PtMode::Lemma {
                    (PtRoute::Lemma, "lemma")
                } else {
                    (PtRoute::FixedPoint, "fixedpoint")
                };
                for p in pt_curve(&deltas, dof, route)?.points {
                    out.line(format!(
                        "{b},{},{},{},{label}",
                        fmt_float(p.delta),
                        fmt_float(p.rho),
                        fmt_float(p.tau_star)
                    ));
                }
            }
        }
    }
    out.finish()
}

fn cmd_se(a: SeArgs) -> Result<()> {
    let slab = parse_slab(&a.slab)?;
    let epsilon = a.rho * a.delta;
    let prior = BlockPrior::new(epsilon, a.block_size, slab)?;
    let rule = build_rule(&a.rule, &a.tau, a.delta, epsilon, a.block_size, slab)?;
    let mut cfg = SEConfig::new(a.delta, prior, rule)?;
    if a.mse0 != "auto" {
        cfg.mse0 = a
            .mse0
            .parse()
            .map_err(|_| Error::Config(format!("--mse0 must be a number or 'auto', got '{}'", a.mse0)))?;
    }
    cfg.max_iter = a.max_iter;
    cfg.estimator = match a.estimator.as_str() {
        "mc" => SeEstimator::MonteCarlo {
            samples: a.samples,
            seed: a.seed,
        },
        "semi" => SeEstimator::SemiAnalytic,
        other => return Err(Error::Config(format!("--estimator must be mc or semi, got '{other}'"))),
    };
    cfg.validate()?;
    let t = se_iterate(&cfg)?;
    let mut out = Output::new(&a.out.out);
    out.line("iter,mse");
    for (i, m) in t.mse_sequence.iter().enumerate() {
        out.line(format!("{i},{}", fmt_float(*m)));
    }
    out.line("converged,fixed_point");
    out.line(format!("{},{}", t.converged, fmt_float(t.fixed_point)));
    out.finish()
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let slab = parse_slab(&a.slab)?;
    let spec = InstanceSpec {
        delta: a.delta,
        rho: a.rho,
        signal_dim: a.signal_dim,
        block_size: a.block_size,
        slab,
    };
    spec.validate()?;
    let epsilon = a.rho * a.delta;
    let rule = build_rule(&a.rule, &a.tau, a.delta, epsilon, a.block_size, slab)?;
    let cfg = AmpConfig {
        rule,
        max_iter: a.max_iter,
        rtol: 1e-10,
        onsager: !a.no_onsager,
        success_tol: a.success_tol,
    };
    cfg.validate()?;
    let inst = build_instance(&spec, RngStream::new(a.seed, 0))?;
    let mut trace = String::from("iter,sigma_hat,rel_error\n");
    let result = amp_solve_observed(&inst, &cfg, |s| {
        let e = relative_error(&s.x, &inst.truth);
        let _ = writeln!(trace, "{},{},{}", s.iter, fmt_float(s.sigma_hat), fmt_float(e));
    })?;
    let err = relative_error(&result.estimate, &inst.truth);
    let mut out = Output::new(&a.out.out);
    out.line(format!("rule = {}", a.rule));
    out.line(format!("measurements = {}", inst.n));
    out.line(format!("active_blocks = {}", inst.truth.active_blocks().len()));
    out.line(format!("rel_error = {}", fmt_float(err)));
    out.line(format!("iterations = {}", result.iterations));
    out.line(format!("converged = {}", result.converged));
    out.line(format!("success = {}", err <= cfg.success_tol));
    if let Some(path) = &a.trace {
        write_target(path, &trace)?;
    }
    out.finish()
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let block_sizes: Vec<usize> = a
        .block_sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad block size '{s}'")))
        })
        .collect::<Result<_>>()?;
    let deltas = delta_values(&a.delta_grid, &a.delta_list, "0.25:0.25:1")?;
    let rho_grid = match (&a.rho_multipliers, &a.rho_list) {
        (Some(m), _) => RhoGrid::Multipliers(parse_grid(m)?),
        (None, Some(l)) => RhoGrid::Absolute(parse_list(l)?),
        (None, None) => RhoGrid::Multipliers(parse_grid("0.5:1.5:0.1")?),
    };
    let cfg = SweepConfig {
        block_sizes,
        delta_grid: deltas,
        rho_grid,
        trials_per_cell: a.trials,
        signal_dim: a.signal_dim,
        slab: parse_slab(&a.slab)?,
        master_seed: a.seed,
        success_tol: a.success_tol,
        onsager: !a.no_onsager,
        max_iter: a.max_iter,
    };
    let rows = run_sweep(&cfg)?;
    let mut out = Output::new(&a.out.out);
    out.line("B,delta,rho,trials,successes,mean_rel_error,mean_iters");
    for r in &rows {
        if let Some(reason) = &r.skipped {
            eprintln!(
                "note: skipped B={} delta={} rho={}: {reason}",
                r.block_size,
                fmt_float(r.delta),
                fmt_float(r.rho)
            );
        }
        out.line(format!(
            "{},{},{},{},{},{},{}",
            r.block_size,
            fmt_float(r.delta),
            fmt_float(r.rho),
            r.trials,
            r.successes,
            fmt_float(r.mean_rel_error),
            fmt_float(r.mean_iterations)
        ));
    }
    if a.fit {
        out.line("");
        out.line("B,delta,rho50,ci_lo,ci_hi");
        for f in fit_sweep(&rows)? {
            out.line(format!(
                "{},{},{},{},{}",
                f.block_size,
                fmt_float(f.delta),
                fmt_float(f.rho50),
                fmt_float(f.ci_lo),
                fmt_float(f.ci_hi)
            ));
        }
    }
    out.finish()
}

fn cmd_risk(a: RiskArgs) -> Result<()> {
    let gamma = if a.gamma == "auto" {
        default_gamma(a.epsilon)?
    } else {
        a.gamma
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("--gamma must be a number or 'auto', got '{}'", a.gamma)))?
    };
    let params: GStarParams = gstar_params(a.epsilon, gamma, a.block_size)?;
    let estimator = match a.estimator.as_str() {
        "mc" => RiskEstimator::MonteCarlo {
            samples: a.samples,
            seed: a.seed,
        },
        "quad" => RiskEstimator::Quadrature2D,
        other => return Err(Error::Config(format!("--estimator must be mc or quad, got '{other}'"))),
    };
    let risk = gstar_risk(&params, estimator)?;
    let asym = gstar_risk_asymptote(a.epsilon, gamma, ChiSquareDof::new(a.block_size)?)?;
    let mut out = Output::new(&a.out.out);
    out.line(format!("epsilon = {}", fmt_float(a.epsilon)));
    out.line(format!("gamma = {}", fmt_float(gamma)));
    out.line(format!("block_size = {}", a.block_size));
    out.line(format!("mu = {}", fmt_float(params.mu)));
    out.line(format!("a = {}", fmt_float(params.a)));
    out.line(format!("risk = {}", fmt_float(risk.value)));
    out.line(format!("risk_se = {}", fmt_float(risk.std_error)));
    out.line(format!("asymptote = {}", fmt_float(asym)));
    out.line(format!("ratio = {}", fmt_float(risk.value / asym)));
    out.finish()
}

fn cmd_bound(a: BoundArgs) -> Result<()> {
    let dof = ChiSquareDof::new(a.block_size)?;
    let bound = tail_bound(dof, a.a)?;
    let (p, se) = tail_prob_mc(dof, a.mu, a.a, a.samples, RngStream::new(a.seed, 0))?;
    let mut out = Output::new(&a.out.out);
    out.line(format!("block_size = {}", a.block_size));
    out.line(format!("mu = {}", fmt_float(a.mu)));
    out.line(format!("a = {}", fmt_float(a.a)));
    out.line(format!("bound = {}", fmt_float(bound)));
    out.line(format!("monte_carlo = {}", fmt_float(p)));
    out.line(format!("monte_carlo_se = {}", fmt_float(se)));
    out.line(format!("verdict = {}", if p <= bound { "HOLDS" } else { "VIOLATED" }));
    out.finish()
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pt(a) => cmd_pt(a),
        Command::Se(a) => cmd_se(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Risk(a) => cmd_risk(a),
        Command::Bound(a) => cmd_bound(a),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() { 2 } else { 1 }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        assert_eq!(fmt_float(1e-6), "1e-06");
        assert_eq!(fmt_float(0.25), "0.25");
        assert_eq!(fmt_float(2.0), "2");
        assert_eq!(fmt_float(-1500.0), "-1500");
        assert_eq!(fmt_float(1e17), "1e+17");
        assert_eq!(fmt_float(1.5e-5), "1.5e-05");
        assert_eq!(fmt_float(0.0001), "0.0001");
        assert_eq!(fmt_float(f64::NAN), "nan");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(0.1 + 0.2), "0.30000000000000004");
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 123456.789, 5e-324] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn config_lines_precede_command_line_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# pt settings\nmode = asymptotic\nblock_size = 2,4\nfit = true\n").unwrap();
        let args: Vec<OsString> = ["blocksparse", "pt", "--config", path.to_str().unwrap(), "--mode", "lemma"]
            .iter()
            .map(OsString::from)
            .collect();
        let expanded: Vec<String> = expand_config(args)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(
            expanded,
            ["blocksparse", "pt", "--mode=asymptotic", "--block-size=2", "--block-size=4", "--fit", "--mode", "lemma"]
        );
    }
}
