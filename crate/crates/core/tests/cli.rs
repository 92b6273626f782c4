use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blocksparse"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no '{key}' in {text}"))
        .to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn pt_asymptotic_row() {
    let text = stdout(&["pt", "--mode", "asymptotic", "--block-size", "2", "--delta-list", "1e-6"]);
    let rows = csv_rows(&text);
    assert_eq!(text.lines().next().unwrap(), "B,delta,rho,tau_star,mode");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "2");
    assert_eq!(rows[0][1], "1e-06");
    assert!((rows[0][2].parse::<f64>().unwrap() - 0.072382).abs() < 1e-6);
    assert_eq!(rows[0][3], "");
    assert_eq!(rows[0][4], "asymptotic");
}

#[test]
fn pt_routes_agree() {
    let grid = ["--delta-grid", "0.1:0.9:0.2", "--block-size", "1", "--block-size", "4"];
    let lemma = csv_rows(&stdout(&[&["pt", "--mode", "lemma"][..], &grid].concat()));
    let fixed = csv_rows(&stdout(&[&["pt", "--mode", "fixedpoint"][..], &grid].concat()));
    assert_eq!(lemma.len(), 10);
    for (a, b) in lemma.iter().zip(&fixed) {
        assert_eq!(a[..2], b[..2]);
        let (ra, rb): (f64, f64) = (a[2].parse().unwrap(), b[2].parse().unwrap());
        assert!((ra - rb).abs() <= 1e-6);
    }
}

#[test]
fn se_auto_tau_is_transition_threshold() {
    let pt = csv_rows(&stdout(&["pt", "--block-size", "2", "--delta-list", "0.3"]));
    let tau = pt[0][3].clone();
    let common = ["se", "--delta", "0.3", "--rho", "0.4", "--block-size", "2", "--estimator", "semi"];
    let auto = stdout(&[&common[..], &["--tau", "auto"]].concat());
    let explicit = stdout(&[&common[..], &["--tau", &tau]].concat());
    assert_eq!(auto, explicit);
    let lines: Vec<&str> = auto.lines().collect();
    assert_eq!(lines[0], "iter,mse");
    assert_eq!(lines[lines.len() - 2], "converged,fixed_point");
}

#[test]
fn solve_below_transition_succeeds_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let text = stdout(&[
        "solve", "--delta", "0.5", "--rho", "0.2", "--signal-dim", "600", "--block-size", "2", "--seed", "1",
        "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(field(&text, "success"), "true");
    let iters: usize = field(&text, "iterations").parse().unwrap();
    let trace = fs::read_to_string(trace).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "iter,sigma_hat,rel_error");
    assert_eq!(trace.lines().count(), iters + 1);
}

#[test]
fn sweep_writes_file_with_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--block-sizes", "2", "--delta-list", "0.5", "--rho-multipliers", "0.5:1.5:0.25", "--trials", "4",
        "--signal-dim", "200", "--seed", "3", "--out", path.to_str().unwrap(), "--fit",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(path).unwrap();
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].starts_with("B,delta,rho,trials,successes,mean_rel_error,mean_iters\n"));
    assert_eq!(blocks[0].lines().count(), 6);
    assert!(blocks[1].starts_with("B,delta,rho50,ci_lo,ci_hi\n"));
}

#[test]
fn risk_reports_asymptote() {
    let text = stdout(&["risk", "--epsilon", "1e-3", "--gamma", "0.2", "--block-size", "2", "--samples", "20000"]);
    let asym: f64 = field(&text, "asymptote").parse().unwrap();
    assert!((asym - 5.5250e-3).abs() < 5e-7);
    let ratio: f64 = field(&text, "ratio").parse().unwrap();
    let risk: f64 = field(&text, "risk").parse().unwrap();
    assert!((ratio - risk / asym).abs() < 1e-12);
}

#[test]
fn bound_reports_verdict() {
    let text = stdout(&["bound", "--block-size", "2", "--mu", "10", "--a", "4", "--samples", "20000"]);
    let bound: f64 = field(&text, "bound").parse().unwrap();
    assert!((bound - (2.0 * (-8.0f64).exp() + 8.0 * (-7.0f64).exp())).abs() < 1e-12);
    assert_eq!(field(&text, "verdict"), "HOLDS");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["pt", "--bogus"][..],
        &["pt", "--block-size", "0"],
        &["pt", "--delta-grid", "0.5:0.1"],
        &["se", "--delta", "0.5"],
        &["se", "--delta", "0.5", "--rho", "0.3", "--rule", "lasso"],
        &["solve", "--delta", "0.5", "--rho", "0.3", "--rule", "james-stein", "--block-size", "2"],
        &["risk", "--epsilon", "0.7"],
        &["pt", "--config", "/nonexistent/file.conf"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep"));
}

#[test]
fn config_file_below_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("pt.conf");
    fs::write(&conf, "# curves\nmode = asymptotic\nblock_size = 2\ndelta_list = 0.01,0.001\n").unwrap();
    let c = conf.to_str().unwrap();

    let from_file = csv_rows(&stdout(&["pt", "--config", c]));
    assert_eq!(from_file.len(), 2);
    assert!(from_file.iter().all(|r| r[0] == "2" && r[4] == "asymptotic"));

    let overridden = csv_rows(&stdout(&["pt", "--config", c, "--mode", "lemma", "--delta-list", "0.2"]));
    assert_eq!(overridden.len(), 1);
    assert_eq!(overridden[0][1], "0.2");
    assert_eq!(overridden[0][4], "lemma");
}

#[test]
fn seeded_runs_repeat_and_seeds_matter() {
    let args = ["solve", "--delta", "0.4", "--rho", "0.5", "--signal-dim", "300", "--seed", "8"];
    assert_eq!(stdout(&args), stdout(&args));
    let other = ["solve", "--delta", "0.4", "--rho", "0.5", "--signal-dim", "300", "--seed", "9"];
    assert_ne!(field(&stdout(&args), "rel_error"), field(&stdout(&other), "rel_error"));
}
