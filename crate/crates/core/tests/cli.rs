use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use spvote::cli::ballots::format_peaks;
use spvote::cli::run;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn spvote(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("spvote").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const LINEAR: &str = r#"{"rule": {"kind": "curve", "curve": {"kind": "linear"}}}"#;

fn evaluate_peaks(dir: &TempDir, config: &Path, peaks: &[f64]) -> f64 {
    let ballots = write(dir, "replay.csv", &format_peaks(peaks));
    let r = spvote(&["evaluate", "--config", s(config), "--ballots", s(&ballots), "--no-timings"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    r.json()["outcome"].as_f64().unwrap()
}

fn as_peaks(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn evaluate_linear_median_all_representations() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "linear.json", LINEAR);
    let ballots = write(&dir, "b.csv", "voter_id,ballot\na,0.2\nb,0.8\n");
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&ballots), "--representation", "all"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["outcome"], 0.5);
    assert_eq!(v["agreement"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 5);
    assert!(v["timings_ns"]["direct"].is_u64());
}

#[test]
fn evaluate_dictator_reports_the_ballot() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "d.json", r#"{"rule": {"kind": "dictator", "voter": "a"}}"#);
    let ballots = write(&dir, "b.csv", "voter_id,ballot\na,0.3\nb,0.9\n");
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&ballots)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["outcome"], 0.3);
    assert_eq!(v["provenance"]["kind"], "ballot");
    assert_eq!(v["provenance"]["voter"], "a");
}

#[test]
fn evaluate_empty_electorate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "empty_electorate_value = 0.4\n[rule]\nkind = \"curve\"\n[rule.curve]\nkind = \"linear\"\n",
    );
    let ballots = write(&dir, "b.csv", "voter_id,ballot\n");
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&ballots)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["outcome"], 0.4);
}

#[test]
fn evaluate_accepts_abstentions_and_weights() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "linear.json", LINEAR);
    let ballots = write(&dir, "b.csv", "voter_id,ballot\na,0.2\nb,abstain\nc,0.8\n");
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&ballots), "--representation", "all"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["outcome"], 0.5);
    assert_eq!(v["skipped"].as_array().unwrap().len(), 3);
    let weighted = write(&dir, "w.csv", "voter_id,ballot,weight\na,0,2\nb,1,1\n");
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&weighted), "--representation", "all"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!((r.json()["outcome"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "linear.json", LINEAR);
    let bad = write(&dir, "b.csv", "voter_id,ballot\na,0.2\nb,1.7\n");
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("row 3"), "{}", r.stderr);
    let dup = write(&dir, "dup.csv", "voter_id,ballot\na,0.2\na,0.3\n");
    assert_eq!(spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&dup)]).code, 2);
    let unknown = write(&dir, "u.json", r#"{"rule": {"kind": "constant", "value": 0.5}, "extra": true}"#);
    let ok = write(&dir, "ok.csv", "voter_id,ballot\na,0.2\n");
    assert_eq!(spvote(&["evaluate", "--config", s(&unknown), "--ballots", s(&ok)]).code, 2);
    assert_eq!(spvote(&["evaluate", "--config", s(&cfg)]).code, 2);
    assert_eq!(spvote(&["frobnicate"]).code, 2);
    let help = spvote(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("audit"));
}

#[test]
fn infeasible_representation_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "linear.json", LINEAR);
    let peaks: Vec<f64> = (0..21).map(|i| i as f64 / 20.0).collect();
    let ballots = write(&dir, "b.csv", &format_peaks(&peaks));
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&ballots), "--representation", "direct"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&ballots), "--representation", "all"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["outcome"], 0.5);
}

#[test]
fn non_monotone_table_exits_4() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "t.json",
        r#"{"rule": {"kind": "table", "n": 2, "values": {"BB": 0.2, "TB": 1, "BT": 0.5, "TT": 0}}}"#,
    );
    let ballots = write(&dir, "b.csv", "voter_id,ballot\na,0.9\nb,0.1\n");
    let r = spvote(&["evaluate", "--config", s(&cfg), "--ballots", s(&ballots), "--representation", "all"]);
    assert_eq!(r.code, 4, "{} {}", r.stdout, r.stderr);
}

#[test]
fn audit_linear_median_fixed() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "linear.json", LINEAR);
    let r = spvote(&["audit", "--config", s(&cfg), "--grid-steps", "10", "--n", "3", "--axioms", "all"]);
    assert_eq!(r.code, 5, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["all_passed"], false);
    let status = |name: &str| {
        v["results"]
            .as_array()
            .unwrap()
            .iter()
            .find(|x| x["axiom"] == name)
            .unwrap_or_else(|| panic!("{name} missing"))
            .clone()
    };
    for name in ["strategy_proofness", "weak_responsiveness", "lipschitz", "sovereignty", "pareto", "anonymity"] {
        assert_eq!(status(name)["status"], "PASS_EXHAUSTIVE", "{name}");
    }
    let strict = status("strict_responsiveness");
    assert_eq!(strict["status"], "FAIL");
    let w = &strict["witness"];
    assert_eq!(evaluate_peaks(&dir, &cfg, &as_peaks(&w["lower"])), w["lower_outcome"].as_f64().unwrap());
    assert_eq!(evaluate_peaks(&dir, &cfg, &as_peaks(&w["upper"])), w["upper_outcome"].as_f64().unwrap());

    // the ordinality witness replays through evaluate as well
    let ord = status("ordinality");
    assert_eq!(ord["status"], "FAIL");
    let w = &ord["witness"];
    let knots: Vec<(f64, f64)> = w["knots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|k| (k[0].as_f64().unwrap(), k[1].as_f64().unwrap()))
        .collect();
    let h = |x: f64| {
        let j = knots.iter().position(|&(a, _)| a >= x).unwrap().max(1);
        let ((x0, y0), (x1, y1)) = (knots[j - 1], knots[j]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    };
    let profile = as_peaks(&w["profile"]);
    let mapped: Vec<f64> = profile.iter().map(|&x| h(x)).collect();
    let direct = evaluate_peaks(&dir, &cfg, &profile);
    assert!((h(direct) - w["mapped_outcome"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(evaluate_peaks(&dir, &cfg, &mapped), w["outcome_of_mapped"].as_f64().unwrap());
}

const MEAN_CMD: &str = r#"awk -F, 'NR > 1 { s += $2; n++ } END { printf "%.17g\n", s / n }'"#;

#[test]
fn audit_black_box_mean() {
    let r = spvote(&[
        "audit",
        "--black-box",
        MEAN_CMD,
        "--grid-steps",
        "10",
        "--n",
        "2",
        "--axioms",
        "sp",
    ]);
    assert_eq!(r.code, 5, "{}", r.stderr);
    let w = &r.json()["results"][0]["witness"];
    assert_eq!(w["kind"], "manipulation");
    assert_eq!(as_peaks(&w["profile"]), vec![0.5, 1.0]);
    assert_eq!(w["voter"], 0);
    assert_eq!(w["deviation"], 0.0);
    assert_eq!(w["gain"], 0.25);
    // replay: feed the witness ballots to the same command
    let replay = |peaks: &[f64]| -> f64 {
        let mut child = Command::new("sh")
            .args(["-c", MEAN_CMD])
            .stdin(std::process::Stdio::piped())
            .stdout(std::process::Stdio::piped())
            .spawn()
            .unwrap();
        use std::io::Write;
        child.stdin.take().unwrap().write_all(format_peaks(peaks).as_bytes()).unwrap();
        String::from_utf8(child.wait_with_output().unwrap().stdout).unwrap().trim().parse().unwrap()
    };
    assert_eq!(replay(&[0.5, 1.0]), w["truthful_outcome"].as_f64().unwrap());
    assert_eq!(replay(&[0.0, 1.0]), w["deviated_outcome"].as_f64().unwrap());
}

#[test]
fn audit_black_box_failures_exit_1() {
    let r = spvote(&["audit", "--black-box", "echo nonsense", "--n", "1", "--grid-steps", "2", "--axioms", "sp"]);
    assert_eq!(r.code, 1, "{}", r.stderr);
}

#[test]
fn audit_variable_linear_median() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "linear.json", LINEAR);
    let r = spvote(&[
        "audit",
        "--config",
        s(&cfg),
        "--variable",
        "--grid-steps",
        "5",
        "--sizes",
        "1,2,3",
        "--axioms",
        "proportionality,participation,consistency,homogeneity,sovereignty",
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.json()["all_passed"], true);
}

#[test]
fn audit_too_large_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "linear.json", LINEAR);
    let r = spvote(&["audit", "--config", s(&cfg), "--grid-steps", "10", "--n", "8"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let r = spvote(&[
        "audit", "--config", s(&cfg), "--grid-steps", "10", "--n", "8", "--sampled", "--samples", "200", "--axioms", "sp",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["results"][0]["status"], "PASS_SAMPLED");
}

#[test]
fn welfare_optimal_curve_is_the_identity() {
    let r = spvote(&["welfare", "--optimal-curve", "--prior", "uniform", "--q", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    let knots = v["config"]["rule"]["curve"]["knots"].as_array().unwrap();
    assert_eq!(v["config"]["rule"]["curve"]["kind"], "piecewise");
    assert_eq!(knots.len(), 1025);
    for k in knots {
        let (t, x) = (k[0].as_f64().unwrap(), k[1].as_f64().unwrap());
        assert!((t - x).abs() <= 1e-6, "{t} -> {x}");
    }
}

#[test]
fn welfare_minimax_two_voters() {
    let r = spvote(&["welfare", "--minimax", "--q", "2", "--weights", "2,1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    let got = as_peaks(&v["by_weight_rank"]);
    for (g, want) in got.iter().zip([0.0, 2.0 / 3.0, 1.0]) {
        assert!((g - want).abs() < 1e-12, "{got:?}");
    }
    assert!((v["phantoms"]["BT"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn welfare_comparison_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let lin = write(&dir, "linear.json", LINEAR);
    let med = write(&dir, "median.json", r#"{"rule": {"kind": "order_statistic", "k": 3}}"#);
    let max = write(&dir, "max.json", r#"{"rule": {"kind": "order_statistic", "k": 1}}"#);
    let args = [
        "welfare", "--config", s(&lin), "--config", s(&med), "--config", s(&max), "--q", "2", "--n", "5", "--samples",
        "100000", "--seed", "42",
    ];
    let a = spvote(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, spvote(&args).stdout);
    let rows = a.json()["rows"].as_array().unwrap().clone();
    let loss = |i: usize| rows[i]["mean_loss"].as_f64().unwrap();
    assert_eq!(rows[0]["rule"], "linear");
    assert!(loss(0) < loss(1) && loss(0) < loss(2), "{rows:?}");
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let c = spvote(&csv_args);
    assert!(c.stdout.starts_with("rule,mean_loss,std_error,samples,seed,q\nlinear,"));
}

#[test]
fn welfare_non_increasing_g_exits_6() {
    let dir = TempDir::new().unwrap();
    let density = write(&dir, "spike.csv", "x,density\n0,1\n0.3,1\n0.31,200\n0.32,1\n1,1\n");
    let r = spvote(&["welfare", "--optimal-curve", "--prior", "custom", "--density", s(&density), "--q", "2"]);
    assert_eq!(r.code, 6, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["error"], "not_strictly_increasing");
    let w = &v["witness"];
    assert!(w["x_lo"].as_f64().unwrap() < w["x_hi"].as_f64().unwrap());
    assert!(w["g_lo"].as_f64().unwrap() >= w["g_hi"].as_f64().unwrap());
}

#[test]
fn bench_csv() {
    let r = spvote(&["bench", "--sizes", "4,18", "--representations", "curve,direct", "--repeat", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "representation,n,median_ns");
    assert!(lines.iter().any(|l| l.starts_with("curve,18,")));
    assert!(lines.iter().any(|l| l.starts_with("direct,4,")));
    assert!(!lines.iter().any(|l| l.starts_with("direct,18,")));
}

#[test]
fn binary_reports_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "linear.json", LINEAR);
    let ballots = write(&dir, "b.csv", "voter_id,ballot\na,0.2\nb,0.8\n");
    let bin = env!("CARGO_BIN_EXE_spvote");
    let out = Command::new(bin)
        .args(["evaluate", "--config", s(&cfg), "--ballots", s(&ballots), "--no-timings"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let first = out.stdout.clone();
    let again = Command::new(bin)
        .args(["evaluate", "--config", s(&cfg), "--ballots", s(&ballots), "--no-timings"])
        .output()
        .unwrap();
    assert_eq!(first, again.stdout);
    let out = Command::new(bin).args(["audit", "--config", s(&cfg), "--n", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(5));
}
