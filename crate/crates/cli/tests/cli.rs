use std::path::Path;
use std::process::{Command, Output};

use pdas_cli::gen::Truth;
use pdas_cli::oracle::OracleReport;
use pdas_cli::report::FitReport;

const PLANTED_BETA: &str = "3,1.5,0,0,-2,0,0,0,-1,0,0,0,0,0,0,0,0,0,0,0";

fn pdas(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdas")).args(args).current_dir(dir).output().unwrap()
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = pdas(args, dir);
    assert!(out.status.success(), "pdas {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn planted(dir: &Path) {
    ok(
        &["gen", "--family", "gaussian", "-n", "200", "-p", "20", "--rho", "0.2", "--beta", PLANTED_BETA, "--seed", "1", "--output", "d.csv"],
        dir,
    );
}

fn fit_json(args: &[&str], dir: &Path) -> FitReport {
    serde_json::from_slice(&ok(args, dir).stdout).unwrap()
}

#[test]
fn fixed_size_fit_recovers_planted_support() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path());
    let r = fit_json(&["fit", "--input", "d.csv", "--family", "gaussian", "--method", "one", "-k", "4"], dir.path());
    assert_eq!(r.active, ["X1", "X2", "X5", "X9"]);
    let truth = [3.0, 1.5, -2.0, -1.0];
    for (c, t) in r.coefficients.iter().zip(truth) {
        assert!((c.value - t).abs() < 0.3, "{}: {} vs {t}", c.name, c.value);
    }
    assert!(r.converged);
}

#[test]
fn sequential_path_starts_at_the_null_model() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path());
    let r = fit_json(
        &["fit", "--input", "d.csv", "--family", "gaussian", "--k-max", "1", "--path-output", "path.csv"],
        dir.path(),
    );
    let path = r.path.unwrap();
    assert_eq!(path.iter().map(|e| e.k).collect::<Vec<_>>(), [0, 1]);
    assert!(path[1].loss < path[0].loss);
    let csv = std::fs::read_to_string(dir.path().join("path.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("k,loss,loglik,deviance,aic,bic,ebic,iterations,converged,active\n"));
}

#[test]
fn sequential_fit_picks_the_planted_size() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path());
    let r = fit_json(&["fit", "--input", "d.csv", "--family", "gaussian", "--criterion", "ebic"], dir.path());
    assert_eq!(r.active, ["X1", "X2", "X5", "X9"]);
    assert_eq!(r.pdas_runs, r.path.as_ref().unwrap().len() - 1);
}

#[test]
fn golden_section_logs_each_iteration_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path());
    let out = ok(&["fit", "--input", "d.csv", "--family", "gaussian", "--method", "gsection", "--k-max", "12"], dir.path());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let report: FitReport = serde_json::from_slice(&out.stdout).unwrap();
    let trace = report.trace.unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), trace.steps.len());
    for (i, (line, step)) in lines.iter().zip(&trace.steps).enumerate() {
        let expected = format!("{}-th iteration s.left:{} s.split:{} s.right:{}", i + 1, step.k_left, step.k_split, step.k_right);
        assert_eq!(*line, expected);
    }
}

#[test]
fn json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path());
    let out = ok(&["fit", "--input", "d.csv", "--family", "gaussian", "--dense"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let r: FitReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.coefficients.len(), 20);
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
}

#[test]
fn csv_report_leads_with_the_intercept() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path());
    let out = ok(&["fit", "--input", "d.csv", "--family", "gaussian", "--method", "one", "-k", "2", "--format", "csv"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "column,name,value");
    assert!(lines[1].starts_with("0,(Intercept),"));
    assert_eq!(lines.len(), 4);
}

#[test]
fn errors_are_one_line_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path());
    std::fs::write(dir.path().join("bad.csv"), "X1,time,status\n1.0,2.0,3\n0.5,1.0,1\n").unwrap();
    let cases: [&[&str]; 4] = [
        &["fit", "--input", "missing.csv", "--family", "gaussian"],
        &["fit", "--input", "d.csv", "--family", "gaussian", "--method", "one"],
        &["fit", "--input", "bad.csv", "--family", "cox"],
        &["oracle", "--input", "d.csv", "--family", "gaussian", "-k", "3", "--p-cap", "10"],
    ];
    for args in cases {
        let out = pdas(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert_eq!(stderr.lines().count(), 1, "{args:?}: {stderr}");
        assert!(stderr.starts_with("error: "), "{args:?}: {stderr}");
    }
}

#[test]
fn gen_writes_truth_and_supports_q_zero() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--family", "binomial", "-n", "50", "-p", "6", "--seed", "2", "--output", "null.csv"], dir.path());
    let truth: Truth = serde_json::from_slice(&std::fs::read(dir.path().join("null.json")).unwrap()).unwrap();
    assert!(truth.support.is_empty());
    assert!(truth.beta.iter().all(|b| *b == 0.0));
    let data = std::fs::read_to_string(dir.path().join("null.csv")).unwrap();
    assert_eq!(data.lines().next().unwrap(), "X1,X2,X3,X4,X5,X6,y");
    assert_eq!(data.lines().count(), 51);

    ok(&["gen", "--family", "cox", "-n", "30", "-p", "4", "-q", "2", "--output", "s.csv", "--truth", "t.json"], dir.path());
    let truth: Truth = serde_json::from_slice(&std::fs::read(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(truth.support.len(), 2);
    assert_eq!(truth.support_names.len(), 2);
    let header = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(header.starts_with("X1,X2,X3,X4,time,status\n"));
}

#[test]
fn headerless_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["gen", "--family", "gaussian", "-n", "100", "-p", "8", "--rho", "0.2", "--beta", "2,0,0,-1.5,0,0,0,0", "--no-header", "--output", "raw.csv"],
        dir.path(),
    );
    let first = std::fs::read_to_string(dir.path().join("raw.csv")).unwrap();
    assert_eq!(first.lines().count(), 100);
    let r = fit_json(&["fit", "--input", "raw.csv", "--family", "gaussian", "--no-header", "--method", "one", "-k", "2"], dir.path());
    assert_eq!(r.coefficients.iter().map(|c| c.column).collect::<Vec<_>>(), [1, 4]);
}

#[test]
fn single_replication_bench_reports_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["bench", "--family", "gaussian", "-n", "100", "-p", "10", "-q", "2", "-r", "1", "--methods", "one,spdas"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,MS,Time,MSE,TP,FP");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        for cell in line.split(',').skip(1) {
            assert!(cell.ends_with("(0.00)") || cell.ends_with("(0.0000)"), "{line}");
        }
    }
}

#[test]
fn oracle_loss_bounds_every_method() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--family", "gaussian", "-n", "120", "-p", "12", "-q", "3", "--seed", "4", "--output", "o.csv"], dir.path());
    for k in [1, 3, 5] {
        let ks = k.to_string();
        let oracle: OracleReport =
            serde_json::from_slice(&ok(&["oracle", "--input", "o.csv", "--family", "gaussian", "-k", &ks], dir.path()).stdout).unwrap();
        let fit = fit_json(&["fit", "--input", "o.csv", "--family", "gaussian", "--method", "one", "-k", &ks], dir.path());
        assert!(oracle.loss <= fit.loss * (1.0 + 1e-12), "k = {k}");
        let n_choose_k = (0..k).fold(1usize, |acc, i| acc * (12 - i) / (i + 1));
        assert_eq!(oracle.subsets, n_choose_k);
    }

    let out = ok(
        &["bench", "--family", "gaussian", "-n", "120", "-p", "12", "-q", "3", "-r", "3", "--methods", "spdas,gpdas,oracle", "--omit-time", "--replications", "reps.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let reps = std::fs::read_to_string(dir.path().join("reps.csv")).unwrap();
    let mut lines = reps.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let loss = header.iter().position(|h| *h == "loss").unwrap();
    let oracle = header.iter().position(|h| *h == "oracle_loss").unwrap();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let (l, o): (f64, f64) = (cells[loss].parse().unwrap(), cells[oracle].parse().unwrap());
        assert!(o <= l * (1.0 + 1e-12), "{line}");
    }
}

#[test]
fn fits_every_family_from_generated_files() {
    let dir = tempfile::tempdir().unwrap();
    for family in ["binomial", "cox"] {
        let file = format!("{family}.csv");
        ok(&["gen", "--family", family, "-n", "300", "-p", "15", "-q", "2", "--rho", "0.2", "--seed", "6", "--output", &file], dir.path());
        let truth: Truth =
            serde_json::from_slice(&std::fs::read(dir.path().join(format!("{family}.json"))).unwrap()).unwrap();
        let r = fit_json(&["fit", "--input", &file, "--family", family, "--criterion", "ebic"], dir.path());
        assert_eq!(r.active, truth.support_names, "{family}");
    }
}
