use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_weibull-bias"))
}

fn data(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "data", name].iter().collect()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Shape and scale from the table row for `method`.
fn row(text: &str, method: &str) -> (f64, f64) {
    let line = text
        .lines()
        .find(|l| l.split_whitespace().next() == Some(method))
        .unwrap_or_else(|| panic!("no {method} row in\n{text}"));
    let cols: Vec<&str> = line.split_whitespace().collect();
    (cols[1].parse().unwrap(), cols[2].parse().unwrap())
}

#[test]
fn fit_voltage_fixtures() {
    for (file, k_ml, l_ml, k_mmle) in [
        ("type1_voltages.csv", 9.38, 47.78, 8.74),
        ("type2_voltages.csv", 9.14, 59.12, 8.51),
    ] {
        let out = run(&["fit", data(file).to_str().unwrap()]);
        assert!(out.status.success());
        let text = stdout(&out);
        let (k, l) = row(&text, "ML");
        assert!((k - k_ml).abs() <= 0.01 && (l - l_ml).abs() <= 0.01, "{text}");
        let (k, l) = row(&text, "MMLE");
        assert!((k - k_mmle).abs() <= 0.01, "{text}");
        assert!((l - l_ml).abs() < 0.2, "{text}");
    }
}

#[test]
fn fit_recidivism_fixture_both_plugins() {
    for plugin in ["model", "d_over_n"] {
        let out = run(&[
            "fit",
            data("recidivism_subsample.csv").to_str().unwrap(),
            "--p-plugin",
            plugin,
        ]);
        assert!(out.status.success());
        let text = stdout(&out);
        assert!((row(&text, "ML").0 - 1.72).abs() <= 0.01);
        assert!((row(&text, "MMLE").0 - 1.39).abs() <= 0.03, "{text}");
        assert!(!text.contains("ROSS"));
    }
}

#[test]
fn fit_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fit.csv");
    let out = run(&[
        "fit",
        data("type1_voltages.csv").to_str().unwrap(),
        "--methods",
        "ml,mmle",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,k,lambda,p_hat,converged,iterations");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("ML,9.38"));
    assert!(lines[2].starts_with("MMLE,8.73"));
}

#[test]
fn fit_error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(run(&["fit", empty.to_str().unwrap()]).status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1.0\n2.5\nabc\n").unwrap();
    let out = run(&["fit", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["fit", missing.to_str().unwrap()]).status.code(), Some(2));

    // ROSS is complete-data only
    let out = run(&[
        "fit",
        data("recidivism_subsample.csv").to_str().unwrap(),
        "--methods",
        "ross",
    ]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(run(&["fit"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["kl", "--k0", "1"]).status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |path: &PathBuf, threads: &str| {
        vec![
            "simulate".to_string(),
            "--grid".into(),
            "paper-complete".into(),
            "--replicates".into(),
            "200".into(),
            "--seed".into(),
            "42".into(),
            "--threads".into(),
            threads.into(),
            "--output".into(),
            path.to_str().unwrap().into(),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let out = bin().args(args(&a, "1")).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("discard_policy=resample"));
    assert!(bin().args(args(&b, "3")).output().unwrap().status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,p,k_star,method,bias,mse,mean_kl,used_replicates,discarded,failed_fits"
    );
    // 3 n × 4 k* × 3 methods
    assert_eq!(lines.len(), 1 + 36);
}

#[test]
fn simulate_custom_grid() {
    let out = run(&[
        "simulate", "--grid", "custom", "--n", "15", "--k-star", "2", "--p", "0.5,1",
        "--methods", "ml,mmle", "--replicates", "100", "--seed", "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text.contains("15,0.5,2,MMLE,"));

    let out = run(&["simulate", "--grid", "custom", "--n", "15"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["simulate", "--replicates", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

fn curve(extra: &[&str]) -> Vec<Vec<f64>> {
    let mut args = vec!["bias-curve", "--k", "2", "--n", "20"];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,f,bias_k,f1,f2"));
    lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn bias_curve_shape() {
    let rows = curve(&["--p-min", "0.05", "--p-max", "0.999", "--steps", "120"]);
    assert_eq!(rows.len(), 120);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 0.999);
    assert!((last[1] - 1.38).abs() < 0.05, "{last:?}");
    assert!((last[2] - 2.0 * last[1] / 20.0).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));

    // The published form decreases throughout; the fixed-c form dips below
    // its p → 1 limit before rising back to it.
    let published = curve(&["--steps", "120", "--bias-form", "published"]);
    assert!(published.windows(2).all(|w| w[1][1] < w[0][1]));
    assert!(rows.iter().any(|r| r[1] < 1.3));
}

#[test]
fn bias_curve_rejects_bad_range() {
    let out = run(&["bias-curve", "--k", "1", "--n", "10", "--p-min", "0.5", "--p-max", "0.2"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["bias-curve", "--k", "1", "--n", "10", "--p-max", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

fn kl(args: &[&str]) -> f64 {
    let mut all = vec!["kl"];
    all.extend_from_slice(args);
    let out = run(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out).trim().parse().unwrap()
}

#[test]
fn kl_values() {
    let same = ["--k0", "2", "--lambda0", "3", "--k1", "2", "--lambda1", "3"];
    assert_eq!(kl(&same), 0.0);
    let v = kl(&["--k0", "1", "--lambda0", "2", "--k1", "1", "--lambda1", "1"]);
    assert!((v - (1.0 - 2f64.ln())).abs() < 1e-14);
    let base = ["--k0", "2", "--lambda0", "1", "--k1", "1.5", "--lambda1", "1.2"];
    let mut far = base.to_vec();
    far.extend_from_slice(&["--censor-time", "1e6"]);
    assert!((kl(&base) - kl(&far)).abs() < 1e-6);
    let out = run(&["kl", "--k0=-1", "--lambda0", "1", "--k1", "1", "--lambda1", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
