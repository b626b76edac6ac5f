use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn frares(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frares"))
        .args(args)
        .env_remove("FRARES_TOL")
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    fs::read_to_string(path).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Parses a CSV body into a header and rows of optional numbers.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse().ok()).collect())
        .collect();
    (header, rows)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let (header, rows) = table(csv);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().filter_map(|r| r[i]).collect()
}

#[test]
fn kernels_order_one_is_constant() {
    let o = frares(&["kernels", "--alpha", "1", "--tau", "0.5", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "k"), vec![1.0; 5]);
}

#[test]
fn kernels_match_golden() {
    let o = frares(&["kernels", "--alpha", "2", "--tau", "1", "--n", "3"]);
    assert_eq!(stdout(&o), golden("kernels_alpha2_tau1.csv"));
}

#[test]
fn coeffs_match_golden() {
    let o = frares(&["coeffs", "--alpha", "1.5", "--beta", "1", "--tau", "0.1", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("coeffs_1.5_1_tau0.1.csv"));
}

#[test]
fn missing_alpha_is_usage_error() {
    let o = frares(&["kernels", "--tau", "1", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--alpha"));
    assert!(o.stdout.is_empty());
}

#[test]
fn invalid_values_are_usage_errors() {
    for args in [
        &["kernels", "--alpha", "-1", "--tau", "1", "--n", "3"][..],
        &["kernels", "--alpha", "1", "--tau", "0", "--n", "3"],
        &["resolvent", "--op", "bogus:1", "--alpha", "1", "--beta", "1", "--tau", "0.1", "--n", "3"],
        &["resolvent", "--op", "laplacian:0:0.1", "--alpha", "1", "--beta", "1", "--tau", "0.1", "--n", "3"],
        &["compare-ml", "--alpha", "1.1", "--beta", "0.1", "--plot", "x.gp"],
    ] {
        let o = frares(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn unwritable_output_is_io_error() {
    let o = frares(&["kernels", "--alpha", "1", "--tau", "1", "--n", "2", "-o", "/nonexistent/dir/k.csv"]);
    assert_eq!(o.status.code(), Some(3));
    let o = frares(&["solve", "--problem", "/nonexistent/problem.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn resolvent_all_methods_backward_euler() {
    let o = frares(&[
        "resolvent", "--op", "scalar:-1", "--alpha", "1", "--beta", "1", "--tau", "0.1", "--n", "20", "--method", "all",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    for (n, s) in column(&csv, "s").iter().enumerate() {
        let expect = 1.1_f64.powi(-(n as i32 + 1));
        assert!((s - expect).abs() <= 1e-10 * expect, "n={n}: {s} vs {expect}");
    }
    assert!(column(&csv, "diff_explicit_recursive").iter().all(|d| *d <= 1e-10));
    assert!(column(&csv, "residual").iter().all(|r| *r <= 1e-10));
}

#[test]
fn resolvent_all_methods_with_series() {
    let o = frares(&[
        "resolvent", "--op", "scalar:0.3", "--alpha", "0.7", "--beta", "0.7", "--tau", "0.2", "--n", "30", "--method", "all",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    for name in ["diff_explicit_recursive", "diff_series_recursive"] {
        assert!(column(&csv, name).iter().all(|d| *d <= 1e-10), "{name}");
    }
}

#[test]
fn resolvent_of_zero_is_kernel() {
    let args = ["--alpha", "1.5", "--beta", "0.7", "--tau", "0.2", "--n", "12"];
    let mut r = vec!["resolvent", "--op", "scalar:0"];
    r.extend(args);
    let s = column(&stdout(&frares(&r)), "s");
    let k = column(&stdout(&frares(&["kernels", "--alpha", "0.7", "--tau", "0.2", "--n", "12"])), "k");
    assert_eq!(s.len(), k.len());
    for (a, b) in s.iter().zip(&k) {
        assert!((a - b).abs() <= 1e-14 * b.abs());
    }
}

#[test]
fn resolvent_laplacian_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lap.csv");
    let o = frares(&[
        "resolvent", "--op", "laplacian:16:0.0625", "--alpha", "1.5", "--beta", "1", "--tau", "0.1", "--n", "20",
        "-o", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let (header, rows) = table(&csv);
    assert_eq!(rows.len(), 21);
    assert!(header.contains(&"s_15_15".to_string()));
    assert!(column(&csv, "residual").iter().all(|r| *r <= 1e-10));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("lap.csv.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "resolvent");
    assert_eq!(meta["N"], 20);
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn verify_suites_pass() {
    for suite in ["functional", "ztransform", "subordination", "resolvent", "all"] {
        let o = frares(&["verify", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}", stdout(&o));
        let report = stdout(&o);
        assert!(report.contains("PASS") && !report.contains("FAIL"), "{report}");
        assert!(report.contains("tolerance"));
    }
    let o = frares(&["verify", "--suite", "functional", "--op", "laplacian:8:0.125"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn tolerance_from_environment_and_flag() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_frares"));
        c.args(["verify", "--suite", "functional"]).args(extra).env_remove("FRARES_TOL");
        if let Some(v) = env {
            c.env("FRARES_TOL", v);
        }
        c.output().unwrap()
    };
    let strict = run(Some("1e-30"), &[]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(stdout(&strict).contains("FAIL"));
    assert_eq!(run(Some("1e-30"), &["--tol", "1e-6"]).status.code(), Some(0));
    assert_eq!(run(None, &["--tol", "1e-30"]).status.code(), Some(1));
    assert_eq!(run(Some("abc"), &[]).status.code(), Some(2));
}

#[test]
fn solve_zero_problem_stays_zero() {
    let o = frares(&["solve", "--problem", &data("zero.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let (header, rows) = table(&csv);
    for (i, h) in header.iter().enumerate().filter(|(_, h)| h.starts_with("utilde_")) {
        assert!(rows.iter().all(|r| r[i] == Some(0.0)), "{h}");
    }
}

#[test]
fn solve_data_problems() {
    for name in ["scalar.json", "laplacian.json", "coupled.json"] {
        let o = frares(&["solve", "--problem", &data(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains("PASS vop vs direct"));
        for (method, limit) in [("direct", 1e-11), ("vop", 1e-10)] {
            let o = frares(&["solve", "--problem", &data(name), "--method", method]);
            let residuals = column(&stdout(&o), "residual");
            assert!(!residuals.is_empty());
            assert!(residuals.iter().all(|r| *r <= limit), "{name} {method}");
        }
    }
}

#[test]
fn solve_single_method() {
    for method in ["vop", "direct"] {
        let o = frares(&["solve", "--problem", &data("scalar.json"), "--method", method, "--format", "json"]);
        assert_eq!(o.status.code(), Some(0), "{method}");
        let meta: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(meta["method"], method);
    }
}

#[test]
fn solve_rejects_bad_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    fs::write(&p, r#"{"alpha": 0.5, "tau": 0.1, "N": 5, "operator": "scalar:-1", "x0": [1.0]}"#).unwrap();
    assert_eq!(frares(&["solve", "--problem", p.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&p, r#"{"alpha": 1.5, "tau": 0.1, "N": 5, "operator": "scalar:-1", "x0": [1.0], "extra": 1}"#).unwrap();
    assert_eq!(frares(&["solve", "--problem", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn compare_ml_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ml.csv");
    let plot = dir.path().join("ml.gp");
    let o = frares(&[
        "compare-ml", "--alpha", "1.1", "--beta", "0.1", "--n", "100",
        "-o", out.to_str().unwrap(), "--plot", plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let (header, rows) = table(&csv);
    assert_eq!(header, ["t", "discrete", "exact", "abs_diff"]);
    assert_eq!(rows.len(), 101);
    let max = column(&csv, "abs_diff").into_iter().skip(1).fold(0.0, f64::max);
    assert!((max - 0.3632168142438159).abs() < 1e-9);
    let script = fs::read_to_string(&plot).unwrap();
    assert!(script.contains("ml.csv"));
}

#[test]
fn compare_ml_refines_on_shared_grid() {
    for (alpha, beta) in [("1.1", "0.1"), ("0.1", "0.9")] {
        let coarse = stdout(&frares(&["compare-ml", "--alpha", alpha, "--beta", beta, "--n", "100"]));
        let fine = stdout(&frares(&["compare-ml", "--alpha", alpha, "--beta", beta, "--n", "200"]));
        let e100 = column(&coarse, "abs_diff").into_iter().skip(1).fold(0.0, f64::max);
        let e200 = column(&fine, "abs_diff").into_iter().skip(2).step_by(2).fold(0.0, f64::max);
        assert!(e200 <= e100, "({alpha}, {beta}): {e200} > {e100}");
    }
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["resolvent", "--op", "laplacian:8:0.125", "--alpha", "1.5", "--beta", "1", "--tau", "0.1", "--n", "15", "--method", "all"],
        &["coeffs", "--alpha", "1.1", "--beta", "0.1", "--tau", "0.1", "--n", "40"],
        &["compare-ml", "--alpha", "0.1", "--beta", "0.9"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let files: Vec<Vec<u8>> = (0..2)
            .map(|k| {
                let out = dir.path().join(format!("{i}_{k}.csv"));
                let mut a = args.to_vec();
                a.extend(["-o", out.to_str().unwrap()]);
                assert_eq!(frares(&a).status.code(), Some(0));
                fs::read(&out).unwrap()
            })
            .collect();
        assert_eq!(files[0], files[1], "{args:?}");
    }
}

#[test]
fn help_goes_to_stdout() {
    let o = frares(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["kernels", "coeffs", "resolvent", "verify", "solve", "compare-ml"] {
        assert!(stdout(&o).contains(sub));
    }
}
