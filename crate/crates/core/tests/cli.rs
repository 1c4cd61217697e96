use std::fs;
use std::path::Path;
use std::process::Command;

use cylcauchy::cli::run_with;
use cylcauchy::deviating::ScanOptions;
use cylcauchy::operator::dirichlet_spectrum_1d;
use cylcauchy::solver::{synthesize_data, ModeBasis, ModeCoefficients, Provenance};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cylcauchy").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn run_json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(v: &Value, name: &str) -> Vec<f64> {
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[name].as_f64().unwrap())
        .collect()
}

#[test]
fn spectrum_csv_has_five_rows_at_full_precision() {
    let (code, out, _) = run(&["spectrum", "--mu", "25", "--count", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["m", "lambda", "residual"]);
    assert_eq!(rows.len(), 5);
    let lambda1: f64 = rows[0][1].parse().unwrap();
    assert!((lambda1 - 0.675_487_022_179_606_14).abs() < 1e-12);
    // 17 significant digits: d.dddddddddddddddde[+-]x
    let mantissa = rows[0][1].split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').len(), 18);
}

#[test]
fn asymptotics_ratio_tends_to_one() {
    let v = run_json(&["asymptotics", "--k-range", "5..15"]);
    let ratio = column(&v, "ratio");
    assert_eq!(ratio.len(), 11);
    let dev: Vec<f64> = ratio.iter().map(|r| (r - 1.0).abs()).collect();
    assert!(dev.windows(2).all(|w| w[1] < w[0]));
    assert!(dev[10] < 1e-9);
    assert_eq!(v["config"]["k_range"]["start"], 5);
}

#[test]
fn hadamard_amplification_is_monotone() {
    let v = run_json(&["hadamard", "--k-range", "2..12", "--epsilon", "1e-3"]);
    let amp = column(&v, "amplification");
    let norms = column(&v, "solution_norm");
    assert_eq!(amp.len(), 11);
    assert!(amp.windows(2).all(|w| w[1] > w[0]));
    for (a, n) in amp.iter().zip(&norms) {
        assert!((n - 1e-3 * a).abs() <= 1e-15 * n);
    }
}

#[test]
fn oracle_subcommand_agrees() {
    let v = run_json(&["oracle", "--mu", "4", "--grid-size", "100", "--count", "3"]);
    for d in column(&v, "relative_difference") {
        assert!(d < 1e-3);
    }
}

#[test]
fn artifacts_are_deterministic_and_embed_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let (code, out, _) = run(&[
            "hadamard",
            "--k-range",
            "2..6",
            "--format",
            "csv",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(out.is_empty());
    }
    let (ta, tb) = (
        fs::read_to_string(&a).unwrap(),
        fs::read_to_string(&b).unwrap(),
    );
    // only the echoed output path differs
    assert_eq!(ta.replace("a.csv", "X"), tb.replace("b.csv", "X"));
    let config: Value = serde_json::from_str(
        ta.lines()
            .next()
            .unwrap()
            .strip_prefix("# config: ")
            .unwrap(),
    )
    .unwrap();
    assert_eq!(config["subcommand"], "hadamard");
    assert_eq!(config["tol"], 1e-12);
    assert_eq!(config["panels"], 2048);
    assert_eq!(config["seed"], 0);
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 2);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn criterion_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = (1..=12)
        .map(|k| format!("{k},1,{}\n", (-(k as f64)).exp()))
        .collect();
    let input = write(dir.path(), "f.txt", &body);
    let v = run_json(&["criterion", "--input", &input, "--K", "12", "--M", "2"]);
    for key in ["partial_sums", "amplifications", "verdict", "tail_ratio"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], "convergent");
    let sums = v["partial_sums"].as_array().unwrap();
    assert_eq!(sums.len(), 12);
}

#[test]
fn solve_refuses_divergent_data_unless_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum = dirichlet_spectrum_1d(8).unwrap();
    let basis = ModeBasis::new(&spectrum, 8, 1, &ScanOptions::default()).unwrap();
    let f = ModeCoefficients::from_fn(8, 1, Provenance::Synthetic, |k, _| basis.lambda(k, 1));
    let input = write(dir.path(), "f.txt", &f.to_file_string());
    let (code, _, err) = run(&["solve", "--input", &input, "--K", "8", "--M", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("divergent"), "{err}");
    let v = run_json(&[
        "solve",
        "--input",
        &input,
        "--K",
        "8",
        "--M",
        "1",
        "--allow-ill-posed",
    ]);
    assert!((v["norm_sq"].as_f64().unwrap() - 8.0).abs() < 1e-12);
    assert!(v["residual"].as_f64().unwrap() <= 1e-14);
}

#[test]
fn solve_from_grid_recovers_modes() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum = dirichlet_spectrum_1d(3).unwrap();
    let basis = ModeBasis::new(&spectrum, 3, 3, &ScanOptions::default()).unwrap();
    let mut a = ModeCoefficients::zeros(3, 3, Provenance::Synthetic);
    a.set(1, 1, 1.0);
    a.set(2, 3, -0.5);
    let grid = synthesize_data(&a, &basis, 129, 129).unwrap();
    let input = write(dir.path(), "grid.csv", &grid.to_csv_string());
    let v = run_json(&[
        "solve",
        "--input",
        &input,
        "--K",
        "3",
        "--M",
        "3",
        "--grid-size",
        "16",
    ]);
    for row in v["rows"].as_array().unwrap() {
        let (k, m) = (
            row["k"].as_u64().unwrap() as usize,
            row["m"].as_u64().unwrap() as usize,
        );
        assert!(
            (row["a"].as_f64().unwrap() - a.get(k, m)).abs() < 1e-6,
            "({k},{m})"
        );
    }
    assert_eq!(v["samples"]["nx"], 16);
}

#[test]
fn solve_with_cutoff_reports_stability_constant() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = (1..=6)
        .flat_map(|k| (1..=2).map(move |m| format!("{k},{m},0.1\n")))
        .collect();
    let input = write(dir.path(), "f.txt", &body);
    let v = run_json(&[
        "solve",
        "--input",
        &input,
        "--K",
        "6",
        "--M",
        "2",
        "--cutoff-p",
        "3",
    ]);
    let c = v["stability_constant"].as_f64().unwrap();
    let norm = v["norm_sq"].as_f64().unwrap().sqrt();
    assert!(norm <= c * v["data_norm"].as_f64().unwrap());
    for row in v["rows"].as_array().unwrap() {
        if row["m"] == 1 && row["k"].as_u64().unwrap() > 3 {
            assert_eq!(row["a"].as_f64().unwrap(), 0.0);
        }
    }
}

#[test]
fn external_spectrum_rejects_grid_input() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum_file = write(dir.path(), "mu.txt", "1,2\n2,5\n3,5\n4,8\n5,10\n");
    let grid = cylcauchy::solver::GridSamples::from_fn(64, 64, |_, _| 1.0).unwrap();
    let input = write(dir.path(), "grid.csv", &grid.to_csv_string());
    let (code, _, err) = run(&[
        "solve",
        "--input",
        &input,
        "--K",
        "5",
        "--M",
        "2",
        "--spectrum",
        &spectrum_file,
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("unsupported"), "{err}");
    let coeffs = write(dir.path(), "f.txt", "1,1,1\n5,2,0.5\n");
    let v = run_json(&[
        "solve",
        "--input",
        &coeffs,
        "--K",
        "5",
        "--M",
        "2",
        "--spectrum",
        &spectrum_file,
    ]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["spectrum", "--mu", "4", "--unknown"]).0, 2);
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["hadamard", "--k-range", "9..3"]).0, 2);
    let (code, _, err) = run(&["criterion", "--input", "/nonexistent/file"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "1,1,1\n1,1,2\n");
    let (code, _, err) = run(&["criterion", "--input", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains(":2:"), "{err}");
}

#[test]
fn binary_honours_thread_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_cylcauchy"))
        .args(["hadamard", "--k-range", "2..4", "--format", "csv"])
        .env("CYLCAUCHY_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let (_, rows) = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 3);
    let bad = Command::new(env!("CARGO_BIN_EXE_cylcauchy"))
        .args(["hadamard"])
        .env("CYLCAUCHY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
