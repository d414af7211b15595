use std::path::PathBuf;
use std::process::{Command, Output};

fn obf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obf"))
        .args(args)
        .env_remove("OBF_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

fn temp_path(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("obf-cli-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn rate_is_deterministic_and_reports_load() {
    let args = [
        "rate",
        "--model",
        "rayleigh M=1 rho_db=0",
        "--policy",
        "gtfp tau=1.386294,1.386294",
        "--samples",
        "1e4",
        "--seed",
        "7",
    ];
    let first = obf(&args);
    let second = obf(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "same command must be byte-identical");

    let text = stdout(&first);
    assert!(text.starts_with("# obf 0.1.0 | "), "missing provenance: {text}");
    assert!(text.contains("seed=7"));
    let data = text.lines().nth(2).expect("one record");
    let fields: Vec<f64> = data.split(',').map(|f| f.parse().unwrap()).collect();
    assert!((fields[3] - 0.5).abs() < 1e-6, "load {}", fields[3]);
}

#[test]
fn rate_with_zero_probability_policy_is_zero() {
    let out = obf(&[
        "rate",
        "--model",
        "rayleigh M=1 rho=1",
        "--policy",
        "gtfp p=0,0",
        "--samples",
        "1e4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let data = text.lines().nth(2).unwrap();
    let fields: Vec<&str> = data.split(',').collect();
    assert_eq!(fields[1].parse::<f64>().unwrap(), 0.0, "mc_mean");
    // p = 0 maps to the clamped quantile, so outage is 1 up to the clamp
    assert!(fields[4].parse::<f64>().unwrap() > 0.999_999, "outage");
}

#[test]
fn bad_model_spec_exits_two() {
    let out = obf(&["rate", "--model", "weibull k=2", "--policy", "gtfp tau=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_required_value_exits_two() {
    let out = obf(&["optimize", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tradeoff_refuses_uncertified_model_with_exit_four() {
    let out = obf(&[
        "tradeoff",
        "--model",
        "rayleigh M=1 rho=10",
        "--n-list",
        "10",
        "--lambda-grid",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("plane condition"), "{err}");
}

#[test]
fn verify_schur_suite_passes() {
    let out = obf(&["verify", "--suite", "schur"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("all 7 checks passed"));
}

#[test]
fn verify_fault_injection_names_the_derivative() {
    let out = obf(&[
        "verify",
        "--suite",
        "analytic",
        "--samples",
        "2e4",
        "--inject-fault",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let text = stdout(&out);
    assert!(text.contains("[FAIL] analytic/derivative-mismatch"), "{text}");
    assert!(text.contains("first failure: analytic/derivative-mismatch"), "{text}");
}

#[test]
fn figures_subset_writes_csv_with_maximum_at_quarter() {
    let dir = temp_path("figs");
    let out = obf(&["figures", "--out-dir", dir.to_str().unwrap(), "--only", "fig5a"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.join("fig5a.csv")).expect("fig5a written");
    assert!(text.starts_with("# obf 0.1.0 | "));
    let mut best = (0.0f64, f64::NEG_INFINITY);
    for line in text.lines().skip(2) {
        let (p2, rate) = line.split_once(',').unwrap();
        let rate: f64 = rate.parse().unwrap();
        if rate > best.1 {
            best = (p2.parse().unwrap(), rate);
        }
    }
    assert_eq!(best.0, 0.25, "sweep at 0 dB must peak at the homogeneous point");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let path = temp_path("config.txt");
    std::fs::write(
        &path,
        "model = rayleigh M=1 rho=1\npolicy = gtfp p=0.25,0.25\nsamples = 1e4\nseed = 9\n",
    )
    .unwrap();
    let from_config = obf(&["rate", "--config", path.to_str().unwrap()]);
    assert_eq!(from_config.status.code(), Some(0));
    assert!(stdout(&from_config).contains("seed=9"));

    let overridden = obf(&["rate", "--config", path.to_str().unwrap(), "--seed", "7"]);
    assert!(stdout(&overridden).contains("seed=7"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn env_seed_used_when_nothing_else_given() {
    let out = Command::new(env!("CARGO_BIN_EXE_obf"))
        .args([
            "rate",
            "--model",
            "rayleigh M=1 rho=1",
            "--policy",
            "gtfp p=0.5,0.5",
            "--samples",
            "1e3",
        ])
        .env("OBF_SEED", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("seed=4"));
}

#[test]
fn json_output_is_valid_and_mirrors_the_table() {
    let out = obf(&[
        "optimize",
        "--model",
        "rayleigh M=1 rho=1",
        "--lambda",
        "0.5",
        "--resolution",
        "201",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["provenance"]["version"], "obf 0.1.0");
    assert_eq!(doc["rows"][0]["p2"], 0.25);
    assert_eq!(doc["rows"][0]["ratio"], 1.0);
}
