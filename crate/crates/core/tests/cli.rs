//! End-to-end checks of the command-line binary: exit codes, replayable
//! output, config precedence, and the documented output schemas.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_airyedge"));
    cmd.env_remove("AIRYEDGE_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn temp_file(tag: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("airyedge-cli-{}-{tag}.out", std::process::id()));
    path
}

#[test]
fn trajectory_csv_is_byte_identical_for_a_seed() {
    let args = [
        "trajectory",
        "--n",
        "400",
        "--beta",
        "2",
        "--num-eigs",
        "2",
        "--t-max",
        "0.3",
        "--dt",
        "0.1",
        "--seed",
        "7",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let mut other_args = args;
    other_args[12] = "8";
    let other = run(&other_args);
    assert!(other.status.success());
    assert_ne!(first.stdout, other.stdout);

    let text = stdout_str(&first);
    assert!(text.starts_with("# airyedge trajectory\n"));
    assert!(text.contains("# seed = 7\n"));
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column header");
    assert_eq!(header, "t,eig_index,scaled_eig,recentered,deriv_est");
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows % 2, 0, "two tracked eigenvalues per frame");
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = run(&["trajectory", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["trajectory", "--n", "200", "--beta", "-1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout_bytes() {
    let path = temp_file("outfile");
    let args = [
        "trajectory",
        "--n",
        "300",
        "--beta",
        "4",
        "--t-max",
        "0.2",
        "--dt",
        "0.1",
        "--seed",
        "3",
    ];
    let streamed = run(&args);
    assert!(streamed.status.success());
    let mut with_file: Vec<&str> = args.to_vec();
    let path_str = path.display().to_string();
    with_file.extend_from_slice(&["--out", &path_str]);
    let written = run(&with_file);
    assert!(written.status.success());
    let file_bytes = std::fs::read(&path).expect("output file exists");
    std::fs::remove_file(&path).ok();
    // The header echoes out_path, so compare past the metadata block.
    let body = |bytes: &[u8]| -> Vec<u8> {
        let text = String::from_utf8(bytes.to_vec()).unwrap();
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
            .into_bytes()
    };
    assert_eq!(body(&streamed.stdout), body(&file_bytes));
}

#[test]
fn deterministic_limit_has_unit_slope_squared() {
    let out = run(&[
        "sao", "--beta", "inf", "--h", "0.002", "--L", "6", "--t-max", "0.04", "--dt", "0.04",
        "--seed", "1",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut data_rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        let slope_sq: f64 = fields[4].parse().unwrap();
        let rel_err: f64 = fields[6].parse().unwrap();
        assert!((slope_sq - 1.0).abs() < 5e-3, "slope_sq = {slope_sq}");
        assert!(rel_err < 1e-3, "rel_err = {rel_err}");
        data_rows += 1;
    }
    assert_eq!(data_rows, 2, "one row per grid time");
}

#[test]
fn quick_verification_passes_and_reports_json() {
    let out = run(&["verify", "--quick", "--seed", "42"]);
    assert!(out.status.success(), "quick verify must exit 0");
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).expect("json");
    assert_eq!(report["quick"], serde_json::Value::Bool(true));
    assert_eq!(report["all_passed"], serde_json::Value::Bool(true));
    let results = report["results"].as_array().expect("results array");
    assert_eq!(results.len(), 4);
    for r in results {
        assert_eq!(r["passed"], serde_json::Value::Bool(true));
        assert!(r["seconds"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn derivative_dist_report_has_moments_and_ks() {
    let out = run(&[
        "derivative-dist",
        "--n",
        "300",
        "--beta",
        "2",
        "--reps",
        "300",
        "--seed",
        "9",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).expect("json");
    assert_eq!(report["config"]["subcommand"], "derivative-dist");
    assert_eq!(report["spec"]["n"], 300);
    let mean = report["moments"][0]["mean"].as_f64().unwrap();
    assert!((mean - 1.0).abs() < 0.3, "mean = {mean}");
    assert!(report["ks_reports"][0]["statistic"].as_f64().unwrap() > 0.0);
}

#[test]
fn stationarity_report_is_a_ks_record() {
    let out = run(&[
        "stationarity",
        "--beta",
        "2",
        "--h",
        "0.008",
        "--L",
        "3",
        "--t-max",
        "0.4",
        "--reps",
        "60",
        "--seed",
        "4",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).expect("json");
    assert_eq!(report["config"]["subcommand"], "stationarity");
    let stat = report["ks"]["statistic"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&stat));
    assert!(report["ks"]["critical_value"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_fills_flags_but_explicit_flags_win() {
    let cfg = temp_file("config");
    std::fs::write(
        &cfg,
        "n = 400\nbeta = 2\nnum-eigs = 2\nt_max = 0.2\ndt = 0.1\nseed = 99\n",
    )
    .unwrap();
    let cfg_str = cfg.display().to_string();
    let out = run(&["trajectory", "--config", &cfg_str, "--n", "300"]);
    std::fs::remove_file(&cfg).ok();
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("# n = 300\n"), "flag wins over file");
    assert!(text.contains("# num_eigs = 2\n"), "file fills unset flag");
    assert!(text.contains("# seed = 99\n"), "file seed beats default");
}

#[test]
fn env_var_overrides_the_default_seed_only() {
    let args = [
        "trajectory",
        "--n",
        "200",
        "--beta",
        "2",
        "--t-max",
        "0.1",
        "--dt",
        "0.1",
    ];
    let from_env = bin()
        .args(args)
        .env("AIRYEDGE_SEED", "1234")
        .output()
        .unwrap();
    assert!(from_env.status.success());
    assert!(stdout_str(&from_env).contains("# seed = 1234\n"));

    let mut with_flag_args = args.to_vec();
    with_flag_args.extend_from_slice(&["--seed", "7"]);
    let with_flag = bin()
        .args(&with_flag_args)
        .env("AIRYEDGE_SEED", "1234")
        .output()
        .unwrap();
    assert!(with_flag.status.success());
    assert!(stdout_str(&with_flag).contains("# seed = 7\n"));

    let bad = bin()
        .args(args)
        .env("AIRYEDGE_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
