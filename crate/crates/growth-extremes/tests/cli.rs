//! End-to-end checks of the command-line interface: analytic subcommands
//! print the documented quantities, configuration errors exit with code 2
//! and name the offending field, and `simulate` writes the artifact
//! directory.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_growth-extremes"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn sigma_prints_the_closed_form_value() {
    let output = run(&["sigma", "--model", "gnedenko", "--lambda", "1", "--t", "120"]);
    assert!(output.status.success());
    let text = stdout(&output);
    let value: f64 = text
        .lines()
        .next()
        .unwrap()
        .strip_prefix("sigma = ")
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 10.0).abs() < 1e-9, "sigma line reads {text}");
    assert!(text.contains("regime:"));
}

#[test]
fn sigma_rejects_polynomial_tails() {
    let output = run(&["sigma", "--model", "weibull_alpha", "--lambda", "1", "--t", "10"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn malthus_attachment_tree_uniform_rate() {
    let output = run(&[
        "malthus", "--equation", "bb", "--model", "weibull_alpha", "--alpha", "1",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    let value: f64 = text
        .lines()
        .next()
        .unwrap()
        .strip_prefix("lambda = ")
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 1.2550).abs() <= 1e-3, "lambda line reads {text}");
}

#[test]
fn malthus_accepts_offspring_tables() {
    let output = run(&[
        "malthus",
        "--equation",
        "rbp",
        "--model",
        "weibull_alpha",
        "--alpha",
        "1",
        "--offspring",
        "2:1:0.5",
        "--offspring",
        "1:2:0.5",
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("lambda = "));
}

#[test]
fn malthus_condensed_phase_is_a_clean_error() {
    let output = run(&[
        "malthus", "--equation", "bb", "--model", "weibull_alpha", "--alpha", "3",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("existence condition"));
}

#[test]
fn kappa_reports_the_curvature_constant() {
    let output = run(&["kappa", "--model", "gnedenko"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("kappa = 2.000000"), "kappa output: {text}");
    assert!(text.contains("extrapolation spread"));
}

#[test]
fn catalog_lists_every_law() {
    let output = run(&["catalog"]);
    assert!(output.status.success());
    let text = stdout(&output);
    for id in growth_extremes::FitnessModel::CATALOG_IDS {
        assert!(text.contains(id), "catalog omits {id}");
    }
    // The law violating the curvature regularity conditions is flagged.
    let flagged = text.lines().find(|l| l.starts_with("loglog_negative")).unwrap();
    assert!(flagged.contains("FAIL"));
}

#[test]
fn validate_lists_scenarios_and_rejects_unknown_names() {
    let output = run(&["validate", "--list"]);
    assert!(output.status.success());
    assert_eq!(stdout(&output).lines().count(), 12);

    let output = run(&["validate", "--name", "no-such-scenario"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn validate_runs_a_named_scenario() {
    let output = run(&["validate", "--name", "sigma-exact-solution"]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("[PASS] sigma-exact-solution"));
}

#[test]
fn simulate_writes_the_artifact_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
            model = "toy"
            replicates = 3
            seed = 5
            [fitness]
            id = "weibull_alpha"
            params = [1.0]
            [stop]
            t_end = 15.0
        "#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let output = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    for name in ["config.resolved.json", "replicates.csv", "summary.json"] {
        assert!(out.join(name).is_file(), "missing artifact {name}");
    }
    let csv = std::fs::read_to_string(out.join("replicates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "header plus one row per replicate");
}

#[test]
fn simulate_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
            model = "crp"
            replicates = 4
            [fitness]
            id = "weibull_alpha"
            params = [1.0]
            [stop]
            n_customers = 200
            [outputs]
            point_cloud = true
        "#,
    )
    .unwrap();
    let run = |out: &std::path::Path, threads: &str| {
        let output = run(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "31",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    };
    let (serial, again, parallel) =
        (dir.path().join("serial"), dir.path().join("again"), dir.path().join("parallel"));
    run(&serial, "1");
    run(&again, "1");
    run(&parallel, "2");
    for name in ["config.resolved.json", "replicates.csv", "summary.json", "tables.csv"] {
        let reference = std::fs::read(serial.join(name)).unwrap();
        assert_eq!(reference, std::fs::read(again.join(name)).unwrap(), "{name} differs on rerun");
        assert_eq!(
            reference,
            std::fs::read(parallel.join(name)).unwrap(),
            "{name} differs under parallel execution"
        );
    }
}

#[test]
fn simulate_config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(
        &config,
        r#"
            model = "dereich"
            [fitness]
            id = "weibull_alpha"
            params = [1.0]
            [dynamics]
            beta = 1.4
            [stop]
            n_vertices = 50
        "#,
    )
    .unwrap();
    let output = run(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("dynamics.beta"));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let output = run(&["simulate", "--config", "/nonexistent/exp.toml"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_nonzero_with_usage() {
    let output = bin().arg("--definitely-not-a-flag").output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).to_lowercase().contains("usage"));
}
