use std::process::Command;

use qsdc_cli::{
    run_experiment, summarize, write_outputs, CliError, ExperimentSpec, RunOptions, Scenario,
};
use qsdc_core::channel::{EveStrategy, NoiseKind, NoiseModel};
use qsdc_core::SessionConfig;

fn qsdc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsdc"))
}

fn spec(scenario: Scenario, sessions: usize) -> ExperimentSpec {
    ExperimentSpec {
        sessions,
        ..ExperimentSpec::new(scenario)
    }
}

#[test]
fn noiseless_sessions_all_agree() {
    let report = run_experiment(&spec(Scenario::Noiseless, 100), &RunOptions::default()).unwrap();
    let s = &report.groups[0].summary;
    assert_eq!(s.key_agreement_rate, 1.0);
    assert_eq!(s.abort_rate, 0.0);
    assert_eq!(s.qber_mean, Some(0.0));
    assert_eq!(s.qber_std, Some(0.0));
    assert!(s.detection_rate.is_none());
}

#[test]
fn single_report_summary_matches_its_groups() {
    let mut sweep = spec(Scenario::NoiseSweep, 30);
    sweep.p_values = vec![0.0, 0.08];
    sweep.session.noise = NoiseModel::new(NoiseKind::BitFlip, 0.0).unwrap();
    let report = run_experiment(&sweep, &RunOptions::default()).unwrap();
    let summaries = summarize(std::slice::from_ref(&report)).unwrap();
    assert_eq!(summaries.len(), 2);
    for (g, s) in report.groups.iter().zip(&summaries) {
        assert_eq!(g.label, s.label);
        assert_eq!(g.summary, s.summary);
        assert!((0.0..=1.0).contains(&s.summary.abort_rate));
    }
}

#[test]
fn summaries_pool_reports_of_one_scenario() {
    let a = run_experiment(&spec(Scenario::Noiseless, 5), &RunOptions::default()).unwrap();
    let b = run_experiment(
        &spec(Scenario::Noiseless, 7),
        &RunOptions {
            seed: Some(100),
            ..RunOptions::default()
        },
    )
    .unwrap();
    let pooled = summarize(&[a, b]).unwrap();
    assert_eq!(pooled[0].summary.sessions, 12);
}

#[test]
fn mixed_scenarios_are_rejected() {
    let a = run_experiment(&spec(Scenario::Noiseless, 2), &RunOptions::default()).unwrap();
    let b = run_experiment(&spec(Scenario::BoundsReport, 1), &RunOptions::default()).unwrap();
    assert!(summarize(&[a, b]).is_err());
}

#[test]
fn eve_report_has_matched_baseline() {
    let mut s = spec(Scenario::EveDetection, 20);
    s.session.eve = EveStrategy::InterceptResendZ;
    let report = run_experiment(&s, &RunOptions::default()).unwrap();
    let labels: Vec<&str> = report.groups.iter().map(|g| g.label.as_str()).collect();
    assert_eq!(labels, ["eve", "baseline"]);
    assert!(report.groups[0].summary.detection_rate.is_some());
    assert!(report.groups[1].summary.detection_rate.is_none());
    // same trial seeds in both groups
    for (e, b) in report.groups[0]
        .sessions
        .iter()
        .zip(&report.groups[1].sessions)
    {
        assert_eq!(e.seed, b.seed);
        assert_eq!(e.prepared_bits, b.prepared_bits);
    }
}

#[test]
fn report_embeds_resolved_config() {
    let report = run_experiment(
        &spec(Scenario::BoundsReport, 1),
        &RunOptions {
            seed: Some(3),
            ..RunOptions::default()
        },
    )
    .unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 3);
    assert_eq!(json["config"]["session"]["seed"], 3);
    assert_eq!(json["config"]["bounds"][0]["n"], 7);
    let rate = json["bounds"][0]["rate_bound"].as_f64().unwrap();
    assert!((rate - 0.163_145_572_124_632_55).abs() < 1e-12);
    let gv = json["bounds"][0]["gv_k1"].as_f64().unwrap();
    assert!((gv - 2.142_019_004_872_427_9).abs() < 1e-12);
}

#[test]
fn no_oracle_strips_hidden_events() {
    let with = run_experiment(&spec(Scenario::Noiseless, 3), &RunOptions::default()).unwrap();
    let without = run_experiment(
        &spec(Scenario::Noiseless, 3),
        &RunOptions {
            no_oracle: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert!(with.groups[0].sessions.iter().all(|t| t.oracle.is_some()));
    assert!(without.groups[0]
        .sessions
        .iter()
        .all(|t| t.oracle.is_none()));
    assert!(!without.to_json().unwrap().contains("\"oracle\""));
}

#[test]
fn thread_count_does_not_change_results() {
    let mut s = spec(Scenario::NoiseSweep, 24);
    s.p_values = vec![0.04];
    s.session = SessionConfig {
        noise: NoiseModel::new(NoiseKind::Depolarizing, 0.0).unwrap(),
        ..SessionConfig::default()
    };
    let run = |jobs| {
        run_experiment(
            &s,
            &RunOptions {
                jobs: Some(jobs),
                ..RunOptions::default()
            },
        )
        .unwrap()
        .to_json()
        .unwrap()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(Scenario::NoiseSweep, 4);
    s.p_values = vec![0.0, 0.1];
    s.session.noise = NoiseModel::new(NoiseKind::PhaseFlip, 0.0).unwrap();
    let report = run_experiment(&s, &RunOptions::default()).unwrap();
    let written = write_outputs(&report, dir.path()).unwrap();
    assert_eq!(written.len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("label,noise_p,"));
    assert!(lines[2].starts_with("p=0.1,0.1,"));
}

#[test]
fn bounds_command_prints_json() {
    let out = qsdc()
        .args(["bounds", "--n", "7", "--d1", "3", "--d2", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["gv_k1"].as_f64().unwrap() - 2.142_019_004_872_427_9).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "scenario = \"noiseless\"\nsessions = 0\n").unwrap();
    let out = qsdc()
        .arg("run")
        .arg("--config")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`sessions`"));

    let missing = dir.path().join("missing.toml");
    let out = qsdc()
        .arg("run")
        .arg("--config")
        .arg(&missing)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = qsdc()
        .args(["bounds", "--n", "7", "--d1", "9", "--d2", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = qsdc().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = qsdc().arg("example").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn example_check_failure_is_exit_three() {
    let err = CliError::Check("x".into());
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn run_prints_report_without_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ex.toml");
    std::fs::write(&cfg, "scenario = \"paper_example\"\nseed = 4\n").unwrap();
    let out = qsdc()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scenario"], "worked_example");
    assert_eq!(v["example"]["declared"], "110");
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentSpec::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 4);
}
