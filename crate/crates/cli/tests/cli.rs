//! End-to-end tests of the installed binary: exit codes, file layout,
//! and the run/rate/metrics/predict/report/validate pipeline.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn arena(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arena"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    let config = serde_json::json!({
        "agents": [
            {"name": "oracle", "kind": "scripted", "bot": "noisy_oracle", "skill": 0.8},
            {"name": "coin", "kind": "scripted", "bot": "random"},
            {"name": "grabber", "kind": "scripted", "bot": "greedy"},
            {"name": "echo", "kind": "scripted", "bot": "mirror"},
        ],
        "games": ["hupi", "tragedy"],
        "sizes": [2, 3],
        "repeats": 2,
        "seed": 11,
        "output_dir": dir.join("out"),
    });
    std::fs::write(&path, serde_json::to_string_pretty(&config).expect("serializes"))
        .expect("config written");
    path
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"][..], &["run", "--help"][..]] {
        let out = arena(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["frobnicate"][..],
        &["run"][..],
        &["rate", "--config"][..],
        &["predict", "--config", "x.json", "--cv", "bogus"][..],
    ] {
        let out = arena(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn runtime_failures_exit_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let missing = dir.path().join("nope.json");
    let out = arena(&["run", "--config", missing.to_str().expect("utf8")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let config = write_config(dir.path());
    let out = arena(&["rate", "--config", config.to_str().expect("utf8")]);
    assert_eq!(out.status.code(), Some(2), "rate before run must fail");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no completed traces"), "stderr: {stderr}");
}

#[test]
fn pipeline_produces_ratings_metrics_predictions_and_figures() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config_path = write_config(dir.path());
    let config = config_path.to_str().expect("utf8");
    let out_dir = dir.path().join("out");

    let run = arena(&["run", "--config", config]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("planned 80 matches"), "stdout: {stdout}");
    assert_eq!(std::fs::read_dir(out_dir.join("traces")).expect("traces").count(), 80);

    let resume = arena(&["run", "--config", config, "--resume"]);
    assert_eq!(resume.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&resume.stdout);
    assert!(stdout.contains("resumed past 80"), "stdout: {stdout}");

    let rate = arena(&[
        "rate", "--config", config, "--per-game", "--vector-dim", "2", "--bootstrap", "50",
    ]);
    assert_eq!(rate.status.code(), Some(0), "{}", String::from_utf8_lossy(&rate.stderr));
    for name in [
        "global.json",
        "global.csv",
        "per_game.json",
        "per_game.csv",
        "vector.json",
        "vector_agents.csv",
        "vector_games.csv",
        "bootstrap.json",
        "bootstrap.csv",
        "bootstrap_samples.csv",
    ] {
        assert!(out_dir.join("ratings").join(name).exists(), "missing ratings/{name}");
    }
    let global = std::fs::read_to_string(out_dir.join("ratings").join("global.csv"))
        .expect("readable");
    assert!(global.starts_with("agent,rating\n"));
    assert_eq!(global.lines().count(), 5, "header plus one line per agent");

    let metrics = arena(&["metrics", "--config", config]);
    assert_eq!(metrics.status.code(), Some(0), "{}", String::from_utf8_lossy(&metrics.stderr));
    let vectors = std::fs::read_to_string(out_dir.join("metrics").join("metric_vectors.jsonl"))
        .expect("readable");
    assert_eq!(vectors.lines().count(), 192, "one vector per seat per match");

    let predict = arena(&["predict", "--config", config, "--cv", "l2ao"]);
    assert_eq!(predict.status.code(), Some(0), "{}", String::from_utf8_lossy(&predict.stderr));
    for name in ["weights.json", "importances.csv", "cv_l2ao.json", "cv_l2ao.csv"] {
        assert!(out_dir.join("predictor").join(name).exists(), "missing predictor/{name}");
    }
    let cv: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("predictor").join("cv_l2ao.json"))
            .expect("readable"),
    )
    .expect("valid json");
    let folds = cv["folds"].as_array().expect("folds").len();
    let skipped = cv["skipped"].as_array().expect("skipped").len();
    assert_eq!(folds + skipped, 6, "one fold per held-out agent pair");
    let csv = std::fs::read_to_string(out_dir.join("predictor").join("cv_l2ao.csv"))
        .expect("readable");
    assert_eq!(csv.lines().count(), folds + 1, "header plus one line per scored fold");

    let report = arena(&["report", "--config", config]);
    assert_eq!(report.status.code(), Some(0), "{}", String::from_utf8_lossy(&report.stderr));
    for name in [
        "outperformance_comm.svg",
        "outperformance_comm.csv",
        "similarity.svg",
        "similarity.csv",
        "consistency.svg",
        "consistency.csv",
        "ratings_violin.svg",
        "ratings_violin.csv",
        "importances.svg",
        "importances.csv",
        "roc.svg",
        "roc.csv",
    ] {
        assert!(out_dir.join("figures").join(name).exists(), "missing figures/{name}");
    }

    let validate = arena(&["validate", "--config", config]);
    assert_eq!(validate.status.code(), Some(0), "{}", String::from_utf8_lossy(&validate.stderr));
    let stdout = String::from_utf8_lossy(&validate.stdout);
    assert!(stdout.contains("validated 80 traces"), "stdout: {stdout}");
}

#[test]
fn validate_rejects_tampered_traces() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config_path = write_config(dir.path());
    let config = config_path.to_str().expect("utf8");
    let run = arena(&["run", "--config", config]);
    assert_eq!(run.status.code(), Some(0));

    let traces = dir.path().join("out").join("traces");
    let victim = std::fs::read_dir(&traces)
        .expect("traces")
        .map(|e| e.expect("entry").path())
        .find(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("tragedy") && n.ends_with(".jsonl"))
        })
        .expect("a tragedy trace");
    let mut lines: Vec<String> = std::fs::read_to_string(&victim)
        .expect("readable")
        .lines()
        .map(str::to_string)
        .collect();
    let result_line = lines
        .iter()
        .position(|l| l.contains("\"type\":\"match_result\""))
        .expect("a match result line");
    lines[result_line] = {
        let mut v: serde_json::Value =
            serde_json::from_str(&lines[result_line]).expect("valid line");
        let rewards = v["rewards"].as_object_mut().expect("rewards map");
        let (name, value) = rewards.iter().next().expect("a rewarded agent");
        let bumped = value.as_f64().expect("numeric reward") + 1.0;
        let name = name.clone();
        rewards.insert(name, serde_json::json!(bumped));
        v.to_string()
    };
    std::fs::write(&victim, lines.join("\n") + "\n").expect("written");

    let validate = arena(&["validate", "--config", config]);
    assert_eq!(validate.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&validate.stderr);
    assert!(stderr.contains("replay mismatch"), "stderr: {stderr}");
}

#[test]
fn ablation_flag_silences_every_match()  {
    let dir = tempfile::tempdir().expect("tempdir");
    let config_path = write_config(dir.path());
    let config = config_path.to_str().expect("utf8");
    let run = arena(&["run", "--config", config, "--ablation"]);
    assert_eq!(run.status.code(), Some(0));

    let traces = dir.path().join("out").join("traces");
    let mut checked = 0;
    for entry in std::fs::read_dir(&traces).expect("traces") {
        let path = entry.expect("entry").path();
        let name = path.file_name().and_then(|n| n.to_str()).expect("utf8").to_string();
        assert!(name.contains("-silent-"), "match id should mark the silent arm: {name}");
        let text = std::fs::read_to_string(&path).expect("readable");
        let header: serde_json::Value =
            serde_json::from_str(text.lines().next().expect("header line")).expect("valid json");
        assert_eq!(header["spec"]["communication"], serde_json::json!(false));
        assert!(!text.contains("\"type\":\"conversation_turn\""), "{name} has conversation");
        checked += 1;
    }
    assert_eq!(checked, 80);
}
