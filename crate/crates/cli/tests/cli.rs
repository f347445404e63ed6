use std::path::Path;
use std::process::{Command, Output};

fn distrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distrl"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn show_config_prints_the_preset() {
    let out = distrl(&["show-config", "--config", "best_average", "--seed", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("updates_per_episode = 4"));
    assert!(text.contains("seed = 9"));
    assert!(text.contains("[env.cost]"));
}

#[test]
fn train_report_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let run_s = run.to_str().unwrap();
    let out = distrl(&["train", "--episodes", "3", "--seed", "4", "--out", run_s]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let metrics = std::fs::read_to_string(run.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 4);

    let out = distrl(&["report", "--out", run_s]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("Separate: yes"));
    assert!(run.join("report/return_curve.csv").exists());

    let ck = run.join("checkpoints/latest.json");
    let out = distrl(&["eval", "--checkpoint", ck.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("profit"));

    // resume to a larger budget appends
    let out = distrl(&[
        "train",
        "--episodes",
        "5",
        "--out",
        run_s,
        "--checkpoint",
        ck.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let metrics = std::fs::read_to_string(run.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 6);
}

#[test]
fn random_agent_logs_like_training() {
    let dir = tempfile::tempdir().unwrap();
    let out = distrl(&[
        "random-agent",
        "--episodes",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 6);
    assert!(metrics.starts_with("episode,return,moving_avg_return"));
}

#[test]
fn exit_codes_separate_config_and_artifact_errors() {
    let out = distrl(&["show-config", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = distrl(&["report", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let ck = Path::new(dir.path()).join("none.json");
    let out = distrl(&["eval", "--checkpoint", ck.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
