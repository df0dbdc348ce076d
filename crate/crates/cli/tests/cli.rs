use std::path::Path;
use std::process::Command;

fn gridworld(args: &[&str], dir: &Path) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_gridworld")).args(args).current_dir(dir).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn run_then_replay_gives_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gridworld(&["gen-tasks", "--profile", "flying", "--count", "3", "--segments", "2", "--out", "tasks.json"], d);
    let run = gridworld(&["run", "--tasks", "tasks.json", "--agent", "heuristic", "--workers", "2", "--log-dir", "logs"], d);
    let replay = gridworld(&["replay", "--tasks", "tasks.json", "--log-dir", "logs"], d);
    assert_eq!(run, replay);
    let report: serde_json::Value = serde_json::from_str(&run).unwrap();
    assert_eq!(report["episodes"].as_array().unwrap().len(), 3);
}

#[test]
fn bench_and_frame() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bench = gridworld(&["bench", "--steps", "2000", "--backend", "none"], d);
    let report: serde_json::Value = serde_json::from_str(&bench).unwrap();
    assert_eq!(report["steps"], 2000);
    assert_eq!(report["render_calls"], 0);
    gridworld(&["render-frame", "--steps", "20", "--out", "f.ppm"], d);
    let ppm = std::fs::read(d.join("f.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n64 64\n255\n"));
    assert_eq!(ppm.len(), 13 + 64 * 64 * 3);
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["run", "--agent", "oracle"][..], &["gen-tasks", "--profile", "spiral"], &["replay", "--log-dir", "missing"]] {
        let out = Command::new(env!("CARGO_BIN_EXE_gridworld")).args(args).current_dir(dir.path()).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}
