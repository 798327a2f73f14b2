use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn somlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_somlab")).args(args).current_dir(cwd).output().unwrap()
}

fn scenario_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn oscillation_trajectory_alternates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario_file("two_agent_oscillation");
    let out = somlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "out"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("out/trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,agent,opinion,silent"));
    let agent0: Vec<&str> = lines
        .filter(|l| l.split(',').nth(1) == Some("0"))
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert!(agent0.len() >= 3);
    for (t, v) in agent0.iter().enumerate() {
        assert_eq!(*v, if t % 2 == 0 { "1" } else { "0" });
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["classification"]["kind"], "cycle");
    assert_eq!(summary["classification"]["period"], 2);
    let extremes = std::fs::read_to_string(tmp.path().join("out/extremes.csv")).unwrap();
    assert!(extremes.starts_with("t,max,min,range\n0,1,0,1\n"));
}

#[test]
fn constant_opinions_reach_consensus_after_one_window() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "run.json",
        r#"{"graph": {"generator": "clique", "n": 4, "weights": {"scheme": "random_dirichlet", "self_weight": 0.2}, "seed": 3},
            "variant": "som_plus", "tolerances": 0.1, "initial_opinions": [0.3, 0.3, 0.3, 0.3]}"#,
    );
    let out = somlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "o"], tmp.path());
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["classification"]["kind"], "consensus");
    assert_eq!(summary["classification"]["steps_used"], 50);
    assert_eq!(summary["classification"]["value"], 0.3);
}

#[test]
fn bad_tolerance_exits_with_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "run.json",
        r#"{"graph": {"generator": "clique", "n": 3}, "variant": "som_minus",
            "tolerances": 1.3, "initial_opinions": [0.1, 0.5, 0.9]}"#,
    );
    let out = somlab(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("τ ∈ [0,1]"));
}

#[test]
fn malformed_inputs_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_graph = write(tmp.path(), "g.json", r#"{"n": 2, "edges": [[0, 1, 1.2]]}"#);
    assert_eq!(somlab(&["validate", bad_graph.to_str().unwrap()], tmp.path()).status.code(), Some(2));
    assert_eq!(somlab(&["simulate", "--config", "missing.json"], tmp.path()).status.code(), Some(2));
    assert_eq!(somlab(&["scenario", "no_such_scenario"], tmp.path()).status.code(), Some(2));
}

#[test]
fn replay_reproduces_summary() {
    for name in ["bridge_dissensus", "hidden_consensus", "two_agent_oscillation"] {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = scenario_file(name);
        let cfg = cfg.to_str().unwrap();
        assert!(somlab(&["simulate", "--config", cfg, "--out-dir", "a"], tmp.path()).status.success());
        let out = somlab(&["simulate", "--config", cfg, "--out-dir", "b", "--replay", "a/trajectory.csv"], tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let a = std::fs::read(tmp.path().join("a/summary.json")).unwrap();
        let b = std::fs::read(tmp.path().join("b/summary.json")).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn thinned_trajectory_cannot_be_replayed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario_file("bridge_dissensus");
    let cfg = cfg.to_str().unwrap();
    assert!(somlab(&["simulate", "--config", cfg, "--out-dir", "a", "--snapshot-stride", "5"], tmp.path()).status.success());
    let out = somlab(&["simulate", "--config", cfg, "--out-dir", "b", "--replay", "a/trajectory.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn series_only_skips_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario_file("vocal_minority");
    let out = somlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "o", "--series-only"], tmp.path());
    assert!(out.status.success());
    assert!(!tmp.path().join("o/trajectory.csv").exists());
    assert!(tmp.path().join("o/extremes.csv").exists());
}

#[test]
fn parallelism_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario_file("hidden_consensus");
    let cfg = cfg.to_str().unwrap();
    let seq = somlab(&["simulate", "--config", cfg, "--out-dir", "a"], tmp.path());
    let par = Command::new(env!("CARGO_BIN_EXE_somlab"))
        .args(["simulate", "--config", cfg, "--out-dir", "b"])
        .env("SOMLAB_THREADS", "4")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(seq.status.success() && par.status.success());
    for file in ["trajectory.csv", "summary.json", "extremes.csv"] {
        assert_eq!(
            std::fs::read(tmp.path().join("a").join(file)).unwrap(),
            std::fs::read(tmp.path().join("b").join(file)).unwrap()
        );
    }
    let zero = Command::new(env!("CARGO_BIN_EXE_somlab"))
        .args(["simulate", "--config", cfg])
        .env("SOMLAB_THREADS", "0")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn scenario_command_passes_and_exports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = somlab(&["scenario", "--export", "files", "--out-dir", "runs"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches("[PASS]").count(), 5);
    for name in somlab::scenarios::BUILTIN_NAMES {
        let shipped = std::fs::read_to_string(scenario_file(name)).unwrap();
        let exported = std::fs::read_to_string(tmp.path().join("files").join(format!("{name}.json"))).unwrap();
        assert_eq!(shipped, exported);
        assert!(tmp.path().join("runs").join(name).join("summary.json").exists());
    }
}

#[test]
fn generate_then_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = somlab(
        &["generate", "--kind", "preferential-attachment", "--n", "50", "--m", "2", "--weights", "dirichlet", "--seed", "4", "--one-based", "--out", "g.json"],
        tmp.path(),
    );
    assert!(out.status.success());
    let out = somlab(&["validate", "g.json"], tmp.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["strongly_connected"], true);
    assert_eq!(report["edge_count"], 2 * 2 * 48);

    let cfg = write(
        tmp.path(),
        "run.json",
        r#"{"graph": "g.json", "variant": "som_minus", "tolerances": 0.3, "initial_opinions": "random", "seed": 1}"#,
    );
    let out = somlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "o", "--seed", "2"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_and_bench_emit_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = somlab(&["sweep", "--n", "300", "--m", "2,4", "--seeds", "2", "--variant", "som_minus"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("m,runs,consensus_rate,mean_final_range,mean_silent_fraction,undecided\n"));
    assert_eq!(text.lines().count(), 3);

    let out = somlab(&["bench", "--n", "2000", "--m", "3", "--steps", "20", "--extremes-out", "x.csv"], tmp.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["steps"], 20);
    assert_eq!(std::fs::read_to_string(tmp.path().join("x.csv")).unwrap().lines().count(), 22);
}
