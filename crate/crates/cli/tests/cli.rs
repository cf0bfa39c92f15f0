use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn infofit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infofit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_with(dir: &Path, command: &str, cfg: &Value) -> Output {
    let path = dir.join(format!("{command}.json"));
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    infofit(&[command, "--config", path.to_str().unwrap()], &dir.join("out"))
}

fn load(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(configs().join(name)).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn fitness_run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("two_state_fitness.json");
    let o = infofit(&["fitness", "--config", cfg.to_str().unwrap(), "--seed", "9"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.json", "events.jsonl", "summary.csv", "meta.json", "model.json", "joint.csv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let snapshot: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(snapshot["seed"], 9);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["exit_code"], 0);
}

#[test]
fn jsonl_tables_carry_the_same_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("collective.json");
    let o = infofit(&["collective", "--config", cfg.to_str().unwrap(), "--format", "jsonl"], dir.path());
    assert_eq!(code(&o), 0);
    let table = fs::read_to_string(dir.path().join("summary.jsonl")).unwrap();
    assert_eq!(table.lines().count(), 10);
    assert!(table.lines().all(|l| serde_json::from_str::<Value>(l).is_ok()));
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = infofit(&["fitness", "--config", "/nonexistent/run.json"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load("two_state_fitness.json");
    cfg["surprise"] = json!(1);
    assert_eq!(code(&run_with(dir.path(), "fitness", &cfg)), 2);
}

#[test]
fn infeasible_models_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load("two_state_fitness.json");
    cfg["constraints"]["d_max"] = json!(0.5);
    let o = run_with(dir.path(), "fitness", &cfg);
    assert_eq!(code(&o), 3);
    let events = fs::read_to_string(dir.path().join("out/events.jsonl")).unwrap();
    assert!(events.contains("\"feasible\":false"));
}

#[test]
fn zero_generations_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load("xor_evolve.json");
    cfg["generations"] = json!(0);
    assert_eq!(code(&run_with(dir.path(), "evolve", &cfg)), 2);
}

#[test]
fn empty_roster_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({ "schema": "infofit.run/1", "collective": { "roster": [], "tau": 1.0 } });
    assert_eq!(code(&run_with(dir.path(), "collective", &cfg)), 2);
}

#[test]
fn survival_needs_a_two_state_world() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load("survival.json");
    cfg["world"] = json!({ "kind": "logic", "function": "xor", "exhaustive_corners": true });
    assert_eq!(code(&run_with(dir.path(), "survival", &cfg)), 2);
}

#[test]
fn single_class_worlds_cannot_be_conceptualized() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load("tabular_concepts.json");
    cfg["world"] = json!({ "kind": "logic", "function": "false", "exhaustive_corners": true });
    cfg["model"] = json!({ "family": "threshold_unit", "units_per_layer": [1], "latent_dim": 1, "input_dim": 2 });
    assert_eq!(code(&run_with(dir.path(), "conceptualize", &cfg)), 3);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("xor_evolve.json");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&infofit(&["evolve", "--config", cfg.to_str().unwrap(), "--seed", "1"], &a)), 0);
    assert_eq!(code(&infofit(&["evolve", "--config", cfg.to_str().unwrap(), "--seed", "2"], &b)), 0);
    let read = |d: &Path| fs::read(d.join("events.jsonl")).unwrap();
    assert_ne!(read(&a), read(&b));
}
