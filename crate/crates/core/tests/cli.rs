use std::path::{Path, PathBuf};
use std::process::Command;

use htnlearn::format::{parse_methods, parse_plan};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_htnlearn"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ablated_domain(dir: &Path) -> PathBuf {
    let d = htnlearn::benchmarks::sar_domain()
        .without_method("RS1")
        .and_then(|d| d.without_method("RS2"))
        .unwrap();
    let path = dir.join("sar_no_rescue.htn");
    std::fs::write(&path, htnlearn::format::save_domain(&d)).unwrap();
    path
}

#[test]
fn gen_writes_seeded_problem_files() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["gen", "--domain", "logistics", "--seed", "3", "--count", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    for id in ["logistics-3", "logistics-4"] {
        assert!(dir.path().join(format!("{id}.problem")).exists(), "{id}");
    }
}

#[test]
fn plan_then_learn_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let domain = ablated_domain(dir.path());
    let plan = dir.path().join("plan.txt");
    let metrics = dir.path().join("metrics.json");
    let traces = dir.path().join("traces.json");
    let status = bin()
        .args(["plan", "--domain"])
        .arg(&domain)
        .arg("--problem")
        .arg(fixture("two_survivors.problem"))
        .arg(format!("--oracle=scripted:{}", fixture("rescue.rules").display()))
        .args(["--learn", "on", "--out"])
        .arg(&plan)
        .arg("--metrics")
        .arg(&metrics)
        .arg("--dump-traces")
        .arg(&traces)
        .status()
        .unwrap();
    assert!(status.success());
    let plan = parse_plan(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert_eq!(plan.len_excluding_bookkeeping(), 9);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(m["oracle_calls"], 1);
    assert_eq!(m["learned_method_count"], 1);
    assert_eq!(m["solved"], true);
    assert_eq!(m["provenance"]["learned"], 1);

    let learned = dir.path().join("learned.htn");
    let status = bin()
        .args(["learn", "--domain"])
        .arg(&domain)
        .arg("--trace")
        .arg(&traces)
        .arg("--out")
        .arg(&learned)
        .status()
        .unwrap();
    assert!(status.success());
    let methods = parse_methods(&std::fs::read_to_string(&learned).unwrap()).unwrap();
    assert_eq!(methods.len(), 1);
    assert_eq!(methods[0].head.name, "rescueSurvivor");
}

#[test]
fn plan_without_oracle_reports_unsolved() {
    let dir = tempfile::tempdir().unwrap();
    let domain = ablated_domain(dir.path());
    let out = bin()
        .args(["plan", "--domain"])
        .arg(&domain)
        .arg("--problem")
        .arg(fixture("two_survivors.problem"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsolved"));
}

#[test]
fn learn_rejects_a_tampered_trace() {
    let dir = tempfile::tempdir().unwrap();
    let domain = ablated_domain(dir.path());
    let traces = dir.path().join("traces.json");
    let status = bin()
        .args(["plan", "--domain"])
        .arg(&domain)
        .arg("--problem")
        .arg(fixture("two_survivors.problem"))
        .arg(format!("--oracle=scripted:{}", fixture("rescue.rules").display()))
        .arg("--dump-traces")
        .arg(&traces)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let mut dump: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&traces).unwrap()).unwrap();
    dump["traces"][0]["steps"].as_array_mut().unwrap().remove(0);
    std::fs::write(&traces, dump.to_string()).unwrap();
    let out = bin()
        .args(["learn", "--domain"])
        .arg(&domain)
        .arg("--trace")
        .arg(&traces)
        .arg("--out")
        .arg(dir.path().join("x.htn"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ablate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["ablate", "--workers", "2", "--spec"])
        .arg(fixture("rescue_ablation.spec"))
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(dir.path().join("results.json").exists());
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = bin().args(["plan", "--domain", "nope.htn", "--problem", "nope.problem"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["plan", "--domain", "sar", "--problem", "x", "--oracle", "psychic"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
