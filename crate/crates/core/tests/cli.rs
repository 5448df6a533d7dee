use std::path::Path;
use std::process::{Command, Output};

const SMALL: [&str; 8] = ["--pga", "6", "--ph", "30", "--pe", "12", "--generations", "2"];

fn imc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imc-dse"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("IMC_DSE_OUT")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn optimize_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args: Vec<&str> = ["optimize", "--seed", "9"].into_iter().chain(SMALL).collect();
    for d in [&a, &b] {
        let out = imc(d.path(), &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(read(a.path(), "run.json"), read(b.path(), "run.json"));
    assert_eq!(read(a.path(), "convergence.csv"), read(b.path(), "convergence.csv"));
    let timing: serde_json::Value = serde_json::from_str(&read(a.path(), "timing.json")).unwrap();
    assert!(timing["total_s"].as_f64().unwrap() >= 0.0);
    let conv = read(a.path(), "convergence.csv");
    assert!(conv.starts_with("generation,phase,best_score,mean_score,evals\n"));
    assert_eq!(conv.lines().count(), 1 + 4 * 2 + 1);
}

#[test]
fn bad_config_exits_with_2() {
    let d = tempfile::tempdir().unwrap();
    let out = imc(d.path(), &["optimize", "--objective", "speed"]);
    assert_eq!(out.status.code(), Some(2));
    let out = imc(d.path(), &["optimize", "--pga", "50", "--pe", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = imc(d.path(), &["optimize", "--space", "/nonexistent/space.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_best_exits_with_3() {
    let d = tempfile::tempdir().unwrap();
    let args: Vec<&str> = ["optimize", "--area-constraint", "0.001"].into_iter().chain(SMALL).collect();
    let out = imc(d.path(), &args);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.path().join("run.json").exists());
}

#[test]
fn separate_baseline_writes_one_record_per_workload() {
    let d = tempfile::tempdir().unwrap();
    let args: Vec<&str> = ["baseline", "--strategy", "separate"].into_iter().chain(SMALL).collect();
    let out = imc(d.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for w in ["resnet18", "vgg16", "alexnet", "mobilenetv3"] {
        assert!(d.path().join(format!("{w}_run.json")).exists(), "{w}");
    }
}

#[test]
fn oracle_and_tech_sweep_outputs() {
    let d = tempfile::tempdir().unwrap();
    let args: Vec<&str> = ["oracle"].into_iter().chain(SMALL).collect();
    let out = imc(d.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let landscape = read(d.path(), "landscape.csv");
    assert_eq!(landscape.lines().count(), 1 + 375);
    assert!(landscape.starts_with("index,"));

    let d = tempfile::tempdir().unwrap();
    let args: Vec<&str> = ["tech-sweep"].into_iter().chain(SMALL).collect();
    let out = imc(d.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pareto = read(d.path(), "pareto.csv");
    let header = pareto.lines().next().unwrap();
    assert!(header.starts_with("edap,cost,tech_nm,") && header.ends_with(",on_front"));
    assert!(pareto.lines().skip(1).any(|l| l.ends_with(",1")));
}

#[test]
fn experiment_file_with_flag_override() {
    let d = tempfile::tempdir().unwrap();
    let file = d.path().join("exp.json");
    std::fs::write(&file, r#"{"seed": 1, "pga": 6, "ph": 30, "pe": 12, "generations": 1, "aggregation": "mean"}"#).unwrap();
    let out = imc(d.path(), &["optimize", "--config", file.to_str().unwrap(), "--seed", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run: serde_json::Value = serde_json::from_str(&read(d.path(), "run.json")).unwrap();
    assert_eq!(run["config"]["seed"], 2);
    assert_eq!(run["config"]["sizes"]["p_ga"], 6);
}

#[test]
fn aggregation_study_and_repeat() {
    let d = tempfile::tempdir().unwrap();
    let args: Vec<&str> = ["aggregation-study", "--seeds", "2"].into_iter().chain(SMALL).collect();
    let out = imc(d.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let d = tempfile::tempdir().unwrap();
    let args: Vec<&str> = ["repeat", "-n", "3", "--strategy", "plain-ga"].into_iter().chain(SMALL).collect();
    let out = imc(d.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(d.path(), "repeat.csv");
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}
