//! End-to-end runs of the `workcell` binary on the bundled scenarios.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use workcell::cloud::ply::read_ply;
use workcell::planning::{parse_domain, parse_problem, read_plan, validate};

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn scenario(name: &str) -> PathBuf {
    repo("scenarios").join(name)
}

fn pddl(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/pddl").join(name)
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_workcell")).args(args.iter().map(|a| a.as_ref())).output().unwrap()
}

fn summary(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn error(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(1), "stdout: {}", String::from_utf8_lossy(&o.stdout));
    serde_json::from_slice(&o.stderr).unwrap()
}

#[test]
fn generated_cloud_perceives_like_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    summary(&run(&[&"gen", &"--kind", &"workstation", &"--scenario", &scenario("workstation.json"), &"--out", &out]));
    let cloud = read_ply(&std::fs::read_to_string(out.join("cloud.ply")).unwrap()).unwrap();
    let truth: Value = serde_json::from_str(&std::fs::read_to_string(out.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["labels"].as_array().unwrap().len(), cloud.len());

    let a = out.join("a.json");
    let b = out.join("b.json");
    let from_scenario = summary(&run(&[&"perceive", &"--scenario", &scenario("workstation.json"), &"--out", &a]));
    summary(&run(&[&"perceive", &"--cloud", &out.join("cloud.ply"), &"--out", &b]));
    let (a, b): (Value, Value) = (
        serde_json::from_str(&std::fs::read_to_string(a).unwrap()).unwrap(),
        serde_json::from_str(&std::fs::read_to_string(b).unwrap()).unwrap(),
    );
    assert_eq!(a["objects"].as_array().unwrap().len(), 3);
    assert_eq!(a["objects"], b["objects"]);
    assert!(from_scenario.to_string().contains("cluster_purity"));
}

#[test]
fn covered_table_has_no_free_space() {
    let dir = tempfile::tempdir().unwrap();
    let e =
        error(&run(&[&"place", &"--scenario", &scenario("covered-table.json"), &"--out", &dir.path().join("p.json")]));
    assert_eq!(e["error"], "placement");
    assert!(!dir.path().join("p.json").exists());
}

#[test]
fn placements_are_ranked_and_on_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    summary(&run(&[&"place", &"--scenario", &scenario("workstation.json"), &"--out", &out]));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let list = v["placements"].as_array().unwrap();
    assert!(!list.is_empty());
    let scores: Vec<f64> = list.iter().map(|p| p["reach_score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    for p in list {
        let z = p["pose"]["position"][2].as_f64().unwrap();
        assert!((z - 0.7).abs() < 0.01, "placement height {z}");
    }
}

#[test]
fn plan_file_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.txt");
    let (d, p) = (pddl("transport-domain.pddl"), pddl("transport-3.pddl"));
    let s = summary(&run(&[&"plan", &"--domain", &d, &"--problem", &p, &"--mode", &"optimal", &"--out", &out]));
    assert_eq!(s["cost"], 18.0);
    let domain = parse_domain(&std::fs::read_to_string(&d).unwrap()).unwrap();
    let problem = parse_problem(&std::fs::read_to_string(&p).unwrap(), &domain).unwrap();
    let steps = read_plan(&std::fs::read_to_string(out).unwrap()).unwrap();
    let v = validate(&domain, &problem, &steps);
    assert!(v.valid);
    assert_eq!(v.cost, 18.0);
}

#[test]
fn exec_trace_records_the_replan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.jsonl");
    let (d, p) = (pddl("transport-domain.pddl"), pddl("transport-3.pddl"));
    let s = summary(&run(&[
        &"exec",
        &"--domain",
        &d,
        &"--problem",
        &p,
        &"--faults",
        &scenario("faults.json"),
        &"--out",
        &out,
    ]));
    assert_eq!(s["outcome"], "Success");
    assert_eq!(s["replans"], 1);
    let records: Vec<Value> =
        std::fs::read_to_string(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records[2]["status"], "e_failure");
    assert!(records.iter().all(|r| r["kb"].as_array().unwrap().len() as u64 == r["kb_size"].as_u64().unwrap()));
}

#[test]
fn rtt_and_dwa_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = dir.path().join("m.csv");
    summary(&run(&[&"rtt", &"--scenario", &scenario("rtt.json"), &"--tracker", &"sort", &"--out", &metrics]));
    let text = std::fs::read_to_string(metrics).unwrap();
    assert!(text.starts_with("metric,value\n"));
    assert!(text.lines().any(|l| l == "id_switches,0"));

    let poses = dir.path().join("poses.csv");
    let s = summary(&run(&[
        &"dwa",
        &"--map",
        &scenario("lab.pgm"),
        &"--scenario",
        &scenario("lab-episode.json"),
        &"--out",
        &poses,
    ]));
    assert_eq!(s["outcome"], "Reached");
    let text = std::fs::read_to_string(poses).unwrap();
    assert!(text.starts_with("step,t,x,y,theta,vx,vy,omega\n"));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(run(&[&"teleport"]).status.code(), Some(2));
    assert_eq!(run(&[&"rtt", &"--scenario", &scenario("rtt.json")]).status.code(), Some(2));
    let e = error(&run(&[&"perceive", &"--scenario", &"missing.json", &"--out", &"x.json"]));
    assert_eq!(e["error"], "io");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"table": {"size": [1, 1], "height": 0.7}, "colour": "red"}"#).unwrap();
    let e = error(&run(&[&"perceive", &"--scenario", &bad, &"--out", &dir.path().join("x.json")]));
    assert_eq!(e["error"], "input");
}
