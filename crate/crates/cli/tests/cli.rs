use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solvfill"))
        .args(args)
        .env_remove("SOLVFILL_GUARDS")
        .output()
        .expect("binary runs")
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("report is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("solvfill-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn analyze_reports_are_byte_identical() {
    let a = run(&["analyze", "preset:heisenberg-tame"]);
    let b = run(&["analyze", "preset:heisenberg-tame"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema"], "solvfill-report/1");
    assert_eq!(v["result"]["h2"]["dim"], 2);
    assert_eq!(v["result"]["kill"]["dim"], 3);
}

#[test]
fn certify_verdicts_and_sol_branch_switch() {
    assert_eq!(json(&run(&["certify", "sol"]))["result"]["verdict"], "NotL1C-Sol");
    let off = json(&run(&["certify", "preset:heisenberg-mixed", "--no-sol-branch"]));
    assert_eq!(off["result"]["verdict"], "Inconclusive");
    assert_eq!(off["result"]["replay"], "ok");
    let env = Command::new(env!("CARGO_BIN_EXE_solvfill"))
        .args(["certify", "preset:heisenberg-mixed"])
        .env("SOLVFILL_GUARDS", "sol_branch=0")
        .output()
        .unwrap();
    assert_eq!(json(&env)["result"]["verdict"], "Inconclusive");
}

#[test]
fn spec_files_load_from_disk() {
    let dir = scratch("spec");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("sol.json");
    std::fs::write(&p, r#"{"dim":2,"labels":["x","y"],"brackets":[],"derivations":[[["-1","0"],["0","1"]]]}"#).unwrap();
    let v = json(&run(&["certify", p.to_str().unwrap()]));
    assert_eq!(v["result"]["verdict"], "NotL1C-Sol");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "preset:nope"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "/no/such/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["fill", "sol", "--word", "u:1"]).status.code(), Some(2));
    // a relation word needs a tame group
    assert_eq!(run(&["fill", "sol", "--word", "relation:16"]).status.code(), Some(3));
    // not a loop
    assert_eq!(run(&["fill", "heisenberg-tame", "--word", "u:1,0,0"]).status.code(), Some(3));
    assert_eq!(run(&["render", "sol", "--template", "web", "--eps", "2"]).status.code(), Some(2));
}

#[test]
fn fill_writes_report_and_artifact() {
    let dir = scratch("fill");
    let o = run(&[
        "fill",
        "preset:heisenberg-tame",
        "--word",
        "backtrack:u:1,0,0 a:1 u:0,1,0",
        "--grid",
        "64",
        "--format",
        "csv",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["pipeline"], "backtrack");
    let lo = v["result"]["fill_lip"]["lower"].as_f64().unwrap();
    let hi = v["result"]["fill_lip"]["upper"].as_f64().unwrap();
    assert!(lo > 0.0 && lo <= hi);
    assert!(v["result"]["ratio"].as_f64().unwrap() <= 1.05);
    let csv = std::fs::read_to_string(dir.join("cells.csv")).unwrap();
    assert_eq!(csv.lines().count(), 64 * 64 + 1);
}

#[test]
fn tame_fill_has_a_ratio_table() {
    let v = json(&run(&["fill", "heisenberg-tame", "--word", "triple:1|3,0,5;-1|1,2,0", "--grid", "32", "--max-grid", "64"]));
    assert_eq!(v["result"]["pipeline"], "tame");
    assert_eq!(v["result"]["ratio_table"].as_array().unwrap().len(), 4);
}

#[test]
fn probe_defaults_follow_the_verdict() {
    let v = json(&run(&["probe", "abelian3-rank2", "--grid", "64"]));
    assert_eq!(v["result"]["family"]["kind"], "circles");
    assert_eq!(v["result"]["drift"], false);
    let s = json(&run(&["probe", "sol", "--family", "commutators:1,2,3", "--grid", "64"]));
    assert_eq!(s["result"]["drift"], true);
}

#[test]
fn render_template_svg() {
    let o = run(&["render", "sol", "--template", "sun", "--eps", "0.25", "--format", "svg"]);
    assert!(o.status.success());
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polygon"));
    let dir = scratch("render");
    let o = run(&["render", "sol", "--template", "web", "--eps", "0.5", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["summary"]["distortion"]["violations"], 0);
    assert!(dir.join("template.json").exists());
}
