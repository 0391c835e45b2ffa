use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");

fn fixture(name: &str) -> PathBuf {
    Path::new(FIXTURES).join(name)
}

fn rrv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrv")).args(args).current_dir(dir).output().unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = rrv(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn worked(dir: &Path) -> String {
    let p = dir.join("worked.inst");
    fs::copy(fixture("worked_example.inst"), &p).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn plan_reproduces_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let inst = worked(dir.path());
    let out = ok(&["plan", &inst, "-o", "w.plan", "--seed", "1"], dir.path());
    assert!(out.starts_with("beta 11.8\n"), "{out}");
    let plan = fs::read_to_string(dir.path().join("w.plan")).unwrap();
    assert!(plan == "V1: (1 3 5)(5 7 8 5)\n" || plan == "V1: (1 3 5)(5 8 7 5)\n", "{plan}");
}

#[test]
fn depot_table_cache_is_written_then_reused() {
    let dir = tempfile::tempdir().unwrap();
    let inst = worked(dir.path());
    let args = ["plan", &inst, "-o", "a.plan", "--seed", "4", "--depot-table", "table.txt"];
    let first = ok(&args, dir.path());
    assert!(dir.path().join("table.txt").exists());
    let second = ok(&args, dir.path());
    assert_eq!(first, second);
}

#[test]
fn convert_plan_scenarios_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let carp = fixture("toy.dat");
    let out = ok(&["convert", carp.to_str().unwrap(), "-o", "toy.inst", "--seed", "7"], d);
    assert!(out.starts_with("toy: 7 nodes, 11 edges"), "{out}");
    ok(&["plan", "toy.inst", "-o", "toy.plan", "--seed", "2", "--restarts", "3"], d);
    ok(&["gen-scenarios", "toy.inst", "toy.plan", "-o", "toy.scen", "--seed", "4"], d);
    ok(&["simulate", "toy.inst", "toy.plan", "toy.scen", "-o", "report.json", "--plans-out", "final.txt"], d);
    let report: Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    let runs = report.as_array().unwrap();
    assert!(!runs.is_empty());
    assert!(runs.iter().all(|r| r["covered"] == Value::Bool(true)));
    assert!(fs::read_to_string(d.join("final.txt")).unwrap().starts_with("# toy-s"));
}

#[test]
fn wait_modes_batch_differently() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // three vehicles from depot 1, each serving one spoke
    fs::write(
        d.join("star.inst"),
        "NAME star\nNODES 4\nDEPOTS 1\nEDGES 3\n1 2 2\n1 3 2\n1 4 2\nREQUIRED 3\n1 2\n1 3\n1 4\n\
         VEHICLES 3\nCAPACITY 5\nRECHARGE 1\n",
    )
    .unwrap();
    fs::write(d.join("star.plan"), "V1: (1 2 1)\nV2: (1 3 1)\nV3: (1 4 1)\n").unwrap();
    fs::write(d.join("two.scen"), "SCENARIO two\nFAILURES 2\n1 1\n2 3\n").unwrap();
    let run = |wait: &str| -> Value {
        let out = ok(&["simulate", "star.inst", "star.plan", "two.scen", "--wait", wait], d);
        serde_json::from_str::<Value>(&out).unwrap()[0].clone()
    };
    let now = run("0");
    let end = run("end");
    assert_eq!(now["auctions"], 2);
    assert_eq!(now["pool_trigger_events"], 2);
    assert_eq!(end["auctions"], 1);
    assert_eq!(now["covered"], true);
    assert_eq!(end["covered"], true);
    // the survivor serves all three spokes: 4 + 1 + 4 + 1 + 4
    assert_eq!(end["beta_ca"], 14.0);
}

#[test]
fn replanned_scenarios_write_their_plans() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let carp = fixture("toy.dat");
    ok(&["convert", carp.to_str().unwrap(), "-o", "toy.inst", "--seed", "7"], d);
    ok(&["plan", "toy.inst", "-o", "toy.plan", "--seed", "2"], d);
    ok(&["gen-scenarios", "toy.inst", "toy.plan", "-o", "s.scen", "--seed", "4", "--replan", "--sa-seed", "9"], d);
    assert!(d.join("s-toy-s1.plan").exists());
}

#[test]
fn oracle_and_milp_on_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let inst = worked(dir.path());
    let out = ok(&["oracle", &inst], dir.path());
    assert!(out.contains("BETA 11.8\n"), "{out}");
    let out = ok(&["emit-milp", &inst, "-o", "w.lp"], dir.path());
    assert!(out.contains("binaries"));
    let lp = fs::read_to_string(dir.path().join("w.lp")).unwrap();
    assert!(lp.contains("Minimize") && lp.trim_end().ends_with("End"));
}

#[test]
fn milp_size_gate_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("NODES 14\nDEPOTS 1\nEDGES 13\n");
    for v in 2..=14 {
        text.push_str(&format!("1 {v} 1\n"));
    }
    text.push_str("REQUIRED 1\n1 2\nVEHICLES 1\nCAPACITY 4\nRECHARGE 1\n");
    fs::write(dir.path().join("big.inst"), text).unwrap();
    let out = rrv(&["emit-milp", "big.inst", "-o", "big.lp"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn metrics_check_accepts_the_table_and_flags_edits() {
    let dir = tempfile::tempdir().unwrap();
    let table = fixture("gdb_table.csv");
    let out = ok(&["metrics", table.to_str().unwrap(), "--check"], dir.path());
    assert!(out.lines().any(|l| l.starts_with("gdb.1,") && l.contains(",69.59,") && l.contains(",145.95,1.45,")));

    let edited = fs::read_to_string(&table).unwrap().replace(",69.59,", ",70.59,");
    fs::write(dir.path().join("bad.csv"), edited).unwrap();
    let out = rrv(&["metrics", "bad.csv", "--check"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gdb.1"));
}

#[test]
fn bench_reports_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let inst = worked(dir.path());
    ok(&["bench", &inst, "--seed", "1", "-o", "b.csv"], dir.path());
    let csv = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |n: &str| header.iter().position(|h| *h == n).unwrap();
    assert_eq!(row[col("beta_sa")], "11.8");
    assert_eq!(row[col("beta_opt")], "11.8");
    assert_eq!(row[col("et_sa")], "-");
}

#[test]
fn errors_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = rrv(&["plan", "missing.inst", "-o", "x", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.inst"));
    assert_eq!(rrv(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(rrv(&["bench", "--seed", "1", "-o", "x.csv"], dir.path()).status.code(), Some(1));
}
