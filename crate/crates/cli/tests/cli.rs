use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heilbronn")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn solve_five_points_closes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.json");
    let trace = dir.path().join("trace.csv");
    let o = run(&[
        "solve", "--n", "5", "--model", "final", "--eps", "1e-6", "--out", out.to_str().unwrap(), "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(&out);
    let z = v["z_lb"].as_f64().unwrap();
    assert!((z - 0.1924500897).abs() < 1e-5);
    assert!(v["gap"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["termination"], "gap-closed");
    assert_eq!(v["structure"]["critical"].as_array().unwrap().len(), 4);
    assert_eq!(v["coordinates"].as_array().unwrap().len(), 5);
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("wall_time,nodes,z_lb,z_ub"));
}

#[test]
fn solution_json_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.json");
    assert_eq!(code(&run(&["solve", "--n", "5", "--out", out.to_str().unwrap()])), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
    assert_eq!(again, text);
    // the written solution is accepted as a warm start
    let o = run(&["solve", "--n", "5", "--warm-start", out.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let w = read(&out);
    assert!(w["z_lb"].as_f64().unwrap() >= v["z_lb"].as_f64().unwrap());
}

#[test]
fn limits_give_exit_two_and_still_write() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.json");
    let o = run(&["solve", "--n", "6", "--model", "baseline", "--node-limit", "3", "--starts", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let v = read(&out);
    assert_eq!(v["termination"], "node-limit");
    assert!(v.get("structure").is_none());
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(code(&run(&["solve", "--n", "99", "--model", "final", "--eps", "0"])), 1);
    assert_eq!(code(&run(&["solve", "--n", "5", "--eps", "0"])), 1);
    assert_eq!(code(&run(&["solve", "--n", "5", "--model", "clever"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["verify"])), 1);
    assert_eq!(code(&run(&["verify", "--n", "17"])), 1);
    assert_eq!(code(&run(&["bounds", "--range", "2:16"])), 1);
    assert_eq!(code(&run(&["bounds", "--range", "3-16"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn verify_corpus_entries() {
    let o = run(&["verify", "--n", "9"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS"));
    let o = run(&["verify", "--n", "11"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("(rat 1 27)"));
    assert_eq!(code(&run(&["verify", "--n", "14"])), 0);
}

#[test]
fn tampered_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("corpus.json");
    assert_eq!(code(&run(&["corpus", "--out", c.to_str().unwrap()])), 0);
    let all = read(&c);
    let mut n9 = all.as_array().unwrap().iter().find(|e| e["n"] == 9).unwrap().clone();
    let good = dir.path().join("n9.json");
    std::fs::write(&good, n9.to_string()).unwrap();
    assert_eq!(code(&run(&["verify", "--file", good.to_str().unwrap()])), 0);

    n9["exact"][2][1] = Value::String("(add (rat 19 166) (mul (rat 3 166) (sqrt 65)))".into());
    let bad = dir.path().join("tampered_n9.json");
    std::fs::write(&bad, n9.to_string()).unwrap();
    let o = run(&["verify", "--file", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("nonzero"), "{}", stdout(&o));

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"exact\": [[\"(rat 1\", \"0\"]]}").unwrap();
    assert_eq!(code(&run(&["verify", "--file", junk.to_str().unwrap()])), 1);
}

#[test]
fn bounds_tables_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg) = (dir.path().join("b.csv"), dir.path().join("b.svg"));
    let o = run(&["bounds", "--range", "3:16", "--csv", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 15);
    assert!(text.lines().nth(9).unwrap().starts_with("11,0.037037"));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn erdos_guarantee_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    assert_eq!(code(&run(&["erdos", "--n", "5", "--out", out.to_str().unwrap()])), 0);
    let v = read(&out);
    assert_eq!(v["guarantee"], "1/50");
    assert_eq!(v["p"], 5);
    assert_eq!(v["points"].as_array().unwrap().len(), 5);
}

#[test]
fn report_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg) = (dir.path().join("c.csv"), dir.path().join("d.svg"));
    let o = run(&["report", "--n", "5", "--csv", csv.to_str().unwrap(), "--degeneracy-svg", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("0.19245008") && rows[0].ends_with(",4,true"));
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("crimson\"/>").count(), 4);

    let o = run(&["report", "--n", "8", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",12,true"));
    let total: usize = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 56);
}
