use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

const BIG: &str = "1000000000000000177";

fn esd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esd")).args(args).env_remove("ESD_BUDGET").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("esd-cli-{}-{name}", std::process::id()));
    std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
    p
}

#[test]
fn solve_exit_codes() {
    let o = esd(&["solve", "2521"]);
    assert_eq!(code(&o), 0);
    let recs = json_lines(&o);
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["strategy"], "ed2");
    assert_eq!(code(&esd(&["solve", "7"])), 0);
    assert_eq!(code(&esd(&["solve", "4"])), 64);
    assert_eq!(code(&esd(&["solve", "x"])), 64);
    assert_eq!(code(&esd(&["frobnicate"])), 64);
    assert_eq!(code(&esd(&["--help"])), 0);
    assert_eq!(code(&esd(&["solve", "7", "--strategy", "bogus"])), 64);
}

#[test]
fn strategy_override_and_budget() {
    let o = esd(&["solve", "29", "--strategy", "direct", "--alpha", "1"]);
    assert_eq!(code(&o), 0);
    assert!(json_lines(&o).iter().all(|r| r["strategy"] == "direct"));

    let args = ["solve", BIG, "--strategy", "ed2", "--delta-max", "6", "--budget", "1"];
    assert_eq!(code(&esd(&args)), 4);
    let o = Command::new(env!("CARGO_BIN_EXE_esd")).args(args).env("ESD_BUDGET", "1000000").output().unwrap();
    assert_eq!(code(&o), 0);

    let o = esd(&["solve", "1000000000000000009", "--strategy", "ed2", "--delta-max", "1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn tables_match_golden() {
    let o = esd(&["table", "1", "2521"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("table1_p2521.csv"));
    assert_eq!(stdout(&esd(&["table", "2", "2521"])), golden("table2_p2521.csv"));
    assert_eq!(stdout(&esd(&["table", "2", "3529"])), golden("table2_p3529.csv"));
    let small = stdout(&esd(&["table", "2", "29"]));
    assert!(small.lines().any(|l| l.starts_with("2,1,2,4,2,4,8,4,")), "{small}");
    assert_eq!(code(&esd(&["table", "3", "29"])), 64);
}

#[test]
fn verify_roundtrip() {
    let o = esd(&["sweep", "5", "60"]);
    assert_eq!(code(&o), 0);
    let body = stdout(&o);
    let good = tmp("good.jsonl", &body);
    let v = esd(&["verify", good.to_str().unwrap()]);
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).contains("failed=0"));

    let mut lines: Vec<String> = body.lines().map(String::from).collect();
    let mut rec: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    let c: u128 = rec["c"].as_str().unwrap().parse().unwrap();
    rec["c"] = serde_json::Value::String((c + 1).to_string());
    lines[1] = rec.to_string();
    let bad = tmp("bad.jsonl", &(lines.join("\n") + "\n"));
    let v = esd(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&v), 2);
    assert!(stdout(&v).contains("line 2:"));

    let empty = tmp("empty.jsonl", "");
    let v = esd(&["verify", empty.to_str().unwrap()]);
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).contains("records=0"));

    let mut child = Command::new(env!("CARGO_BIN_EXE_esd"))
        .args(["verify", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(body.as_bytes()).unwrap();
    assert_eq!(child.wait_with_output().unwrap().status.code(), Some(0));

    for p in [good, bad, empty] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn sweep_is_deterministic_across_workers() {
    let one = esd(&["sweep", "5", "300", "--workers", "1"]);
    let three = esd(&["sweep", "5", "300", "--workers", "3"]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, three.stdout);

    let single = esd(&["sweep", "2521", "2521", "--format", "csv"]);
    let out = stdout(&single);
    assert_eq!(out.lines().next(), Some("P,A,B,C,method,strategy"));
    assert!(out.lines().skip(1).all(|l| l.starts_with("2521,")));

    let empty = esd(&["sweep", "10", "3"]);
    assert_eq!(code(&empty), 0);
    assert!(stdout(&empty).is_empty());

    let ones = esd(&["sweep", "5", "100", "--mod4", "1", "--format", "csv"]);
    for l in stdout(&ones).lines().skip(1) {
        let p: u64 = l.split(',').next().unwrap().parse().unwrap();
        assert_eq!(p % 4, 1);
    }
}

#[test]
fn density_and_hitbox() {
    let o = esd(&["density", "--moduli", "3,3,3", "--t", "30"]);
    assert_eq!(stdout(&o), "T,exact,predicted,abs_error\n30,1000,1000,0\n");
    let o = esd(&["density", "--moduli", "5,1,1", "--t", "7"]);
    assert!(stdout(&o).contains("7,49,343/5,98/5"));
    assert_eq!(code(&esd(&["density", "--moduli", "0,1", "--t", "3"])), 64);

    let o = esd(&["hitbox", "--trials", "50"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout(&o).lines().count(), 51);
}

#[test]
fn convolution_verbs() {
    let o = esd(&["convolve", "2521", "11", "22", "319"]);
    assert_eq!(code(&o), 0);
    let r = &json_lines(&o)[0];
    assert_eq!(r["rejection"], "P''_not_prime");
    assert_eq!(r["p_second"], "425");
    let o = esd(&["convolve", "2521", "11", "22", "319", "--policy", "canonical"]);
    assert_eq!(json_lines(&o)[0]["rejection"], "congruence_failure");
    assert_eq!(code(&esd(&["convolve", "2521", "11", "22", "320"])), 2);

    let o = esd(&["convolve", "3529"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 17);

    let o = esd(&["anticonvolve", "7", "5", "9", "1", "81", "--m", "11", "--o", "13"]);
    assert_eq!(code(&o), 0);
    let r = &json_lines(&o)[0];
    assert_eq!(r["a_residue"], "2");
    assert_eq!(r["modulus"], "143");
    assert_eq!(code(&esd(&["anticonvolve", "13", "3", "10", "2", "50", "--m", "5", "--o", "7"])), 64);
}

#[test]
fn search_verbs() {
    let o = esd(&["direct", "5", "--r-max", "1", "--s-max", "1", "--alpha", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_lines(&o)[0]["a"], "2");

    let o = esd(&["back", "29", "8"]);
    assert_eq!(code(&o), 0);
    let recs = json_lines(&o);
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|r| r["a"] == "8" && r["method"] == "BACK"));
    assert_eq!(code(&esd(&["back", "29", "7"])), 64);

    let o = esd(&["ed1", "13", "--gamma-max", "3"]);
    assert_eq!(json_lines(&o).len(), 2);

    let o = esd(&["ed2", "29", "--delta-max", "10"]);
    let first = &json_lines(&o)[0];
    assert_eq!((first["a"].as_str(), first["b"].as_str(), first["c"].as_str()), (Some("10"), Some("29"), Some("290")));
    let csv = stdout(&esd(&["ed2", "29", "--delta-max", "10", "--format", "csv"]));
    assert!(csv.starts_with("#,alpha,"));
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("esd-cli-{}-out.csv", std::process::id()));
    let o = esd(&["table", "2", "2521", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden("table2_p2521.csv"));
    let _ = std::fs::remove_file(path);
    assert_eq!(code(&esd(&["table", "2", "29", "--out", "/nonexistent/dir/x.csv"])), 1);
}
