use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdvrecip")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_file(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("kdvrecip-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
    path
}

const KDV: &str = "t1_1: u1*u1_x + 1/12*eps^2*u1_xxx\n\
                   t1_2: 1/2*u1^2*u1[1] + 1/6*eps^2*u1[1]*u1[2] + 1/12*eps^2*u1*u1[3] + 1/240*eps^4*u1[5]\n";

#[test]
fn kdv_densities() {
    let o = run(&["kdv", "--d", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1/2*u1^2 + 1/12*eps^2*u1[2]");
}

#[test]
fn verify_theorem_exit_codes() {
    let o = run(&["verify-theorem", "--dmax", "0", "--eps", "2", "--deg", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify-theorem", "--dmax", "1", "--eps", "2", "--deg", "6", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 8);
}

#[test]
fn commute_and_conslaw() {
    let sys = temp_file("kdv.sys", KDV);
    let s = sys.to_str().unwrap();
    assert_eq!(run(&["commute", "--file", s, "t1_1", "t1_2"]).status.code(), Some(0));
    let mutated = temp_file("kdv-bad.sys", &KDV.replace("1/240", "1/120"));
    let o = run(&["commute", "--file", mutated.to_str().unwrap(), "t1_1", "t1_2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());

    assert_eq!(run(&["conslaw", "--file", s, "--expr", "u1^2"]).status.code(), Some(0));
    let o = run(&["conslaw", "--file", s, "--expr", "u1_x^2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not a conservation-law witness"));
}

#[test]
fn transforms_and_solutions() {
    let sys = temp_file("kdv1.sys", "t1_1: u1*u1_x + 1/12*eps^2*u1_xxx\n");
    let s = sys.to_str().unwrap();
    let o = run(&["recip-apply", "--f", "xi*u1", "--file", s]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("t1_1: v1*v1[1] + 1/2*xi*v1^2*v1[1]"));
    let map = temp_file("map", "u1 + u1^2\n");
    assert_eq!(run(&["miura-apply", "--map", map.to_str().unwrap(), "--file", s]).status.code(), Some(0));
    let init = temp_file("init", "x\n");
    let o = run(&["transport-solution", "--f", "xi*u1", "--file", s, "--init", init.to_str().unwrap(), "--deg", "6"]);
    assert_eq!(o.status.code(), Some(0));
    // u1_x is not of differential degree 0.
    let o = run(&["recip-apply", "--f", "u1_x", "--file", s]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_and_parse_errors() {
    assert_eq!(run(&["kdv"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let bad = temp_file("bad.sys", "t1_1: u1 +\n");
    let o = run(&["commute", "--file", bad.to_str().unwrap(), "t1_1", "t1_1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:"));
}
