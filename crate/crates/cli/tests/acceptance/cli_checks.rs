//! Contract checks of the command-line front end. Each panics on failure.

use std::path::PathBuf;
use std::process::{Command, Output};

fn quadtwist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadtwist"))
        .args(args)
        .output()
        .expect("spawn quadtwist")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quadtwist-cmd-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn coefficient_table_round_trips_through_a_file() {
    let dir = scratch("coeffs");
    let first = dir.join("c.csv");
    let second = dir.join("c2.csv");
    let o = quadtwist(&["coeffs", "--form", "x32", "--max-n", "1e5", "--out", first.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("coeffs: level=32 weight=2 max_n=100000"));
    let from_file = format!("file:{}", first.display());
    let o = quadtwist(&["coeffs", "--form", &from_file, "--out", second.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    // A loaded table recovers the root number and gives the same value.
    let generated = quadtwist(&["lvalue", "--form", "x32", "--d", "17", "--family-sign", "1"]);
    let loaded = quadtwist(&["lvalue", "--form", &from_file, "--d", "17", "--family-sign", "1"]);
    assert!(loaded.status.success(), "{}", String::from_utf8_lossy(&loaded.stderr));
    assert_eq!(stdout(&generated), stdout(&loaded));
    std::fs::remove_dir_all(&dir).unwrap();
}

pub fn exit_codes_follow_failure_kind() {
    assert_eq!(quadtwist(&["lvalue", "--form", "delta", "--d", "-5"]).status.code(), Some(1));
    assert_eq!(quadtwist(&["scan", "--x", "1e3"]).status.code(), Some(1));
    assert_eq!(quadtwist(&["frobnicate"]).status.code(), Some(1));
    // d = 5 is not a square mod 128.
    assert_eq!(quadtwist(&["lvalue", "--form", "x32", "--d", "-5"]).status.code(), Some(1));

    let guard = quadtwist(&["scan", "--x", "1e3", "--h", "10", "--hard-cap", "10"]);
    assert_eq!(guard.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&guard.stderr).contains("hard cap 10"));
    let threshold = quadtwist(&["moment", "--form", "delta", "--x", "1e3", "--h", "100", "--zero-threshold", "1e-30"]);
    assert_eq!(threshold.status.code(), Some(2));

    assert_eq!(quadtwist(&["lvalue", "--form", "file:/nonexistent/c.csv", "--d", "-7"]).status.code(), Some(3));
    assert_eq!(quadtwist(&["gaps", "--max-n", "100", "--out", "/nonexistent/dir/g.csv"]).status.code(), Some(3));
    assert_eq!(quadtwist(&["gaps", "--config", "/nonexistent/run.conf"]).status.code(), Some(3));
}

pub fn malformed_coefficient_file_is_io() {
    let dir = scratch("bad");
    let path = dir.join("bad.csv");
    std::fs::write(&path, "# level=32 weight=2 maxn=3 source=test\n1,1\n2,x\n3,0\n").unwrap();
    let o = quadtwist(&["lvalue", "--form", &format!("file:{}", path.display()), "--d", "-7"]);
    assert_eq!(o.status.code(), Some(3));
    std::fs::remove_dir_all(&dir).unwrap();
}

pub fn config_file_supplies_defaults_and_flags_win() {
    let dir = scratch("config");
    let conf = dir.join("run.conf");
    std::fs::write(&conf, "# scan window\nform = x32\nx = 500\nh = 100\nfamily-sign = 1\n").unwrap();
    let from_file = quadtwist(&["scan", "--config", conf.to_str().unwrap()]);
    assert!(from_file.status.success());
    let explicit = quadtwist(&["scan", "--form", "x32", "--x", "500", "--h", "100", "--family-sign", "1"]);
    assert_eq!(from_file.stdout, explicit.stdout);
    let narrowed = quadtwist(&["scan", "--config", conf.to_str().unwrap(), "--h", "10"]);
    assert!(stdout(&narrowed).lines().count() < stdout(&from_file).lines().count());
    std::fs::remove_dir_all(&dir).unwrap();
}

pub fn reports_are_well_formed() {
    let o = quadtwist(&["scan", "--form", "delta", "--x", "1e3", "--h", "50", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert!(doc["records"].as_array().unwrap().iter().all(|r| r["d"].as_i64().unwrap() > 0));

    let o = quadtwist(&["waldspurger", "--max-d", "300", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert!(doc["classes"].as_array().unwrap().iter().any(|c| c["verified"] == true));

    let o = quadtwist(&["gaps", "--max-n", "1000"]);
    let csv = stdout(&o);
    assert!(csv.starts_with("n,gap\n2,1\n4,5\n"));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("gaps: n_max=1000"));
}
