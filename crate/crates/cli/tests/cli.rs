use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_assoc-codes"))
        .args(args)
        .env_remove("ASSOC_CODES_CATALOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn scheme_verify_exit_codes() {
    let o = run(&["scheme", "cyclic:5", "--verify"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("2 classes (3 basis matrices)"));
    assert!(stdout(&o).contains("verify: pass"));

    let o = run(&["--json", "scheme", "u6n:2", "--verify"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valencies"].as_array().unwrap().len(), 6);
    assert_eq!(v["verification"]["checks"].as_array().unwrap().len(), 5);

    let o = run(&["scheme", "v8n:2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("odd"));
    assert_eq!(run(&["scheme", "nope:3"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn code_blocks() {
    let o = run(&["code", "cyclic:5", "--b1", "1", "--b2", "2", "--drop", "1", "--format", "pauli"]);
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    assert_eq!(lines, ["IXZZX", "XIXZZ", "ZXIXZ", "ZZXIX"]);

    let o = run(&["code", "cyclic:6", "--b1", "2,3", "--b2", "0,1,2", "--drop", "1"]);
    let lines: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    assert_eq!(lines, ["ZZYXYZ", "ZZZYXY", "YZZZYX", "XYZZZY", "YXYZZZ"]);

    let o = run(&["--json", "code", "u6n:2", "--b1", "2", "--b2", "3,5", "--drop", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((v["n"].as_u64(), v["k"].as_u64()), (Some(12), Some(4)));
    assert_eq!(v["pauli"][0], "IZIIXZZIXZZI");
}

#[test]
fn shorthand_selections() {
    let o = run(&[
        "code",
        "product:cyclic:2,cyclic:4",
        "--b1",
        "I_2A_2+XA_1",
        "--b2",
        "I_2A_1+XA_1+XA_2",
        "--drop",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("# [[8,2]]"));
}

#[test]
fn non_commuting_pair_is_an_assertion_failure() {
    let o = run(&["code", "cyclic:5", "--b1", "1", "--b2", "0"]);
    assert_eq!(o.status.code(), Some(0), "I and A_1 commute");
    let o = run(&["code", "cyclic:5", "--b1", "S", "--b2", "I_5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("anticommute") || !o.stderr.is_empty());
}

#[test]
fn distance_methods() {
    let o = run(&["--json", "distance", "cyclic:5", "--b1", "1", "--b2", "2", "--drop", "1", "--method", "oracle"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["certificate"]["kind"], "exact");
    assert_eq!(v["certificate"]["d"], 3);
    assert!(v["certificate"].get("elapsed_ms").is_none());

    let o = run(&["distance", "cyclic:13", "--b1", "1,3,4,5", "--b2", "2,3,5", "--method", "exact"]);
    assert!(stdout(&o).starts_with("[[13,1,5]] exact"));

    let o = run(&["distance", "cyclic:13", "--b1", "1,3,4,5", "--b2", "2,3,5", "--method", "bounded:4"]);
    assert!(stdout(&o).starts_with("[[13,1,≥5]] lower bound"));

    let o = run(&["--timing", "distance", "cyclic:5", "--b1", "1", "--b2", "2", "--drop", "1"]);
    assert!(stdout(&o).contains("elapsed_ms"));
    assert_eq!(run(&["distance", "cyclic:5", "--b1", "1", "--b2", "2", "--method", "fast"]).status.code(), Some(2));
}

#[test]
fn distance_from_pauli_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("five.txt");
    std::fs::write(&path, "# five-qubit code\nXZZXI\nIXZZX\nXIXZZ\nZXIXZ\n").unwrap();
    let o = run(&["distance", "--pauli", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("[[5,1,3]] exact"));
}

#[test]
fn json_output_is_byte_identical() {
    let args = ["--json", "search", "cyclic:5", "--min-d", "3"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let w = run(&["--json", "--workers", "1", "search", "cyclic:5", "--min-d", "3"]);
    assert_eq!(a.stdout, w.stdout);
}

#[test]
fn search_writes_catalog_and_query_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("codes.jsonl");
    let cat_s = cat.to_str().unwrap();
    let o = run(&["search", "cyclic:5", "--min-d", "3", "--catalog", cat_s]);
    assert!(o.status.success());
    let o = run(&["--json", "catalog", "--path", cat_s, "--n", "5", "--min-d", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let recs = v.as_array().unwrap();
    assert!(!recs.is_empty());
    assert!(recs.iter().any(|r| r["b1"] == serde_json::json!([1]) && r["b2"] == serde_json::json!([2])));

    let o = Command::new(env!("CARGO_BIN_EXE_assoc-codes"))
        .args(["catalog", "--k", "1"])
        .env("ASSOC_CODES_CATALOG", cat_s)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(run(&["catalog"]).status.code(), Some(2));
}

#[test]
fn search_rejects_zero_budget() {
    assert_eq!(run(&["search", "cyclic:5", "--budget", "0"]).status.code(), Some(2));
}

#[test]
fn reproduce_table_10() {
    let o = run(&["reproduce", "--table", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with(['U', 'T', 'V', 'D'])).count(), 14);
    assert!(text.contains("reproduced"));

    let o = run(&["--json", "reproduce", "--table", "4", "--rows", "C_21"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let drops: Vec<u64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["rows"]["drop_last"].as_u64().unwrap())
        .collect();
    assert_eq!(drops, [13, 10, 9, 5]);
    assert_eq!(run(&["reproduce", "--table", "3"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "--table", "4", "--rows", "C_21", "--strict"]).status.code(), Some(3));
}
