use std::process::{Command, Output};

use amzv::gf::Fq;
use amzv::shuffle::{LinComb, LinCombJson};
use serde_json::Value;

fn amzv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amzv")).args(args).env_remove("AMZV_BUDGET").output().expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

fn one(out: &Output) -> Value {
    let mut l = lines(out);
    assert_eq!(l.len(), 1, "{}", String::from_utf8_lossy(&out.stdout));
    l.pop().unwrap()
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).expect("error json");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn q3_shuffle_example() {
    let out = amzv(&["shuffle", "--q", "3", "--left", "2;1", "--right", "1,2;2,2"]);
    assert!(out.status.success());
    let v = one(&out);
    let fq = Fq::new(3, 1).unwrap();
    let j: LinCombJson = serde_json::from_value(v["lincomb"].clone()).unwrap();
    let combo = LinComb::from_json(&j, &fq).unwrap();
    let mut got: Vec<(String, u32)> =
        combo.terms().map(|(i, c)| (i.format(&fq, amzv::gf::EpsMode::Residue), c)).collect();
    got.sort();
    let mut want = vec![
        ("3,2;2,2".to_string(), 1),
        ("1,2,2;2,2,1".into(), 2),
        ("1,2,2;2,1,2".into(), 1),
        ("1,4;2,2".into(), 1),
        ("2,1,2;1,2,2".into(), 1),
    ];
    want.sort();
    assert_eq!(got, want);
    assert_eq!(combo.to_json(&fq, amzv::gf::EpsMode::Residue), j);
}

#[test]
fn two_by_one_uses_appendix_with_cross_check() {
    let v = one(&amzv(&["shuffle", "--q", "5", "--left", "2,1;3,1", "--right", "1;2"]));
    assert_eq!(v["engine"], "appendix_2x1");
    assert_eq!(v["cross_check"], "agree");
    assert_eq!(v["grading"], "ok");
}

#[test]
fn q5_verification_passes() {
    let out = amzv(&["verify-shuffle", "--q", "5", "--left", "2;3", "--right", "3;1", "--prec", "240"]);
    assert!(out.status.success());
    let v = one(&out);
    assert_eq!(v["result"], "PASS");
    assert!(v["residual_valuation"].as_i64().unwrap() >= 240);
}

#[test]
fn eval_leading_digit() {
    let v = one(&amzv(&["eval", "--q", "3", "--index", "1;1", "--prec", "24"]));
    assert_eq!(v["value"]["valuation"], 0);
    assert_eq!(v["value"]["digits"][0], 1);
    assert_eq!(v["certificate"]["valuation"], 0);
}

#[test]
fn every_line_carries_field_metadata() {
    let out = amzv(&["relations", "--q", "3", "--weight", "2", "--prec", "60", "--theta-span", "1"]);
    assert!(out.status.success());
    let ls = lines(&out);
    assert!(ls.len() > 1);
    assert_eq!(ls[0]["sound"], true);
    for l in &ls {
        assert_eq!(l["field"]["p"], 3);
        assert!(l["field"]["modulus"].is_array());
        assert!(l["field"]["generator"].is_number());
    }
    for l in &ls[1..] {
        assert!(l["relation"]["status"].is_string());
    }
}

#[test]
fn motive_commands() {
    let v = one(&amzv(&["motive-check", "--q", "3", "--prec", "240", "--index", "1;2", "--index", "2;1"]));
    assert_eq!(v["dim"], 4);
    assert_eq!(v["pass"], true);
    assert_eq!(v["field"]["M"], 2);
    let v = one(&amzv(&["motive-specialize", "--q", "3", "--prec", "240", "--index", "2,1;2,1"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["nonzero_entries"].as_array().unwrap().len(), 0);
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("amzv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ps.json");
    let out = amzv(&["powersum", "--degree", "1", "--s", "1", "--prec", "20", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(std::fs::read_to_string(&path).unwrap().trim()).unwrap();
    assert_eq!(v["degree"], 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    let out = amzv(&["eval", "--index", "1,2;2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");

    let out = amzv(&["--prec", "4", "eval", "--index", "1;1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = amzv(&["--q", "9", "--eps-mode", "residue", "eval", "--index", "1;g^1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = amzv(&["verify-shuffle", "--left", "1;1", "--right", "1;1", "--level", "sd"]);
    assert_eq!(out.status.code(), Some(2));

    let out = amzv(&["--budget", "2", "eval", "--index", "1;1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "compute");
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_amzv"))
        .args(["eval", "--index", "1;1"])
        .env("AMZV_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_subset() {
    let out = amzv(&["selftest", "1", "3"]);
    assert!(out.status.success());
    let ls = lines(&out);
    assert_eq!(ls.len(), 3);
    assert_eq!(ls[0]["id"], 1);
    assert_eq!(ls[2]["pass"], true);
    assert_eq!(amzv(&["selftest", "14"]).status.code(), Some(2));
}
