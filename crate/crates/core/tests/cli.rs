use std::path::Path;
use std::process::Command;

use garchpd::cli::run;
use serde_json::Value;

fn garchpd(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("garchpd").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn params(name: &str) -> String {
    format!("{}/params/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

/// CSV rows without the commented header, split into cells.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_garchpd");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["var", "--p", "0.05"]), Some(0));
    assert_eq!(code(&["--bogus"]), Some(1));
    assert_eq!(code(&["var", "--p", "0.7"]), Some(1));
    assert_eq!(code(&["var", "--h", "13"]), Some(2));
}

#[test]
fn exit_codes_in_process() {
    assert_eq!(garchpd(&["--help"]).0, 0);
    assert_eq!(garchpd(&["density", "--points", "x"]).0, 1);
    assert_eq!(garchpd(&["tail-index", "--alpha", "0.1"]).0, 1);
    assert_eq!(garchpd(&["moments", "--params", "/no/such/file.json"]).0, 1);
    assert_eq!(garchpd(&["moments", "--params", r#"{"omega":1,"alpha":0.1,"beta":0.8,"gamma":1}"#]).0, 1);
    assert_eq!(garchpd(&["cdf", "--at", "0", "--h", "13"]).0, 2);
}

#[test]
fn invalid_horizon_only_warns() {
    let p = r#"{"omega":0.5,"alpha":0.1,"beta":0.2,"sigma1_sq":0.6}"#;
    let (code, out, err) = garchpd(&["var", "--h", "3", "--params", p]);
    assert_eq!(code, 0);
    assert!(err.contains("warning: validity"));
    assert!(out.contains("# validity: invalid"));
}

#[test]
fn risk_table_reproduces_the_linton_rows() {
    let (code, out, _) = garchpd(&["risk-table"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0][..3], ["p", "var", "iterations"]);
    let var: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    for (v, want) in var.iter().zip([1.6415, 1.9635, 2.3443, 2.6092]) {
        assert!((v - want).abs() < 5e-4);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["density", "--h", "3", "--points", "41"],
        vec!["mc-compare", "--R", "100000", "--seed", "9"],
        vec!["mc-plan"],
        vec!["level-grid"],
    ] {
        let mut files = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{}-{k}.csv", args[0]));
            let path_s = path.to_str().unwrap().to_owned();
            let set = params_fig3_if(args[0]);
            let mut full = args.clone();
            full.extend(["--params", &set, "--out", &path_s]);
            assert_eq!(garchpd(&full).0, 0, "{full:?}");
            files.push(std::fs::read(&path).unwrap());
        }
        assert!(!files[0].is_empty());
        assert_eq!(files[0], files[1], "{args:?}");
    }
}

fn params_fig3_if(cmd: &str) -> String {
    if cmd == "level-grid" || cmd == "mc-plan" {
        params("linton")
    } else {
        params("fig3")
    }
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    for cmd in [vec!["risk-table"], vec!["cdf", "--at", "-2,0,1.5", "--h", "3"], vec!["tail-index"]] {
        let (_, csv, _) = garchpd(&cmd);
        let mut j = cmd.clone();
        j.extend(["--format", "json"]);
        let (_, json, _) = garchpd(&j);
        let doc: Value = serde_json::from_str(&json).unwrap();
        let rows = csv_rows(&csv);
        let header = &rows[0];
        let jrows = doc["rows"].as_array().unwrap();
        assert_eq!(jrows.len(), rows.len() - 1);
        for (r, jr) in rows[1..].iter().zip(jrows) {
            for (col, cell) in header.iter().zip(r) {
                let jv = &jr[col.as_str()];
                match cell.parse::<f64>() {
                    Ok(x) => assert_eq!(x.to_bits(), jv.as_f64().unwrap().to_bits(), "{cmd:?} {col}"),
                    Err(_) => assert_eq!(jv.as_str().unwrap(), cell),
                }
            }
        }
    }
}

#[test]
fn coefficient_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("fig3-h3.json");
    let t = table.to_str().unwrap();
    let (code, summary, _) = garchpd(&["coeff-cache", "build", "--h", "3", "--params", &params("fig3"), "--out", t]);
    assert_eq!(code, 0);
    assert!(Path::new(t).exists() && !summary.is_empty());
    let (code, inspect, _) = garchpd(&["coeff-cache", "inspect", t]);
    assert_eq!(code, 0);
    assert!(inspect.contains("j_max"));

    let fresh = garchpd(&["cdf", "--at", "-3,-1,0,2", "--h", "3", "--params", &params("fig3")]);
    let cached = garchpd(&["cdf", "--at", "-3,-1,0,2", "--table", t]);
    assert_eq!(cached.0, 0);
    assert_eq!(csv_rows(&fresh.1), csv_rows(&cached.1));
}

#[test]
fn mc_compare_reports_agreement() {
    let (code, out, _) = garchpd(&["mc-compare", "--R", "200000", "--h", "3", "--params", &params("fig3"), "--format", "json"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["meta"]["cdf_within_band"], Value::Bool(true));
    assert_eq!(doc["meta"]["moments_within_4se"], Value::Bool(true));
}
