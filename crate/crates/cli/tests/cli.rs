use std::process::{Command, Output};

use drinfeld::{parse_budget, parse_config, strip_timing};
use serde_json::Value;

fn drinfeld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drinfeld")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn statuses(doc: &Value) -> Vec<(String, String)> {
    doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["check_id"].as_str().unwrap().to_string(), r["status"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn verify_all_over_f2_passes() {
    let out = drinfeld(&["verify", "all", "--q", "2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc = json(&out);
    assert_eq!(doc["schema"], 1);
    let ids: Vec<String> = statuses(&doc).into_iter().map(|(id, _)| id).collect();
    assert!(!ids.contains(&"cremona.proj-equal".to_string()));
    assert_eq!(ids.len(), 29);
}

#[test]
fn psi_squared_for_n3() {
    let out = drinfeld(&["verify", "psi-squared", "--q", "2", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(statuses(&json(&out)), vec![("cremona.psi-squared".into(), "PASS".into())]);
}

#[test]
fn splitting_over_f2_is_a_none_witness() {
    let out = drinfeld(&["verify", "foliation", "--check", "splitting", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["reports"][0]["status"], "PASS");
    assert_eq!(doc["reports"][0]["witness"]["kind"], "NoneWitness");
}

#[test]
fn usage_errors_exit_2() {
    let out = drinfeld(&["verify", "no-such-check", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("moore.identity"));
    assert_eq!(drinfeld(&["verify", "moore.identity", "--q", "6"]).status.code(), Some(2));
    assert_eq!(drinfeld(&["verify", "moore.identity", "--q", "2", "--budget", "bogus=1"]).status.code(), Some(2));
    assert_eq!(drinfeld(&["count", "b2", "--q", "2", "--p", "3"]).status.code(), Some(2));
}

#[test]
fn sign_mismatch_and_budget_errors_exit_1() {
    let out = drinfeld(&["verify", "h-identity", "--q", "3", "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["reports"][0]["data"]["relation"], "negated");
    let out = drinfeld(&["verify", "moore.identity", "--q", "7", "--n", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["reports"][0]["status"], "ERROR");
    assert_eq!(doc["summary"]["error"], 1);
    let out = drinfeld(&["verify", "moore.identity", "--q", "2", "--n", "3", "--budget", "degree=5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_from_toml_and_json_configs() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("c.toml");
    std::fs::write(&toml_path, "[[checks]]\nid = \"counting.b2\"\nparams = { q = 2 }\n\n[[checks]]\nid = \"moore.identity\"\nparams = { q = 3, n = 2 }\n").unwrap();
    let out = drinfeld(&["report", "--config", toml_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(statuses(&doc), vec![("counting.b2".into(), "PASS".into()), ("moore.identity".into(), "PASS".into())]);
    assert_eq!(doc["reports"][0]["data"]["b2"], 51);

    let json_path = dir.path().join("c.json");
    std::fs::write(&json_path, r#"[{"id": "lattice.discrepancy", "params": {"m": 1, "d": 2}}]"#).unwrap();
    let out = drinfeld(&["report", "--config", json_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reports"][0]["data"]["discrepancy"], "0");

    let empty = dir.path().join("e.toml");
    std::fs::write(&empty, "").unwrap();
    let out = drinfeld(&["report", "--config", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reports"], Value::Array(vec![]));

    let bad = dir.path().join("b.toml");
    std::fs::write(&bad, "[[checks]]\nid = \"moore.identity\"\nparams = { q = 2 }\n").unwrap();
    assert_eq!(drinfeld(&["report", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, jobs) in [(&a, "1"), (&b, "4")] {
        let out = drinfeld(&["verify", "counting", "--q", "2", "--n", "2", "--omit-timing", "--jobs", jobs, "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn golden_bundle_layout() {
    let out = drinfeld(&["verify", "moore.identity", "--q", "2", "--n", "2", "--omit-timing"]);
    let golden = include_str!("golden/moore_identity_q2_n2.json");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
    let mut timed = json(&drinfeld(&["verify", "moore.identity", "--q", "2", "--n", "2"]));
    assert!(timed["reports"][0]["runtime_ms"].is_u64());
    strip_timing(&mut timed);
    assert_eq!(timed, serde_json::from_str::<Value>(golden).unwrap());
}

#[test]
fn csv_tables() {
    let out = drinfeld(&["count", "flags", "--q", "2", "--m", "1", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "flags,graph_closure,blowup_points\n21,21,21\n");
    let out = drinfeld(&["count", "strata", "--q", "2", "--n", "2", "--m", "3", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "stratum,count\n0,24\n1,42\n2,7\n");
    let out = drinfeld(&["count", "b2", "--q", "3", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "points,lines,b2\n40,130,171\n");
    assert_eq!(drinfeld(&["verify", "b2", "--q", "2", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn map_commands() {
    let out = drinfeld(&["map", "show", "--q", "2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["components"][0], "1*x1^2*x2+1*x1*x2^2");
    let out = drinfeld(&["map", "apply", "--q", "2", "--m", "3", "--point", "[[1,0,0],[0,1,0],[0,0,1]]"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["indeterminate"], false);
    let out = drinfeld(&["map", "apply", "--q", "2", "--point", "[1,0,0]"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["indeterminate"], true);
    assert_eq!(drinfeld(&["map", "apply", "--q", "2", "--point", "[1,0]"]).status.code(), Some(2));
}

#[test]
fn linsys_commands() {
    let out = drinfeld(&["linsys", "dim", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reports"][0]["data"]["dimension"], 3);
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.json");
    std::fs::write(&pts, r#"[{"point": [1, 0, 0], "mult": 2}]"#).unwrap();
    let out = drinfeld(&["linsys", "appendix", "--q", "2", "--d", "3", "--s", "1", "--points-file", pts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let data = &json(&out)["reports"][0]["data"];
    assert_eq!((data["h0_actual"].clone(), data["chi"].clone(), data["h1"].clone()), (2.into(), 2.into(), 0.into()));
    let out = drinfeld(&["linsys", "appendix", "--q", "2"]);
    assert_eq!(json(&out)["reports"][0]["data"]["h0_actual"], 3);
}

#[test]
fn list_names_every_check() {
    let out = drinfeld(&["list"]);
    let list = json(&out);
    assert_eq!(list.as_array().unwrap().len(), 30);
    assert!(list.as_array().unwrap().iter().any(|c| c["id"] == "linsys.appendix"));
}

#[test]
fn library_helpers() {
    let b = parse_budget(Some("points=10,degree=7")).unwrap();
    assert_eq!((b.max_points, b.max_degree), (10, 7));
    assert!(parse_budget(Some("points")).is_err());
    let reqs = parse_config("{\"checks\": [{\"id\": \"counting.b2\", \"params\": {\"q\": 2}}]}", None).unwrap();
    assert_eq!(reqs.len(), 1);
    assert!(drinfeld::validate(&parse_config("[{\"id\": \"nope\"}]", None).unwrap()).is_err());
}
