//! Config loading, parallel execution and report bundles for the `drinfeld` binary.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};
use drinfeld_core::registry::{lookup, run_check};
use drinfeld_core::{Budget, CheckReport, Status};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA: u32 = 1;

/// One requested check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRequest {
    pub id: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    /// Status the acceptance suite expects; ignored by `report`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Status>,
    /// Acceptance criterion this entry belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u32>,
}

#[derive(Clone, Debug, Default, Deserialize)]
struct ConfigFile {
    #[serde(default, alias = "check")]
    checks: Vec<CheckRequest>,
}

/// Reads a TOML or JSON config. JSON may be a bare array of requests.
pub fn load_config(path: &Path) -> anyhow::Result<Vec<CheckRequest>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text, path.extension().and_then(|e| e.to_str()))
}

pub fn parse_config(text: &str, ext: Option<&str>) -> anyhow::Result<Vec<CheckRequest>> {
    let as_json = match ext {
        Some("json") => true,
        Some("toml") => false,
        _ => text.trim_start().starts_with(['{', '[']),
    };
    if as_json {
        let v: Value = serde_json::from_str(text).context("parsing JSON config")?;
        if v.is_array() {
            return Ok(serde_json::from_value(v)?);
        }
        let c: ConfigFile = serde_json::from_value(v)?;
        return Ok(c.checks);
    }
    let c: ConfigFile = toml::from_str(text).context("parsing TOML config")?;
    Ok(c.checks)
}

/// Fails with the registry's message when an id is unknown.
pub fn validate(requests: &[CheckRequest]) -> anyhow::Result<()> {
    for r in requests {
        lookup(&r.id).map_err(|e| anyhow::anyhow!("{e}"))?;
    }
    Ok(())
}

/// A usage problem inside a check (bad parameters).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run_one(req: &CheckRequest, budget: &Budget) -> anyhow::Result<CheckReport> {
    let start = Instant::now();
    let mut r = run_check(&req.id, &req.params, budget).map_err(|e| UsageError(format!("{}: {e}", req.id)))?;
    r.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(r)
}

/// Runs all requests on `jobs` threads (0 = all cores); output order matches input order.
pub fn run_all(requests: &[CheckRequest], budget: &Budget, jobs: usize) -> anyhow::Result<Vec<CheckReport>> {
    validate(requests)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| requests.par_iter().map(|r| run_one(r, budget)).collect())
}

/// Exit code for a set of reports: 0 iff every non-VACUOUS report passed.
pub fn exit_code(reports: &[CheckReport]) -> i32 {
    if reports.iter().all(|r| matches!(r.status, Status::Pass | Status::Vacuous)) {
        0
    } else {
        1
    }
}

/// The versioned JSON document wrapping a list of reports.
pub fn bundle(reports: &[CheckReport]) -> Value {
    let mut towers: Vec<Value> = Vec::new();
    for r in reports {
        for t in &r.towers {
            if !towers.contains(t) {
                towers.push(t.clone());
            }
        }
    }
    towers.sort_by_key(|t| serde_json::to_string(t).unwrap_or_default());
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    serde_json::json!({
        "schema": SCHEMA,
        "tool": "drinfeld",
        "version": env!("CARGO_PKG_VERSION"),
        "summary": {
            "total": reports.len(),
            "pass": count(Status::Pass),
            "fail": count(Status::Fail),
            "vacuous": count(Status::Vacuous),
            "error": count(Status::Error),
        },
        "towers": towers,
        "reports": reports,
    })
}

/// Removes every "runtime_ms" key, for comparing runs.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

/// Parses "points=N,degree=N,field=N" (any subset) over the defaults.
pub fn parse_budget(spec: Option<&str>) -> anyhow::Result<Budget> {
    let mut b = Budget::default();
    let Some(spec) = spec else { return Ok(b) };
    for part in spec.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').with_context(|| format!("budget entry {part:?} is not key=value"))?;
        let v: u64 = v.trim().parse().with_context(|| format!("budget value {v:?} is not an integer"))?;
        match k.trim() {
            "points" => b.max_points = v,
            "degree" => b.max_degree = v,
            "field" => b.max_field_size = v,
            other => bail!("unknown budget key {other:?}; use points, degree or field"),
        }
    }
    Ok(b)
}

/// The shipped acceptance config.
pub const ACCEPTANCE_CONFIG: &str = include_str!("../acceptance.toml");

pub fn acceptance_requests() -> Vec<CheckRequest> {
    parse_config(ACCEPTANCE_CONFIG, Some("toml")).expect("shipped acceptance config parses")
}
