//! Machine-readable outcome of a single check.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Error;
use crate::field::FieldTower;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub params: Map<String, Value>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub data: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub towers: Vec<Value>,
    pub runtime_ms: u64,
}

impl CheckReport {
    /// A report that passes unless a failure is recorded.
    pub fn new(check_id: &str) -> CheckReport {
        CheckReport {
            check_id: check_id.into(),
            params: Map::new(),
            status: Status::Pass,
            witness: None,
            reason: None,
            data: Map::new(),
            towers: Vec::new(),
            runtime_ms: 0,
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    pub fn set_data(&mut self, key: &str, v: impl Into<Value>) {
        self.data.insert(key.into(), v.into());
    }

    pub fn with_tower(mut self, t: &FieldTower) -> Self {
        self.add_tower(t);
        self
    }

    pub fn add_tower(&mut self, t: &FieldTower) {
        let d = t.describe();
        if !self.towers.contains(&d) {
            self.towers.push(d);
        }
    }

    /// Records a failure. The first witness is kept; later ones are appended
    /// under "more".
    pub fn fail(&mut self, witness: Value) {
        match (&self.status, &mut self.witness) {
            (Status::Fail, Some(Value::Object(w))) => {
                let more = w.entry("more").or_insert_with(|| Value::Array(Vec::new()));
                if let Value::Array(a) = more {
                    if a.len() < 8 {
                        a.push(witness);
                    }
                }
            }
            _ => {
                self.status = Status::Fail;
                self.witness = Some(witness);
            }
        }
    }

    pub fn require(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        if !ok {
            self.fail(witness());
        }
    }

    pub fn vacuous(&mut self, reason: &str) {
        if self.status == Status::Pass {
            self.status = Status::Vacuous;
            self.reason = Some(reason.into());
        }
    }

    pub fn error(check_id: &str, params: Map<String, Value>, err: &Error) -> CheckReport {
        let mut r = CheckReport::new(check_id);
        r.params = params;
        r.status = Status::Error;
        r.reason = Some(alloc::format!("{}: {err}", err.kind()));
        r
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Shorthand for building JSON objects from key/value pairs.
pub fn obj<const N: usize>(pairs: [(&str, Value); N]) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.into(), v);
    }
    Value::Object(m)
}
