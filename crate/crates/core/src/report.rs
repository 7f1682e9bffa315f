use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Outcome of a verification run. Field order is fixed, and bounds are a
/// sorted map, so serialization is byte-stable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub status: Status,
    pub checks: Vec<Check>,
    pub bounds: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    #[default]
    Pass,
    Fail,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn bound(mut self, key: &str, value: impl ToString) -> Self {
        self.bounds.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set_bound(&mut self, key: &str, value: impl ToString) {
        self.bounds.insert(key.to_string(), value.to_string());
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.push(name, true, None);
    }

    pub fn fail(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.push(name, false, Some(witness.into()));
    }

    pub fn record(&mut self, name: impl Into<String>, outcome: std::result::Result<(), String>) {
        match outcome {
            Ok(()) => self.pass(name),
            Err(w) => self.fail(name, w),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, passed: bool, witness: Option<String>) {
        if !passed {
            self.status = Status::Fail;
        }
        self.checks.push(Check {
            name: name.into(),
            passed,
            witness,
        });
    }

    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for c in other.checks {
            self.push(format!("{prefix}{}", c.name), c.passed, c.witness);
        }
        for (k, v) in other.bounds {
            self.bounds.entry(k).or_insert(v);
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
