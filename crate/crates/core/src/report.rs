//! Machine-readable check reports.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

/// One verdict. Serialized keys are sorted, so equal inputs give equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub result: Outcome,
    /// The property being checked, in words.
    pub property: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl CheckReport {
    pub fn pass(check: &str, property: &str) -> Self {
        CheckReport { check: check.into(), result: Outcome::Pass, property: property.into(), witness: None, details: Value::Null }
    }

    pub fn fail(check: &str, property: &str, witness: Value) -> Self {
        CheckReport {
            check: check.into(),
            result: Outcome::Fail,
            property: property.into(),
            witness: Some(witness),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn passed(&self) -> bool {
        self.result == Outcome::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
