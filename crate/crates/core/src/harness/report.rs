//! Structured experiment records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, ConstantsConfig};
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub experiment: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub constants: ConstantsConfig,
    pub measured: BTreeMap<String, Measurement>,
    pub bounds: Vec<BoundReport>,
    pub verdicts: BTreeMap<String, bool>,
    pub notes: Vec<String>,
    pub tables: BTreeMap<String, serde_json::Value>,
    /// Wall-clock time; left out of the canonical form.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_ms: Option<u64>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, params: serde_json::Value, constants: &ConstantsConfig) -> Self {
        ExperimentReport {
            schema: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            seed,
            params,
            constants: constants.clone(),
            measured: BTreeMap::new(),
            bounds: Vec::new(),
            verdicts: BTreeMap::new(),
            notes: Vec::new(),
            tables: BTreeMap::new(),
            wall_clock_ms: None,
        }
    }

    pub fn measure(&mut self, name: &str, value: f64, std_error: Option<f64>) {
        self.measured
            .insert(name.to_string(), Measurement { value, std_error });
    }

    pub fn verdict(&mut self, name: &str, ok: bool) {
        self.verdicts.insert(name.to_string(), ok);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn table<T: Serialize>(&mut self, name: &str, rows: &T) -> Result<()> {
        self.tables
            .insert(name.to_string(), serde_json::to_value(rows)?);
        Ok(())
    }

    /// True when every verdict holds.
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    /// Pretty JSON without the wall-clock field: identical inputs give
    /// identical bytes.
    pub fn canonical_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_clock_ms = None;
        Ok(serde_json::to_string_pretty(&copy)?)
    }
}
