use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::io::{format_number, FORMAT_VERSION};

/// Label carried by reports whose constant is a maximum over finitely many
/// candidates of a quantity whose true supremum is not computed.
pub const LOWER_BOUND: &str = "empirical lower bound";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub label: String,
    pub value: f64,
}

/// Outcome of one experiment: the reported constant is the maximum of the
/// per-trial values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub bound: String,
    pub config: serde_json::Value,
    pub constant: f64,
    pub trials: Vec<TrialRow>,
    pub refinement: Vec<RefinementStep>,
    pub metrics: BTreeMap<String, f64>,
}

impl ExperimentReport {
    pub fn new(kind: &str, config: serde_json::Value, trials: Vec<TrialRow>) -> Self {
        let constant = trials.iter().map(|t| t.value).fold(f64::NEG_INFINITY, f64::max);
        Self {
            kind: kind.to_string(),
            bound: LOWER_BOUND.to_string(),
            config,
            constant: if trials.is_empty() { 0.0 } else { constant },
            trials,
            refinement: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn with_bound(mut self, bound: &str) -> Self {
        self.bound = bound.to_string();
        self
    }

    pub fn with_metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn push_refinement(&mut self, label: impl Into<String>, value: f64) {
        self.refinement.push(RefinementStep {
            label: label.into(),
            value,
        });
    }

    /// Whether `constant` is the maximum over the recorded trials.
    pub fn is_consistent(&self) -> bool {
        let max = self.trials.iter().map(|t| t.value).fold(f64::NEG_INFINITY, f64::max);
        if self.trials.is_empty() {
            self.constant == 0.0
        } else {
            max == self.constant
        }
    }

    /// Largest ratio between consecutive refinement values, either way up.
    pub fn refinement_spread(&self) -> f64 {
        self.refinement
            .windows(2)
            .map(|w| (w[1].value / w[0].value).max(w[0].value / w[1].value))
            .fold(1.0, f64::max)
    }

    /// Trial table in the library's TSV layout.
    pub fn trial_table(&self) -> String {
        let mut out = format!(
            "# fraclab format_version={FORMAT_VERSION}\n# {} ({})\n# label\tvalue\n",
            self.kind, self.bound
        );
        for t in &self.trials {
            let _ = writeln!(out, "{}\t{}", t.label, format_number(t.value));
        }
        out
    }
}
