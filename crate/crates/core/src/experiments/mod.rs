//! End-to-end experiments: equidistribution of approximate directions for
//! random `x`, Birkhoff shelling, spherical averages, the exact census of the
//! biased continued fraction, and a non-minimal toral translation.
//!
//! Every experiment returns an [`ExperimentReport`], a deterministic function
//! of its parameters and seed apart from the `timestamp` field.

pub mod biased;
mod birkhoff;
pub mod census;
mod nonminimal;
mod thm1;
mod thm3;

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::contfrac::ContFracError;
use crate::lattice::LatticeError;
use crate::siegel::SiegelError;

pub use biased::{biased_census_report, biased_ratio, Threshold};
pub use birkhoff::{birkhoff_experiment, BirkhoffParams};
pub use nonminimal::{nonminimal_experiment, NonminimalParams};
pub use thm1::{sample_x, thm1_experiment, Thm1Params};
pub use thm3::{thm3_experiment, Thm3Params};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Siegel(#[from] SiegelError),
    #[error(transparent)]
    ContFrac(#[from] ContFracError),
    #[error("no points in the counting window")]
    EmptyDenominator,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl ExperimentError {
    /// Whether the failure is an exhausted enumeration budget.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            ExperimentError::Lattice(LatticeError::CandidateBudgetExceeded { .. })
                | ExperimentError::Siegel(SiegelError::Lattice(LatticeError::CandidateBudgetExceeded { .. }))
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub parameters: Value,
    pub records: Vec<Value>,
    pub summary: Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch at creation; the only field that varies
    /// between identical runs.
    pub timestamp: u64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, parameters: Value, records: Vec<Value>, summary: Value, seed: Option<u64>) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        ExperimentReport {
            experiment: experiment.to_string(),
            parameters,
            records,
            summary,
            seed,
            timestamp,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The JSON report with the timestamp removed; identical for identical
    /// parameters and seed.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(o) = v.as_object_mut() {
            o.remove("timestamp");
        }
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }

    /// A numeric summary field.
    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_json_drops_timestamp() {
        let mut a = ExperimentReport::new("x", json!({"d": 1}), vec![json!(1)], json!({}), Some(3));
        let mut b = a.clone();
        a.timestamp = 1;
        b.timestamp = 2;
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert!(!a.canonical_json().contains("timestamp"));
        let back: ExperimentReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }
}
