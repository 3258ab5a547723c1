use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Recorded value only; never fails a run.
    Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    /// `None` for measured entries.
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    /// Passes iff `residual <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, residual, tolerance: Some(tolerance), detail: String::new() }
    }

    /// Passes iff `residual >= bound`.
    pub fn at_least(name: impl Into<String>, residual: f64, bound: f64) -> Self {
        let status = if residual >= bound { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, residual, tolerance: Some(bound), detail: "lower bound".into() }
    }

    /// Passes iff `lo <= residual <= hi`; the tolerance field records `hi`.
    pub fn within(name: impl Into<String>, residual: f64, lo: f64, hi: f64) -> Self {
        let status = if (lo..=hi).contains(&residual) { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, residual, tolerance: Some(hi), detail: format!("range [{lo}, {hi}]") }
    }

    pub fn measured(name: impl Into<String>, residual: f64) -> Self {
        Self { name: name.into(), status: Status::Measured, residual, tolerance: None, detail: String::new() }
    }

    /// A check that could not be evaluated.
    pub fn error(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            residual: f64::NAN,
            tolerance: None,
            detail: format!("error: {err}"),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// One printed-equation discrepancy found by comparing against an oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Erratum {
    pub name: String,
    pub printed: String,
    pub adopted: String,
    /// Value of the printed form at the probe state; `None` when no oracle
    /// value exists.
    pub printed_value: Option<f64>,
    /// Value of the adopted form at the same state.
    pub oracle_value: Option<f64>,
    pub verdict: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub errata: Vec<Erratum>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
