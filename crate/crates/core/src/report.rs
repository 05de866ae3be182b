use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn is_pass(self) -> bool {
        self == Status::Pass
    }
}

/// Verification outcome, serialized as `{check, status, worst_violation, witness, ...}`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    /// Largest observed violation (or deviation) across the samples.
    pub worst_violation: f64,
    /// The sample at which `worst_violation` occurred.
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>) -> Self {
        CheckReport { check: check.into(), status: Status::Pass, worst_violation: 0.0, witness: None, samples: 0, note: None }
    }

    /// Records one sample whose violation is `violation` (≤ 0 means satisfied
    /// with room to spare) and fails the report if it exceeds `tol`.
    pub fn record(&mut self, violation: f64, tol: f64, witness: impl FnOnce() -> Vec<f64>) {
        self.samples += 1;
        if violation > self.worst_violation || (violation.is_nan() && !self.worst_violation.is_nan()) {
            self.worst_violation = violation;
            self.witness = Some(witness());
        }
        if !(violation <= tol) {
            self.status = Status::Fail;
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status.is_pass()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
