//! Check results and the JSON report.

use std::path::Path;

use serde::Serialize;

use crate::error::{GeomError, Result};

/// One verified identity. For lower-bound checks (names ending in
/// `_min_magnitude` or `_positive`) `max_residual` holds the observed minimum and
/// `pass` means it exceeds `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(rename = "paper_ref")]
    pub reference: String,
    pub points: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
    pub informational: bool,
}

impl CheckResult {
    /// Passes when `residual ≤ threshold`.
    pub fn upper(name: &str, reference: &str, points: usize, residual: f64, threshold: f64) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            reference: reference.to_string(),
            points,
            max_residual: residual,
            threshold,
            pass: residual.is_finite() && residual <= threshold,
            informational: false,
        }
    }

    /// Passes when `value > threshold`.
    pub fn lower(name: &str, reference: &str, points: usize, value: f64, threshold: f64) -> CheckResult {
        CheckResult { pass: value.is_finite() && value > threshold, ..CheckResult::upper(name, reference, points, value, threshold) }
    }

    pub fn informational(mut self, yes: bool) -> CheckResult {
        self.informational = yes;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub model: String,
    pub seed: u64,
    pub kappa: f64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl Report {
    /// Overall pass is the conjunction of the mandatory checks.
    pub fn new(model: &str, seed: u64, kappa: f64, checks: Vec<CheckResult>) -> Report {
        let pass = checks.iter().filter(|c| !c.informational).all(|c| c.pass);
        Report { model: model.to_string(), seed, kappa, checks, pass }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report fields are plain data");
        s.push('\n');
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass && !c.informational)
    }
}

pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()).map_err(|e| GeomError::IoFailure(format!("{}: {e}", path.display())))
}
