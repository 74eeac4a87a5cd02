//! Named residual checks and their serialized forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::connections::ConnectionParams;

/// Which side of the tolerance a passing residual lies on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when `residual < tolerance`.
    #[default]
    Upper,
    /// Passes when `residual > tolerance` (separation checks).
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub class: Option<String>,
    pub params: Option<ConnectionParams>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: Option<u64>,
    #[serde(default)]
    pub bound: Bound,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    /// A check that passes when `residual < tolerance`. NaN never passes.
    pub fn below(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            class: None,
            params: None,
            residual,
            tolerance,
            pass: residual < tolerance,
            seed: None,
            bound: Bound::Upper,
            note: None,
        }
    }

    /// A check that passes when `residual > tolerance`.
    pub fn above(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            pass: residual > tolerance,
            bound: Bound::Lower,
            ..Self::below(check, residual, tolerance)
        }
    }

    /// A failed check carrying an error message instead of a residual.
    pub fn error(check: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pass: false,
            note: Some(message.into()),
            ..Self::below(check, f64::NAN, 0.0)
        }
    }

    pub fn class(mut self, class: impl Into<String>) -> Self {
        self.class = Some(class.into());
        self
    }

    pub fn params(mut self, params: ConnectionParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// An ordered list of checks. Serializes as a JSON array.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, check: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One aligned row per check.
    pub fn to_text(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.check.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let class_width = self
            .checks
            .iter()
            .filter_map(|c| c.class.as_ref().map(|s| s.chars().count()))
            .max()
            .unwrap_or(5)
            .max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:<class_width$}  {:>12}  {:>10}  result",
            "check", "class", "residual", "tolerance"
        );
        for c in &self.checks {
            let class = c.class.as_deref().unwrap_or("-");
            let pad = class_width - class.chars().count();
            let relation = match c.bound {
                Bound::Upper => "<",
                Bound::Lower => ">",
            };
            let _ = write!(
                out,
                "{:<width$}  {class}{:pad$}  {:>12.3e}  {relation}{:>9.1e}  {}",
                c.check,
                "",
                c.residual,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
            if let Some(note) = &c.note {
                let _ = write!(out, "  ({note})");
            }
            out.push('\n');
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.len(), failed);
        out
    }
}
