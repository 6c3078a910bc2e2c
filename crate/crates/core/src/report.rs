//! Structured check results shared by every pipeline.

use serde::{Deserialize, Serialize};

use crate::expr::sample::{Verdict, ZeroTest};
use crate::expr::EvalPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Largest observed residual, if the check measures one.
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub samples: usize,
    pub witness: Option<EvalPoint>,
    pub values: Vec<NamedValue>,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status) -> Check {
        Check {
            name: name.into(),
            status,
            residual: None,
            tolerance: None,
            samples: 0,
            witness: None,
            values: Vec::new(),
            note: None,
        }
    }

    /// Pass iff `residual < tol`; NaN fails.
    pub fn bound(name: impl Into<String>, residual: f64, tol: f64, samples: usize) -> Check {
        let status = if residual < tol { Status::Pass } else { Status::Fail };
        Check {
            residual: Some(residual),
            tolerance: Some(tol),
            samples,
            ..Check::new(name, status)
        }
    }

    /// Pass iff the zero test's verdict equals `expect`.
    pub fn from_zero_test(name: impl Into<String>, z: &ZeroTest, expect: Verdict, tol: f64) -> Check {
        let status = match (z.verdict, expect) {
            (Verdict::Inconclusive, _) => Status::Inconclusive,
            (a, b) if a == b => Status::Pass,
            _ => Status::Fail,
        };
        Check {
            residual: Some(z.max_abs),
            tolerance: Some(tol),
            samples: z.accepted,
            witness: z.witness.as_ref().map(|w| w.point.clone()),
            ..Check::new(name, status)
        }
    }

    pub fn with_value(mut self, name: impl Into<String>, value: f64) -> Check {
        self.values.push(NamedValue {
            name: name.into(),
            value,
        });
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    pub fn with_witness(mut self, pt: EvalPoint) -> Check {
        self.witness = Some(pt);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn status(&self) -> Status {
        if self.checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else if self.checks.iter().any(|c| c.status == Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }

    pub fn all_pass(&self) -> bool {
        self.status() == Status::Pass
    }
}
