use serde::Serialize;

use crate::series::negligible;

/// First index at which a finite-order condition fails, with the offending value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub value: f64,
}

/// Which test produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    QSeries,
    ARecursion,
    LogConvexity,
    LogConcavity,
    HansenConvex,
    HansenConcave,
    MixturePrecheck,
    GeometricKJet,
    ClassicalKJet,
}

/// Outcome of a nonnegativity-type test up to a finite order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub first_violation: Option<Violation>,
    pub order: usize,
    pub tolerance: f64,
    pub lambda: Option<f64>,
    pub method: Method,
}

impl Verdict {
    pub fn new(
        first_violation: Option<Violation>,
        order: usize,
        tolerance: f64,
        lambda: Option<f64>,
        method: Method,
    ) -> Self {
        Self {
            holds: first_violation.is_none(),
            first_violation,
            order,
            tolerance,
            lambda,
            method,
        }
    }

    pub fn violation_index(&self) -> Option<usize> {
        self.first_violation.map(|v| v.index)
    }
}

/// A computed sequence together with its nonnegativity assessment.
///
/// The tolerance scale at index `n` is the running maximum of `|values[..=n]|`,
/// so a verdict on a prefix does not depend on later coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceReport {
    pub values: Vec<f64>,
    pub nonneg: bool,
    pub first_violation: Option<Violation>,
    pub order: usize,
    pub tolerance: f64,
    pub scale: f64,
}

impl SequenceReport {
    pub fn assess(values: Vec<f64>, tol: f64) -> Self {
        Self::assess_from(values, tol, 0)
    }

    /// Like [`assess`](Self::assess) but ignores indices below `start`
    /// (they still contribute to the scale).
    pub fn assess_from(values: Vec<f64>, tol: f64, start: usize) -> Self {
        let mut scale = 0.0_f64;
        let mut first_violation = None;
        for (index, &value) in values.iter().enumerate() {
            scale = scale.max(value.abs());
            if first_violation.is_none()
                && index >= start
                && value < 0.0
                && !negligible(value, tol, scale)
            {
                first_violation = Some(Violation { index, value });
            }
        }
        Self {
            order: values.len().saturating_sub(1),
            nonneg: first_violation.is_none(),
            first_violation,
            values,
            tolerance: tol,
            scale,
        }
    }

    pub fn violation_index(&self) -> Option<usize> {
        self.first_violation.map(|v| v.index)
    }
}
