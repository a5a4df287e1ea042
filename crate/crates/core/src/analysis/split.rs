use serde::Serialize;

use super::Settings;
use crate::error::{Error, Result};
use crate::lst::LstSpec;
use crate::series::TruncatedSeries;
use crate::verdict::SequenceReport;

/// Coefficients of a candidate pgf and whether they form one at this order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    #[serde(flatten)]
    pub seq: SequenceReport,
    pub partial_sum: f64,
    /// Nonnegative coefficients and partial sum `<= 1 + tol`.
    pub is_pgf: bool,
}

impl SplitReport {
    pub(crate) fn from_coeffs(coeffs: Vec<f64>, tol: f64) -> Self {
        let partial_sum: f64 = coeffs.iter().sum();
        let seq = SequenceReport::assess(coeffs, tol);
        Self {
            is_pgf: seq.nonneg && partial_sum <= 1.0 + tol,
            seq,
            partial_sum,
        }
    }
}

pub(crate) fn check_split_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "p out of range (0,1), got {p}"
        )))
    }
}

/// `G = P / (p + qP)` as a series in `z`.
pub(crate) fn geometric_split(pgf: &TruncatedSeries, p: f64) -> Result<TruncatedSeries> {
    let denom = pgf.scale(1.0 - p)?.add_scalar(p)?;
    pgf.div(&denom)
}

/// `G(z; λ, p) = φ(λ(1-z)) / (p + q φ(λ(1-z)))`.
pub fn split_pgf(spec: &LstSpec, lambda: f64, p: f64, settings: &Settings) -> Result<SplitReport> {
    settings.validate()?;
    check_split_p(p)?;
    let pgf = spec.pgf_series(lambda, settings.order)?;
    let g = geometric_split(&pgf, p)?;
    Ok(SplitReport::from_coeffs(g.into_coeffs(), settings.tol))
}

/// Largest coefficient gap between `P` and `pG/(1 - qG)`.
pub fn reconstruct_check(spec: &LstSpec, lambda: f64, p: f64, settings: &Settings) -> Result<f64> {
    settings.validate()?;
    check_split_p(p)?;
    let pgf = spec.pgf_series(lambda, settings.order)?;
    let g = geometric_split(&pgf, p)?;
    let rebuilt = g.scale(p)?.div(&g.scale(-(1.0 - p))?.add_scalar(1.0)?)?;
    Ok(pgf
        .coeffs()
        .iter()
        .zip(rebuilt.coeffs())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}
