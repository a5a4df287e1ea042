//! Coefficient recursions on pmfs and Lévy sequences, and log-convexity tests.
//!
//! With `P(z) = Σ p_n z^n`:
//!
//! * `a` solves `p_{n+1} = Σ_{k<=n} p_k a_{n-k}`, i.e. `A(z) = (1 - p_0/P(z))/z`;
//! * `r` solves `(n+1) p_{n+1} = Σ_{k<=n} r_k p_{n-k}`, i.e. `R(z) = P'(z)/P(z)`;
//! * `b` solves `b_0 = 0`, `(n+1) b_{n+1} = r_n - Σ_{1<=k<=n} b_k r_{n-k}`,
//!   i.e. `B(z) = 1 - p_0/P(z)`, so `b_{n+1} = a_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::negligible;
use crate::verdict::{Method, SequenceReport, Verdict, Violation};

/// Result of [`a_from_p`]. `boundary` marks `p_0 >= 1 - tol` (mass at zero).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AReport {
    #[serde(flatten)]
    pub seq: SequenceReport,
    pub boundary: bool,
}

/// Result of [`b_from_r`]. Only the finite partial sum is observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BReport {
    #[serde(flatten)]
    pub seq: SequenceReport,
    pub partial_sum: f64,
    pub sum_below_one: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Convex,
    Concave,
}

fn check_pmf_head(p: &[f64]) -> Result<f64> {
    if p.len() < 2 {
        return Err(Error::InvalidParameter(
            "recursion needs a pmf of order >= 1".into(),
        ));
    }
    if let Some(index) = p.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { op: "pmf", index });
    }
    let p0 = p[0];
    if p0.is_nan() || p0 < f64::MIN_POSITIVE {
        return Err(Error::DegenerateP0 { p0 });
    }
    Ok(p0)
}

fn finite_values(op: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { op, index }),
        None => Ok(()),
    }
}

/// Forward solve of `p_{n+1} = Σ p_k a_{n-k}` for `a_0..a_{N-1}`.
pub fn a_from_p(p: &[f64], tol: f64) -> Result<AReport> {
    let p0 = check_pmf_head(p)?;
    let n_max = p.len() - 1;
    let mut a = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let conv: f64 = (1..=n).map(|k| p[k] * a[n - k]).sum();
        a.push((p[n + 1] - conv) / p0);
    }
    finite_values("a recursion", &a)?;
    Ok(AReport {
        seq: SequenceReport::assess(a, tol),
        boundary: p0 >= 1.0 - tol,
    })
}

/// Forward solve of `(n+1) p_{n+1} = Σ r_k p_{n-k}` for `r_0..r_{N-1}`.
pub fn r_from_p(p: &[f64], tol: f64) -> Result<SequenceReport> {
    let p0 = check_pmf_head(p)?;
    let n_max = p.len() - 1;
    let mut r: Vec<f64> = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let conv: f64 = (0..n).map(|k| r[k] * p[n - k]).sum();
        r.push(((n + 1) as f64 * p[n + 1] - conv) / p0);
    }
    finite_values("r recursion", &r)?;
    Ok(SequenceReport::assess(r, tol))
}

/// `b_0 = 0`, `(n+1) b_{n+1} = r_n - Σ_{k=1}^n b_k r_{n-k}`; returns `b_0..b_{len(r)}`.
pub fn b_from_r(r: &[f64], tol: f64) -> Result<BReport> {
    finite_values("r input", r)?;
    let mut b = vec![0.0; r.len() + 1];
    for n in 0..r.len() {
        let conv: f64 = (1..=n).map(|k| b[k] * r[n - k]).sum();
        b[n + 1] = (r[n] - conv) / (n + 1) as f64;
    }
    finite_values("b recursion", &b)?;
    let partial_sum: f64 = b.iter().sum();
    Ok(BReport {
        seq: SequenceReport::assess(b, tol),
        partial_sum,
        sum_below_one: partial_sum < 1.0,
    })
}

/// Rebuilds `p_0..p_{len(a)}` from `p_0` and `a`.
pub fn p_from_a(p0: f64, a: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(a.len() + 1);
    p.push(p0);
    for n in 0..a.len() {
        let next = (0..=n).map(|k| p[k] * a[n - k]).sum();
        p.push(next);
    }
    p
}

/// Rebuilds `p_0..p_{len(r)}` from `p_0` and the Lévy sequence `r`.
pub fn p_from_r(p0: f64, r: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(r.len() + 1);
    p.push(p0);
    for n in 0..r.len() {
        let conv: f64 = (0..=n).map(|k| r[k] * p[n - k]).sum();
        p.push(conv / (n + 1) as f64);
    }
    p
}

/// Negative entries within `tol · max(1, max|s|)` of zero are read as zero.
fn nonneg_view(s: &[f64], tol: f64) -> Result<Vec<f64>> {
    let scale = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    s.iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() {
                Err(Error::NonFinite {
                    op: "sequence",
                    index,
                })
            } else if value >= 0.0 {
                Ok(value)
            } else if negligible(value, tol, scale) {
                Ok(0.0)
            } else {
                Err(Error::NegativeInput { index, value })
            }
        })
        .collect()
}

/// Checks `s_{n-1} s_{n+1} >= s_n^2` (convex) or `<=` (concave) for every
/// interior `n`. The comparison is relative to the larger side, ties hold.
/// A violation reports `n` and the signed defect.
pub fn curvature_check(s: &[f64], mode: Curvature, tol: f64) -> Result<Verdict> {
    let s = nonneg_view(s, tol)?;
    let mut violation = None;
    for n in 1..s.len().saturating_sub(1) {
        let outer = s[n - 1] * s[n + 1];
        let inner = s[n] * s[n];
        let defect = match mode {
            Curvature::Convex => outer - inner,
            Curvature::Concave => inner - outer,
        };
        if defect < -tol * outer.max(inner) {
            violation = Some(Violation {
                index: n,
                value: defect,
            });
            break;
        }
    }
    let method = match mode {
        Curvature::Convex => Method::LogConvexity,
        Curvature::Concave => Method::LogConcavity,
    };
    Ok(Verdict::new(
        violation,
        s.len().saturating_sub(1),
        tol,
        None,
        method,
    ))
}

pub fn logconvexity_check(s: &[f64], tol: f64) -> Result<Verdict> {
    curvature_check(s, Curvature::Convex, tol)
}

pub fn logconcavity_check(s: &[f64], tol: f64) -> Result<Verdict> {
    curvature_check(s, Curvature::Concave, tol)
}

/// g.i.d. verdict for a log-convex (resp. log-concave) Lévy sequence from the
/// sign of `r_1 - r_0^2`. The precondition is verified first and its failure
/// is an error: the criterion says nothing outside that class.
pub fn hansen_criterion(r: &[f64], mode: Curvature, tol: f64) -> Result<Verdict> {
    if r.len() < 2 {
        return Err(Error::InvalidParameter(
            "criterion needs r_0 and r_1".into(),
        ));
    }
    let shape = curvature_check(r, mode, tol).map_err(|e| match e {
        Error::NegativeInput { index, value } => Error::PreconditionNotMet(format!(
            "Lévy sequence has negative entry {value} at index {index}"
        )),
        other => other,
    })?;
    if let Some(v) = shape.first_violation {
        let what = match mode {
            Curvature::Convex => "log-convex",
            Curvature::Concave => "log-concave",
        };
        return Err(Error::PreconditionNotMet(format!(
            "Lévy sequence is not {what} at index {}",
            v.index
        )));
    }
    let (r0, r1) = (r[0].max(0.0), r[1].max(0.0));
    let sq = r0 * r0;
    let defect = match mode {
        Curvature::Convex => r1 - sq,
        Curvature::Concave => sq - r1,
    };
    let violation = (defect < -tol * sq.max(r1)).then_some(Violation {
        index: 1,
        value: defect,
    });
    let method = match mode {
        Curvature::Convex => Method::HansenConvex,
        Curvature::Concave => Method::HansenConcave,
    };
    Ok(Verdict::new(violation, r.len() - 1, tol, None, method))
}
