//! λ-q.g.i.d. tests: the `Q_λ` series, the `a` recursion on the mixture pmf,
//! λ-grid sweeps and the threshold bisection.
//!
//! Violation indices are reported as the derivative order `n` of
//! `(-1)^n K^{(n)}(λ) >= 0`, where `K = -φ'/φ²`. The coefficient `q_{n+1}` of
//! `Q_λ` and `a_n` of the `a` recursion are both positive multiples of
//! `(-1)^n K^{(n)}(λ) λ^{n+1}/(n+1)!`, so the two methods share that index.

use serde::Serialize;

use super::Settings;
use crate::error::{Error, Result};
use crate::lst::{check_lambda, poisson_mixture_pmf, LstSpec};
use crate::recursions::a_from_p;
use crate::series::{negligible, TruncatedSeries};
use crate::verdict::{Method, SequenceReport, Verdict, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QMethod {
    QSeries,
    ARecursion,
}

impl QMethod {
    fn label(self) -> Method {
        match self {
            Self::QSeries => Method::QSeries,
            Self::ARecursion => Method::ARecursion,
        }
    }
}

/// `c_λ = 1/φ(λ) - 1` and the coefficients of
/// `Q_λ(z) = 1 + 1/c_λ - 1/(c_λ φ(λ(1 - z)))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QSeries {
    pub c_lambda: f64,
    pub q: SequenceReport,
    /// `Q_λ(0) = 0` within tolerance.
    pub q0_vanishes: bool,
}

impl QSeries {
    pub fn holds(&self) -> bool {
        self.q.nonneg && self.q0_vanishes
    }
}

pub fn q_series(spec: &LstSpec, lambda: f64, settings: &Settings) -> Result<QSeries> {
    settings.validate()?;
    let pgf = spec.pgf_series(lambda, settings.order)?;
    let phi = pgf.coeff(0);
    let tol = settings.tol;
    if phi >= 1.0 - tol {
        return Err(Error::DegenerateAtZero { phi });
    }
    if phi.is_nan() || phi < f64::MIN_POSITIVE {
        return Err(Error::DegenerateP0 { p0: phi });
    }
    let c = 1.0 / phi - 1.0;
    let q = pgf
        .scale(c)?
        .recip()?
        .neg()
        .add_scalar(1.0 + 1.0 / c)?
        .into_coeffs();
    let report = SequenceReport::assess(q, tol);
    Ok(QSeries {
        c_lambda: c,
        q0_vanishes: negligible(report.values[0], tol, report.scale),
        q: report,
    })
}

/// Finite-order λ-q.g.i.d. verdict.
pub fn qgid_test(
    spec: &LstSpec,
    lambda: f64,
    method: QMethod,
    settings: &Settings,
) -> Result<Verdict> {
    settings.validate()?;
    let violation = match method {
        QMethod::QSeries => {
            let qs = q_series(spec, lambda, settings)?;
            if !qs.q0_vanishes {
                Some(Violation {
                    index: 0,
                    value: qs.q.values[0],
                })
            } else {
                qs.q.first_violation.map(|v| Violation {
                    index: v.index.saturating_sub(1),
                    value: v.value,
                })
            }
        }
        QMethod::ARecursion => {
            let pmf = poisson_mixture_pmf(spec, lambda, settings.order)?;
            a_from_p(pmf.probs(), settings.tol)?.seq.first_violation
        }
    };
    Ok(Verdict::new(
        violation,
        settings.order,
        settings.tol,
        Some(lambda),
        method.label(),
    ))
}

/// Jet of `K(τ) = -φ'(τ)/φ(τ)²` about `λ` up to `order`.
pub fn k_jet(spec: &LstSpec, lambda: f64, order: usize) -> Result<TruncatedSeries> {
    check_lambda(lambda)?;
    let phi = spec.jet(lambda, order + 1)?;
    let slope = phi.derivative()?;
    let base = phi.truncate(order);
    Ok(slope.div(&base.mul(&base)?)?.neg())
}

/// Per-λ verdicts over an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub verdicts: Vec<Verdict>,
    pub all_hold: bool,
    /// Largest grid λ whose verdict holds.
    pub largest_passing: Option<f64>,
    /// No λ passes above a failing one (downward closure in λ).
    pub monotone: bool,
}

pub fn gid_grid_test(
    spec: &LstSpec,
    lambda_grid: &[f64],
    method: QMethod,
    settings: &Settings,
) -> Result<GridReport> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("lambda grid is empty".into()));
    }
    if lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "lambda grid must be strictly increasing".into(),
        ));
    }
    let verdicts = lambda_grid
        .iter()
        .map(|&l| qgid_test(spec, l, method, settings))
        .collect::<Result<Vec<_>>>()?;
    let largest_passing = lambda_grid
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.holds)
        .map(|(l, _)| *l)
        .next_back();
    let first_fail = verdicts.iter().position(|v| !v.holds);
    let monotone = match first_fail {
        Some(i) => verdicts[i..].iter().all(|v| !v.holds),
        None => true,
    };
    Ok(GridReport {
        all_hold: first_fail.is_none(),
        verdicts,
        largest_passing,
        monotone,
    })
}

/// Bracket and iteration budget for [`threshold_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSearch {
    pub lo: f64,
    pub hi: f64,
    pub iters: usize,
    /// `hi` is doubled up to this value while the test still holds.
    pub cap: f64,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        Self {
            lo: 1e-3,
            hi: 10.0,
            iters: 50,
            cap: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Threshold {
    /// `estimate` is the smallest λ seen failing; the last passing λ is `lo`.
    Finite {
        estimate: f64,
        lo: f64,
        hi: f64,
        evaluations: usize,
    },
    /// Membership held on every λ up to `tested_up_to`.
    Unbounded {
        tested_up_to: f64,
        evaluations: usize,
    },
}

impl Threshold {
    /// The estimate, `+∞` when unbounded.
    pub fn value(&self) -> f64 {
        match self {
            Self::Finite { estimate, .. } => *estimate,
            Self::Unbounded { .. } => f64::INFINITY,
        }
    }
}

/// Bisection for `λ* = sup{λ : qgid_test holds}`. Membership is downward
/// closed in λ, so the predicate is monotone.
pub fn threshold_search(
    spec: &LstSpec,
    search: &ThresholdSearch,
    method: QMethod,
    settings: &Settings,
) -> Result<Threshold> {
    let ThresholdSearch {
        mut lo,
        mut hi,
        iters,
        cap,
    } = *search;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidBracket(format!(
            "need 0 < lo < hi < inf, got [{lo}, {hi}]"
        )));
    }
    let mut evaluations = 0;
    let mut holds = |l: f64| -> Result<bool> {
        evaluations += 1;
        Ok(qgid_test(spec, l, method, settings)?.holds)
    };
    if !holds(lo)? {
        return Err(Error::InvalidBracket(format!(
            "test already fails at lo = {lo}"
        )));
    }
    while holds(hi)? {
        if hi >= cap {
            return Ok(Threshold::Unbounded {
                tested_up_to: hi,
                evaluations,
            });
        }
        lo = hi;
        hi = (2.0 * hi).min(cap);
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold::Finite {
        estimate: hi,
        lo,
        hi,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(order: usize) -> Settings {
        Settings::with_order(order)
    }

    #[test]
    fn exponential_q_is_identity() {
        let qs = q_series(&LstSpec::exponential(1.0).unwrap(), 1.0, &settings(16)).unwrap();
        assert!((qs.c_lambda - 1.0).abs() < 1e-15);
        for (n, q) in qs.q.values.iter().enumerate() {
            let expected = if n == 1 { 1.0 } else { 0.0 };
            assert!((q - expected).abs() < 1e-14, "n={n}: {q}");
        }
        assert!(qs.holds());
    }

    #[test]
    fn ml_squared_below_threshold_holds() {
        let qs = q_series(&LstSpec::ml_squared(0.75).unwrap(), 0.2, &settings(50)).unwrap();
        assert!(qs.holds());
    }

    #[test]
    fn point_mass_at_zero_is_rejected() {
        let r = q_series(&LstSpec::degenerate(0.0).unwrap(), 3.0, &settings(8));
        assert!(matches!(r, Err(Error::DegenerateAtZero { .. })));
    }

    #[test]
    fn qgid_examples() {
        let s = settings(32);
        for method in [QMethod::QSeries, QMethod::ARecursion] {
            let v = qgid_test(&LstSpec::exponential(1.0).unwrap(), 10.0, method, &s).unwrap();
            assert!(v.holds);
            let v = qgid_test(&LstSpec::ml_squared(0.75).unwrap(), 0.6, method, &s).unwrap();
            assert_eq!(v.violation_index(), Some(1));
            let conv = LstSpec::convolution(vec![LstSpec::exponential(1.0).unwrap(); 2]).unwrap();
            let v = qgid_test(&conv, 1.0, method, &s).unwrap();
            assert_eq!(v.violation_index(), Some(1));
            assert_eq!(v.lambda, Some(1.0));
        }
    }

    #[test]
    fn k_jet_of_convolution() {
        // K = 2(1 + τ) for (1 + τ)^{-2}
        let conv = LstSpec::convolution(vec![LstSpec::exponential(1.0).unwrap(); 2]).unwrap();
        let k = k_jet(&conv, 0.5, 4).unwrap();
        let expected = [3.0, 2.0, 0.0, 0.0, 0.0];
        for (a, b) in k.coeffs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn grid_examples() {
        let s = settings(32);
        let r = gid_grid_test(
            &LstSpec::exponential(1.0).unwrap(),
            &[1.0, 10.0, 100.0],
            QMethod::QSeries,
            &s,
        )
        .unwrap();
        assert!(r.all_hold && r.monotone);
        assert_eq!(r.largest_passing, Some(100.0));

        let grid = [0.5, 5.0, 50.0];
        let r = gid_grid_test(&LstSpec::LogMixture, &grid, QMethod::ARecursion, &s).unwrap();
        assert!(r.all_hold);
        let shifted = LstSpec::shift(1.0, LstSpec::LogMixture).unwrap();
        let r = gid_grid_test(&shifted, &grid, QMethod::QSeries, &s).unwrap();
        assert!(r.verdicts.iter().all(|v| v.violation_index() == Some(1)));
        assert_eq!(r.largest_passing, None);

        assert!(gid_grid_test(&shifted, &[], QMethod::QSeries, &s).is_err());
        assert!(gid_grid_test(&shifted, &[2.0, 1.0], QMethod::QSeries, &s).is_err());
    }

    #[test]
    fn threshold_examples() {
        let s = settings(50);
        let search = ThresholdSearch::default();
        for (alpha, expected) in [
            (0.75, 0.5f64.powf(4.0 / 3.0)),
            (0.9, (0.1f64 / 0.8).powf(1.0 / 0.9)),
        ] {
            let spec = LstSpec::ml_squared(alpha).unwrap();
            let t = threshold_search(&spec, &search, QMethod::QSeries, &s).unwrap();
            assert!((t.value() - expected).abs() < 1e-6, "{alpha}: {t:?}");
        }
        let t = threshold_search(
            &LstSpec::exponential(1.0).unwrap(),
            &ThresholdSearch { cap: 1e3, ..search },
            QMethod::ARecursion,
            &s,
        )
        .unwrap();
        assert_eq!(t.value(), f64::INFINITY);
    }

    #[test]
    fn threshold_bracket_errors() {
        let s = settings(16);
        let spec = LstSpec::ml_squared(0.75).unwrap();
        let bad = ThresholdSearch {
            lo: 1.0,
            ..ThresholdSearch::default()
        };
        assert!(matches!(
            threshold_search(&spec, &bad, QMethod::QSeries, &s),
            Err(Error::InvalidBracket(_))
        ));
        let inverted = ThresholdSearch {
            lo: 2.0,
            hi: 1.0,
            ..ThresholdSearch::default()
        };
        assert!(threshold_search(&spec, &inverted, QMethod::QSeries, &s).is_err());
    }
}
