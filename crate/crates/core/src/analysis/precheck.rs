//! Grid precheck of whether a pgf `P` can be a Poisson mixture whose mixing
//! law is g.i.d.: at each grid point `z < 1` it needs `0 < P(z) <= 1` and
//! `H^{(n)}(z) <= 0` for `H = 1/P - 1`, `1 <= n <= m`.
//!
//! `P` is known only through its truncated coefficients. At points inside the
//! numerically resolved disc the polynomial itself is re-centered; elsewhere a
//! rational function matching every supplied coefficient is used, and if none
//! is found the point is reported as unresolved.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{negligible, TruncatedSeries};
use crate::verdict::{Method, Verdict, Violation};

pub const DEFAULT_Z_GRID: [f64; 8] = [-10.0, -5.0, -2.0, -1.0, -0.5, 0.0, 0.5, 0.9];
pub const DEFAULT_PRECHECK_ORDER: usize = 6;

const MAX_DENOMINATOR_DEGREE: usize = 8;
const TAIL_WINDOW: usize = 8;
const TAIL_TERMS: usize = 100_000;
/// Fraction of the tolerance the propagated truncation error may use.
const POLYNOMIAL_MARGIN: f64 = 1e-1;

/// How `P` was evaluated at a grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evaluation {
    /// Re-centered truncation; `tail` estimates the dropped terms and
    /// `rounding` the cancellation error, both on the derivative scale.
    Polynomial {
        tail: f64,
        rounding: f64,
    },
    Rational {
        numerator_degree: usize,
        denominator_degree: usize,
    },
    Unresolved {
        tail: f64,
    },
}

/// `Range` is `0 < P(z) <= 1`; `Derivative` is `H^{(n)}(z) <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Range,
    Derivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointViolation {
    pub z: f64,
    pub condition: Condition,
    /// Derivative order (0 for the range condition).
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecheckPoint {
    pub z: f64,
    pub evaluation: Evaluation,
    /// `P(z)`, absent when unresolved.
    pub value: Option<f64>,
    /// `H^{(n)}(z)` for `0 <= n <= m`; empty when unresolved or when the
    /// range condition already fails.
    pub h_derivatives: Vec<f64>,
    /// `None` when unresolved.
    pub holds: Option<bool>,
    pub violation: Option<PointViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecheckReport {
    pub points: Vec<PrecheckPoint>,
    /// No violation at any resolved point.
    pub holds: bool,
    pub first_violation: Option<PointViolation>,
    pub resolved: usize,
    pub unresolved: usize,
    pub order: usize,
    pub tolerance: f64,
    pub method: Method,
}

impl PrecheckReport {
    pub fn verdict(&self) -> Verdict {
        let violation = self.first_violation.map(|v| Violation {
            index: v.index,
            value: v.value,
        });
        Verdict::new(
            violation,
            self.order,
            self.tolerance,
            None,
            Method::MixturePrecheck,
        )
    }
}

pub fn mixture_precheck(pgf: &[f64], z_grid: &[f64], m: usize, tol: f64) -> Result<PrecheckReport> {
    if pgf.is_empty() {
        return Err(Error::InvalidParameter(
            "pgf needs at least one coefficient".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidParameter(
            "precheck order must be at least 1".into(),
        ));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance out of range (0,1), got {tol}"
        )));
    }
    let scale = pgf.iter().fold(0.0_f64, |s, c| s.max(c.abs()));
    for (index, &value) in pgf.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                op: "mixture_precheck",
                index,
            });
        }
        if value < 0.0 && !negligible(value, tol, scale) {
            return Err(Error::NegativeInput { index, value });
        }
    }
    let sum: f64 = pgf.iter().sum();
    if sum > 1.0 + tol {
        return Err(Error::MassExceeded { sum });
    }
    for &z in z_grid {
        if !(z.is_finite() && z < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grid point out of range (-inf,1), got {z}"
            )));
        }
    }

    let mut rational = None;
    let mut points = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        points.push(check_point(pgf, z, m, tol, &mut rational)?);
    }
    let first_violation = points.iter().find_map(|p| p.violation);
    let resolved = points.iter().filter(|p| p.holds.is_some()).count();
    Ok(PrecheckReport {
        holds: first_violation.is_none(),
        first_violation,
        unresolved: points.len() - resolved,
        resolved,
        points,
        order: m,
        tolerance: tol,
        method: Method::MixturePrecheck,
    })
}

/// Lazily computed rational fit, shared by all grid points.
type RationalCache = Option<Option<(Vec<f64>, Vec<f64>)>>;

fn check_point(
    pgf: &[f64],
    z: f64,
    m: usize,
    tol: f64,
    rational: &mut RationalCache,
) -> Result<PrecheckPoint> {
    let (evaluation, jets) = match polynomial_jet(pgf, z, m, tol) {
        Ok((evaluation, jet)) => (evaluation, Some((jet, None))),
        Err(tail) => {
            let fit = rational.get_or_insert_with(|| rational_fit(pgf, tol));
            match fit {
                Some((num, den)) => match rational_jet(num, den, z, m, tol) {
                    Some(jets) => (
                        Evaluation::Rational {
                            numerator_degree: num.len() - 1,
                            denominator_degree: den.len() - 1,
                        },
                        Some(jets),
                    ),
                    None => (Evaluation::Unresolved { tail }, None),
                },
                None => (Evaluation::Unresolved { tail }, None),
            }
        }
    };
    let Some((jet, inverse)) = jets else {
        return Ok(PrecheckPoint {
            z,
            evaluation,
            value: None,
            h_derivatives: Vec::new(),
            holds: None,
            violation: None,
        });
    };

    let value = jet.coeff(0);
    if value.is_nan() || value <= 0.0 || value > 1.0 + tol {
        let violation = PointViolation {
            z,
            condition: Condition::Range,
            index: 0,
            value,
        };
        return Ok(PrecheckPoint {
            z,
            evaluation,
            value: Some(value),
            h_derivatives: Vec::new(),
            holds: Some(false),
            violation: Some(violation),
        });
    }

    let inverse = match inverse {
        Some(inverse) => inverse,
        None => jet.recip()?,
    };
    let h = inverse.add_scalar(-1.0)?;
    let h_derivatives = h.derivatives()?;
    let mut scale = h_derivatives[0].abs();
    let mut violation = None;
    for (index, &value) in h_derivatives.iter().enumerate().skip(1) {
        scale = scale.max(value.abs());
        if value > 0.0 && !negligible(value, tol, scale) {
            violation = Some(PointViolation {
                z,
                condition: Condition::Derivative,
                index,
                value,
            });
            break;
        }
    }
    Ok(PrecheckPoint {
        z,
        evaluation,
        value: Some(value),
        h_derivatives,
        holds: Some(violation.is_none()),
        violation,
    })
}

/// Coefficients of `Σ a_k x^k` re-expanded about `z`.
fn taylor_shift(a: &[f64], z: f64) -> Vec<f64> {
    let mut b = a.to_vec();
    let n = b.len() - 1;
    for i in 0..n {
        for j in (i..n).rev() {
            b[j] += z * b[j + 1];
        }
    }
    b
}

/// Geometric growth rate of the trailing coefficients, and the index of the
/// last nonzero one. `None` when the coefficients end in exact zeros, which is
/// read as a polynomial.
fn trailing_rate(a: &[f64]) -> Option<(f64, usize)> {
    let last = *a.last()?;
    if last == 0.0 || a.len() < 2 {
        return None;
    }
    let nonzero: Vec<usize> = (1..a.len()).filter(|&k| a[k] > 0.0).collect();
    let window = &nonzero[nonzero.len().saturating_sub(TAIL_WINDOW)..];
    let mut rate = 0.0_f64;
    for &k in window {
        rate = rate.max(a[k].powf(1.0 / k as f64));
    }
    for pair in window.windows(2) {
        let (j, k) = (pair[0], pair[1]);
        rate = rate.max((a[k] / a[j]).powf(1.0 / (k - j) as f64));
    }
    Some((rate, a.len() - 1))
}

/// Estimated size of the dropped terms in each re-centered coefficient
/// `n <= m`, extrapolating the trailing coefficients geometrically.
fn tail_estimate(a: &[f64], z: f64, m: usize) -> Vec<f64> {
    let mut tails = vec![0.0; m + 1];
    let Some((rate, last)) = trailing_rate(a) else {
        return tails;
    };
    let x = rate * z.abs();
    if x >= 1.0 {
        return vec![f64::INFINITY; m + 1];
    }
    if x == 0.0 {
        return tails;
    }
    let anchor = a[last];
    for (n, tail) in tails.iter_mut().enumerate() {
        // Σ_{k>N} C(k,n) a_N rate^{k-N} |z|^{k-n}
        let mut total = 0.0;
        let mut power = anchor * rate * z.abs().powi(last as i32 + 1 - n as i32);
        for k in last + 1..last + 1 + TAIL_TERMS {
            let term = binomial(k, n) * power;
            total += term;
            if k >= n && term <= f64::EPSILON * total {
                break;
            }
            power *= x;
        }
        *tail = total;
    }
    tails
}

fn binomial(k: usize, n: usize) -> f64 {
    if n > k {
        return 0.0;
    }
    (0..n).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

fn abs_convolution(x: &[f64], y: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|k| (0..=k).map(|j| x[j].abs() * y[k - j].abs()).sum())
        .collect()
}

fn max_scaled(values: &[f64]) -> f64 {
    let mut factorial = 1.0;
    let mut worst = 0.0_f64;
    for (n, v) in values.iter().enumerate() {
        if n > 0 {
            factorial *= n as f64;
        }
        worst = worst.max(factorial * v);
    }
    worst
}

/// Re-centered polynomial jet, or the largest tail estimate when the
/// truncation is not a faithful proxy at `z`.
///
/// Coefficient errors `δ` in `P` move `1/P` by about `δ/P²`; the jet is
/// accepted only if that bound stays well inside the tolerance used on the
/// derivatives of `H`.
fn polynomial_jet(
    a: &[f64],
    z: f64,
    m: usize,
    tol: f64,
) -> std::result::Result<(Evaluation, TruncatedSeries), f64> {
    let tails = tail_estimate(a, z, m);
    let tail = max_scaled(&tails);
    if !tail.is_finite() {
        return Err(tail);
    }
    let absolute: Vec<f64> = a.iter().map(|c| c.abs()).collect();
    let mut magnitude = taylor_shift(&absolute, z.abs());
    magnitude.resize(magnitude.len().max(m + 1), 0.0);
    // statistical rather than worst-case accumulation over the shift passes
    let unit = 4.0 * (a.len() as f64).sqrt() * f64::EPSILON;
    let roundings: Vec<f64> = magnitude[..=m].iter().map(|v| unit * v).collect();
    let rounding = max_scaled(&roundings);
    let errors: Vec<f64> = tails.iter().zip(&roundings).map(|(t, r)| t + r).collect();

    let mut coeffs = taylor_shift(a, z);
    coeffs.resize(coeffs.len().max(m + 1), 0.0);
    coeffs.truncate(m + 1);
    if coeffs[0].abs() <= errors[0] / POLYNOMIAL_MARGIN {
        return Err(tail);
    }
    let jet = TruncatedSeries::new(coeffs, z).map_err(|_| tail)?;
    let inverse = jet.recip().map_err(|_| tail)?;
    let inverse = inverse.coeffs();
    let propagated = abs_convolution(&errors, &abs_convolution(inverse, inverse));

    let mut factorial = 1.0;
    let mut scale = 0.0_f64;
    for n in 0..=m {
        if n > 0 {
            factorial *= n as f64;
        }
        scale = scale.max(factorial * inverse[n].abs());
        if factorial * propagated[n] > POLYNOMIAL_MARGIN * tol * scale.max(1.0) {
            return Err(tail);
        }
    }
    Ok((Evaluation::Polynomial { tail, rounding }, jet))
}

/// Numerator and denominator (constant term 1) of the lowest-degree rational
/// function whose expansion reproduces every supplied coefficient.
fn rational_fit(c: &[f64], tol: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = c.len() - 1;
    let scale = c.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    let at = |k: isize| if k < 0 { 0.0 } else { c[k as usize] };
    for degree in 1..=n {
        if 2 * (degree + 1) > n + 1 {
            break;
        }
        for den_deg in 1..=degree.min(MAX_DENOMINATOR_DEGREE) {
            let num_deg = degree - den_deg;
            let system = DMatrix::from_fn(den_deg, den_deg, |row, col| {
                let k = (num_deg + 1 + row) as isize;
                at(k - (col as isize + 1))
            });
            let rhs = DVector::from_fn(den_deg, |row, _| -c[num_deg + 1 + row]);
            let Some(d) = system.lu().solve(&rhs) else {
                continue;
            };
            if d.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let mut den = vec![1.0];
            den.extend(d.iter());
            let num: Vec<f64> = (0..=num_deg)
                .map(|k| (0..=k.min(den_deg)).map(|j| den[j] * c[k - j]).sum())
                .collect();
            if reproduces(&num, &den, c, tol, scale) {
                return Some((num, den));
            }
        }
    }
    None
}

fn reproduces(num: &[f64], den: &[f64], c: &[f64], tol: f64, scale: f64) -> bool {
    let mut fitted = Vec::with_capacity(c.len());
    for k in 0..c.len() {
        let mut v = num.get(k).copied().unwrap_or(0.0);
        for j in 1..den.len().min(k + 1) {
            v -= den[j] * fitted[k - j];
        }
        if !v.is_finite() {
            return false;
        }
        fitted.push(v);
    }
    fitted
        .iter()
        .zip(c)
        .all(|(f, c)| (f - c).abs() <= tol * c.abs() + 64.0 * f64::EPSILON * scale)
}

/// Jets of `P = N/D` and, when `N(z) != 0`, of `1/P = D/N` about `z`.
fn rational_jet(
    num: &[f64],
    den: &[f64],
    z: f64,
    m: usize,
    tol: f64,
) -> Option<(TruncatedSeries, Option<TruncatedSeries>)> {
    let jet = |poly: &[f64]| {
        let mut coeffs = taylor_shift(poly, z);
        coeffs.resize(coeffs.len().max(m + 1), 0.0);
        coeffs.truncate(m + 1);
        TruncatedSeries::new(coeffs, z).ok()
    };
    let n = jet(num)?;
    let d = jet(den)?;
    let den_scale: f64 = den
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * z.abs().powi(k as i32))
        .sum();
    if d.coeff(0).abs() <= tol * den_scale {
        return None;
    }
    Some((n.div(&d).ok()?, d.div(&n).ok()))
}
