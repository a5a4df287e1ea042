//! Truncated power series (jets) in one variable.
//!
//! A [`TruncatedSeries`] of order `N` stores `c_0..=c_N`, the Taylor
//! coefficients of a function about `center`, so that
//! `f(center + h) = Σ c_n h^n + O(h^{N+1})`. Arithmetic is exact at the
//! truncation order; every operation validates that its output is finite.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 64;

/// Default comparison tolerance (relative-absolute hybrid, see [`negligible`]).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest order for which `n!·c_n` is extracted.
pub const DERIVATIVE_CAP: usize = 150;

/// `|x| <= tol · max(1, scale)`.
#[inline]
pub fn negligible(x: f64, tol: f64, scale: f64) -> bool {
    x.abs() <= tol * scale.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
    center: f64,
}

fn finite(op: &'static str, coeffs: Vec<f64>, center: f64) -> Result<TruncatedSeries> {
    if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite { op, index });
    }
    Ok(TruncatedSeries { coeffs, center })
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<f64>, center: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "a series needs at least one coefficient".into(),
            ));
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "series center must be finite, got {center}"
            )));
        }
        finite("new", coeffs, center)
    }

    /// The constant `value` padded with zeros up to `order`.
    pub fn constant(value: f64, center: f64, order: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self::new(coeffs, center)
    }

    pub fn zero(center: f64, order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order + 1],
            center,
        }
    }

    pub fn one(center: f64, order: usize) -> Self {
        let mut s = Self::zero(center, order);
        s.coeffs[0] = 1.0;
        s
    }

    /// The jet of `x ↦ offset + slope·(x - center)`.
    pub fn affine(offset: f64, slope: f64, center: f64, order: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = offset;
        if order >= 1 {
            coeffs[1] = slope;
        }
        Self::new(coeffs, center)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient `n`, zero beyond the truncation order.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Self {
            coeffs: self.coeffs[..=n].to_vec(),
            center: self.center,
        }
    }

    /// Same coefficients, reinterpreted about another expansion point.
    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    fn common_order(&self, other: &Self) -> Result<usize> {
        if self.center != other.center {
            return Err(Error::CenterMismatch {
                left: self.center,
                right: other.center,
            });
        }
        Ok(self.order().min(other.order()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let n = self.common_order(other)?;
        let coeffs = (0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect();
        finite("add", coeffs, self.center)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let n = self.common_order(other)?;
        let coeffs = (0..=n).map(|k| self.coeffs[k] - other.coeffs[k]).collect();
        finite("sub", coeffs, self.center)
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let n = self.common_order(other)?;
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
            .collect();
        finite("mul", coeffs, self.center)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        finite("scale", coeffs, self.center)
    }

    pub fn add_scalar(&self, value: f64) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += value;
        finite("add_scalar", coeffs, self.center)
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            center: self.center,
        }
    }

    /// Multiplicative inverse, `s · recip(s) = 1` up to the order of `s`.
    ///
    /// Jet coefficients may grow geometrically, so the leading coefficient is
    /// only rejected when it is zero or subnormal; overflow surfaces as
    /// [`Error::NonFinite`].
    pub fn recip(&self) -> Result<Self> {
        let a = &self.coeffs;
        let a0 = a[0];
        if a0.is_nan() || a0.abs() < f64::MIN_POSITIVE {
            return Err(Error::NearSingular { leading: a0 });
        }
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0 / a0;
        for k in 1..=n {
            let sum: f64 = (1..=k).map(|j| a[j] * c[k - j]).sum();
            c[k] = -sum / a0;
        }
        finite("recip", c, self.center)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.recip()?)
    }

    pub fn exp(&self) -> Result<Self> {
        let a = &self.coeffs;
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        c[0] = a[0].exp();
        for k in 1..=n {
            let sum: f64 = (1..=k).map(|j| j as f64 * a[j] * c[k - j]).sum();
            c[k] = sum / k as f64;
        }
        finite("exp", c, self.center)
    }

    pub fn ln(&self) -> Result<Self> {
        let a = &self.coeffs;
        let a0 = a[0];
        if a0 <= 0.0 {
            return Err(Error::NonPositiveLeading {
                op: "log",
                leading: a0,
            });
        }
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        c[0] = a0.ln();
        for k in 1..=n {
            let sum: f64 = (1..k).map(|j| j as f64 * c[j] * a[k - j]).sum();
            c[k] = (a[k] - sum / k as f64) / a0;
        }
        finite("log", c, self.center)
    }

    /// `s^alpha = exp(alpha · log s)`; requires `c_0 > 0`.
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        if self.coeffs[0] <= 0.0 {
            return Err(Error::NonPositiveLeading {
                op: "real power",
                leading: self.coeffs[0],
            });
        }
        if alpha == 0.0 {
            return Ok(Self::one(self.center, self.order()));
        }
        self.ln()?.scale(alpha)?.exp()
    }

    /// d/dh of the jet; the result has one order less.
    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::InvalidParameter(
                "cannot differentiate an order-0 jet".into(),
            ));
        }
        let coeffs = (1..=self.order())
            .map(|k| k as f64 * self.coeffs[k])
            .collect();
        finite("derivative", coeffs, self.center)
    }

    /// `f^{(n)}(center) = n!·c_n` for `n = 0..=N`, capped at [`DERIVATIVE_CAP`].
    pub fn derivatives(&self) -> Result<Vec<f64>> {
        if self.order() > DERIVATIVE_CAP {
            return Err(Error::DerivativeCap {
                order: self.order(),
                cap: DERIVATIVE_CAP,
            });
        }
        let mut factorial = 1.0;
        let out: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if n > 0 {
                    factorial *= n as f64;
                }
                c * factorial
            })
            .collect();
        if let Some(index) = out.iter().position(|d| !d.is_finite()) {
            return Err(Error::NonFinite {
                op: "derivatives",
                index,
            });
        }
        Ok(out)
    }

    /// Coefficientwise comparison with [`negligible`], scaled by the larger
    /// of the two series.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.center != other.center || self.order() != other.order() {
            return false;
        }
        let scale = self.max_abs().max(other.max_abs());
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .all(|(a, b)| negligible(a - b, tol, scale))
    }
}
