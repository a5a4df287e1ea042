//! Catalog of Laplace-Stieltjes transforms and their Poisson mixtures.
//!
//! Every family is evaluated on jets by composing [`TruncatedSeries`]
//! primitives around an affine argument. The Taylor expansion of `φ` at
//! `τ0 > 0` uses the argument `τ = τ0 + h`; the pgf of the λ-Poisson mixture,
//! `P(z) = φ(λ(1 - z))`, uses `τ = λ - λz`. The second form is the first one
//! with the substitution `h = -λz`, so `p_n = (-λ)^n c_n(λ)` without ever
//! forming the (possibly huge or tiny) jet coefficients at `λ` explicitly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{negligible, TruncatedSeries};

/// Negative pmf coefficients below `-INVALID_LST_TOL · max p_n` mean the
/// transform is not completely monotone.
pub const INVALID_LST_TOL: f64 = 1e-7;

/// Description of a Laplace-Stieltjes transform `φ(τ) = E[e^{-τX}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub enum LstSpec {
    /// Point mass at `x0`: `e^{-x0 τ}`.
    Degenerate { x0: f64 },
    /// Exponential with mean `theta`: `(1 + θτ)^{-1}`.
    Exponential { theta: f64 },
    /// Continuous Mittag-Leffler: `(1 + aτ^α)^{-1}`, `α ∈ (0, 1]`.
    MittagLeffler { alpha: f64, a: f64 },
    /// Squared Mittag-Leffler transform `(1 + τ^α)^{-2}`, `α ∈ (1/2, 1]`.
    MlSquared { alpha: f64 },
    /// `(1 + log(1 + τ))^{-1}`.
    LogMixture,
    /// `X + x0`: `e^{-x0 τ} φ_inner(τ)`.
    Shift { x0: f64, inner: Box<LstSpec> },
    /// Sum of independent parts: product of their transforms.
    Convolution { parts: Vec<LstSpec> },
    /// `cX`: `φ_inner(cτ)`.
    ScaleArg { c: f64, inner: Box<LstSpec> },
}

fn require(ok: bool, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    require(
        v.is_finite(),
        format!("parameter '{name}' must be finite, got {v}"),
    )
}

impl LstSpec {
    pub fn degenerate(x0: f64) -> Result<Self> {
        Self::Degenerate { x0 }.validated()
    }

    pub fn exponential(theta: f64) -> Result<Self> {
        Self::Exponential { theta }.validated()
    }

    pub fn mittag_leffler(alpha: f64, a: f64) -> Result<Self> {
        Self::MittagLeffler { alpha, a }.validated()
    }

    pub fn ml_squared(alpha: f64) -> Result<Self> {
        Self::MlSquared { alpha }.validated()
    }

    pub fn shift(x0: f64, inner: LstSpec) -> Result<Self> {
        Self::Shift {
            x0,
            inner: Box::new(inner),
        }
        .validated()
    }

    pub fn convolution(parts: Vec<LstSpec>) -> Result<Self> {
        Self::Convolution { parts }.validated()
    }

    pub fn scale_arg(c: f64, inner: LstSpec) -> Result<Self> {
        Self::ScaleArg {
            c,
            inner: Box::new(inner),
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks every parameter range, recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Degenerate { x0 } => {
                require_finite("x0", *x0)?;
                require(*x0 >= 0.0, "x0 out of range [0,inf)")
            }
            Self::Exponential { theta } => {
                require_finite("theta", *theta)?;
                require(*theta > 0.0, "theta out of range (0,inf)")
            }
            Self::MittagLeffler { alpha, a } => {
                require_finite("alpha", *alpha)?;
                require_finite("a", *a)?;
                require(*alpha > 0.0 && *alpha <= 1.0, "alpha out of range (0,1]")?;
                require(*a > 0.0, "a out of range (0,inf)")
            }
            Self::MlSquared { alpha } => {
                require_finite("alpha", *alpha)?;
                require(*alpha > 0.5 && *alpha <= 1.0, "alpha out of range (1/2,1]")
            }
            Self::LogMixture => Ok(()),
            Self::Shift { x0, inner } => {
                require_finite("x0", *x0)?;
                require(*x0 > 0.0, "shift x0 out of range (0,inf)")?;
                inner.validate()
            }
            Self::Convolution { parts } => {
                require(!parts.is_empty(), "convolution needs at least one part")?;
                parts.iter().try_for_each(LstSpec::validate)
            }
            Self::ScaleArg { c, inner } => {
                require_finite("c", *c)?;
                require(*c > 0.0, "c out of range (0,inf)")?;
                inner.validate()
            }
        }
    }

    /// Scalar value `φ(τ)` for `τ >= 0`, from the closed forms.
    pub fn value(&self, tau: f64) -> f64 {
        match self {
            Self::Degenerate { x0 } => (-x0 * tau).exp(),
            Self::Exponential { theta } => 1.0 / (1.0 + theta * tau),
            Self::MittagLeffler { alpha, a } => 1.0 / (1.0 + a * tau.powf(*alpha)),
            Self::MlSquared { alpha } => (1.0 + tau.powf(*alpha)).powi(-2),
            Self::LogMixture => 1.0 / (1.0 + tau.ln_1p()),
            Self::Shift { x0, inner } => (-x0 * tau).exp() * inner.value(tau),
            Self::Convolution { parts } => parts.iter().map(|p| p.value(tau)).product(),
            Self::ScaleArg { c, inner } => inner.value(c * tau),
        }
    }

    /// `φ(arg(h))` as a jet. `arg` must have a positive constant term.
    fn compose(&self, arg: &TruncatedSeries) -> Result<TruncatedSeries> {
        match self {
            Self::Degenerate { x0 } => arg.scale(-x0)?.exp(),
            Self::Exponential { theta } => arg.scale(*theta)?.add_scalar(1.0)?.recip(),
            Self::MittagLeffler { alpha, a } => {
                arg.powf(*alpha)?.scale(*a)?.add_scalar(1.0)?.recip()
            }
            Self::MlSquared { alpha } => arg.powf(*alpha)?.add_scalar(1.0)?.powf(-2.0),
            Self::LogMixture => arg.add_scalar(1.0)?.ln()?.add_scalar(1.0)?.recip(),
            Self::Shift { x0, inner } => arg.scale(-x0)?.exp()?.mul(&inner.compose(arg)?),
            Self::Convolution { parts } => {
                let mut acc = TruncatedSeries::one(arg.center(), arg.order());
                for part in parts {
                    acc = acc.mul(&part.compose(arg)?)?;
                }
                Ok(acc)
            }
            Self::ScaleArg { c, inner } => inner.compose(&arg.scale(*c)?),
        }
    }

    /// Taylor coefficients of `φ` about `tau0 > 0` up to `order`.
    pub fn jet(&self, tau0: f64, order: usize) -> Result<TruncatedSeries> {
        self.validate()?;
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expansion point must be positive, got {tau0}"
            )));
        }
        self.compose(&TruncatedSeries::affine(tau0, 1.0, tau0, order)?)
    }

    /// Coefficients of `z ↦ φ(λ(1 - z))` about `z = 0`, without validity checks.
    pub fn pgf_series(&self, lambda: f64, order: usize) -> Result<TruncatedSeries> {
        self.validate()?;
        check_lambda(lambda)?;
        self.compose(&TruncatedSeries::affine(lambda, -lambda, 0.0, order)?)
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    require(
        lambda > 0.0 && lambda.is_finite(),
        format!("lambda out of range (0,inf), got {lambda}"),
    )
}

/// Alias matching the operation name used throughout the docs.
pub fn lst_jet(spec: &LstSpec, tau0: f64, order: usize) -> Result<TruncatedSeries> {
    spec.jet(tau0, order)
}

/// Sanity check on a grid: `φ(0) = 1` and `φ` nonincreasing.
pub fn sanity_check(spec: &LstSpec, grid: &[f64]) -> Result<()> {
    spec.validate()?;
    let at_zero = spec.value(0.0);
    if (at_zero - 1.0).abs() > 1e-12 {
        return Err(Error::PreconditionNotMet(format!("phi(0) = {at_zero}")));
    }
    let mut prev = at_zero;
    for &t in grid {
        let v = spec.value(t);
        if !v.is_finite() || v > prev + 1e-12 {
            return Err(Error::PreconditionNotMet(format!(
                "phi is not nonincreasing at tau = {t}"
            )));
        }
        prev = v;
    }
    Ok(())
}

/// Truncated pmf on `{0, .., N}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    probs: Vec<f64>,
    lambda: Option<f64>,
}

impl Pmf {
    /// Validates a raw pmf: finite, each `p_n >= -tol`, total mass `<= 1 + tol`.
    pub fn new(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty pmf".into()));
        }
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < -tol {
                return Err(Error::InvalidLst { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if sum > 1.0 + tol {
            return Err(Error::MassExceeded { sum });
        }
        Ok(Self {
            probs,
            lambda: None,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// The λ-Poisson mixture with mixing transform `spec`:
/// `p_n = (-1)^n λ^n φ^{(n)}(λ) / n!`.
pub fn poisson_mixture_pmf(spec: &LstSpec, lambda: f64, order: usize) -> Result<Pmf> {
    let probs = spec.pgf_series(lambda, order)?.into_coeffs();
    let largest = probs.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
    for (index, &value) in probs.iter().enumerate() {
        if value < -INVALID_LST_TOL * largest {
            return Err(Error::InvalidLst { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if !negligible((sum - 1.0).max(0.0), INVALID_LST_TOL, 1.0) {
        return Err(Error::MassExceeded { sum });
    }
    Ok(Pmf {
        probs,
        lambda: Some(lambda),
    })
}

pub const DEGENERATE: &str = "degenerate";
pub const EXPONENTIAL: &str = "exponential";
pub const MITTAG_LEFFLER: &str = "mittag_leffler";
pub const ML_SQUARED: &str = "ml_squared";
pub const LOG_MIXTURE: &str = "log_mixture";
pub const SHIFT: &str = "shift";
pub const CONVOLUTION: &str = "convolution";
pub const SCALE_ARG: &str = "scale_arg";

/// Wire form: `{"family": "...", "params": {...}, "inner": ...}`. `inner` is a
/// single spec for `shift`/`scale_arg` and a list for `convolution`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    family: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inner: Option<RawInner>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawInner {
    One(Box<RawSpec>),
    Many(Vec<RawSpec>),
}

struct Params<'a> {
    family: &'a str,
    map: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn get(&self, name: &str) -> Result<f64> {
        self.map.get(name).copied().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "missing parameter '{name}' for family '{}'",
                self.family
            ))
        })
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidParameter(format!(
                "unknown parameter '{k}' for family '{}'",
                self.family
            ))),
            None => Ok(()),
        }
    }
}

fn single_inner(family: &str, inner: Option<RawInner>) -> Result<Box<LstSpec>> {
    match inner {
        Some(RawInner::One(raw)) => Ok(Box::new(LstSpec::try_from(*raw)?)),
        _ => Err(Error::InvalidParameter(format!(
            "family '{family}' needs a single 'inner' spec"
        ))),
    }
}

impl TryFrom<RawSpec> for LstSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let params = Params {
            family: &raw.family,
            map: &raw.params,
        };
        let no_inner = |inner: &Option<RawInner>| {
            require(
                inner.is_none(),
                format!("family '{}' takes no 'inner'", raw.family),
            )
        };
        let spec = match raw.family.as_str() {
            DEGENERATE => {
                params.only(&["x0"])?;
                no_inner(&raw.inner)?;
                Self::Degenerate {
                    x0: params.get("x0")?,
                }
            }
            EXPONENTIAL => {
                params.only(&["theta"])?;
                no_inner(&raw.inner)?;
                Self::Exponential {
                    theta: params.get("theta")?,
                }
            }
            MITTAG_LEFFLER => {
                params.only(&["alpha", "a"])?;
                no_inner(&raw.inner)?;
                Self::MittagLeffler {
                    alpha: params.get("alpha")?,
                    a: params.get("a")?,
                }
            }
            ML_SQUARED => {
                params.only(&["alpha"])?;
                no_inner(&raw.inner)?;
                Self::MlSquared {
                    alpha: params.get("alpha")?,
                }
            }
            LOG_MIXTURE => {
                params.only(&[])?;
                no_inner(&raw.inner)?;
                Self::LogMixture
            }
            SHIFT => {
                params.only(&["x0"])?;
                Self::Shift {
                    x0: params.get("x0")?,
                    inner: single_inner(SHIFT, raw.inner)?,
                }
            }
            SCALE_ARG => {
                params.only(&["c"])?;
                Self::ScaleArg {
                    c: params.get("c")?,
                    inner: single_inner(SCALE_ARG, raw.inner)?,
                }
            }
            CONVOLUTION => {
                params.only(&[])?;
                let parts = match raw.inner {
                    Some(RawInner::Many(list)) => list
                        .into_iter()
                        .map(LstSpec::try_from)
                        .collect::<Result<Vec<_>>>()?,
                    _ => {
                        return Err(Error::InvalidParameter(
                            "family 'convolution' needs a list of 'inner' specs".into(),
                        ))
                    }
                };
                Self::Convolution { parts }
            }
            other => {
                return Err(Error::UnknownFamily(other.to_string()));
            }
        };
        spec.validated()
    }
}

impl From<LstSpec> for RawSpec {
    fn from(spec: LstSpec) -> Self {
        let raw = |family: &str, params: &[(&str, f64)], inner: Option<RawInner>| RawSpec {
            family: family.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            inner,
        };
        match spec {
            LstSpec::Degenerate { x0 } => raw(DEGENERATE, &[("x0", x0)], None),
            LstSpec::Exponential { theta } => raw(EXPONENTIAL, &[("theta", theta)], None),
            LstSpec::MittagLeffler { alpha, a } => {
                raw(MITTAG_LEFFLER, &[("alpha", alpha), ("a", a)], None)
            }
            LstSpec::MlSquared { alpha } => raw(ML_SQUARED, &[("alpha", alpha)], None),
            LstSpec::LogMixture => raw(LOG_MIXTURE, &[], None),
            LstSpec::Shift { x0, inner } => raw(
                SHIFT,
                &[("x0", x0)],
                Some(RawInner::One(Box::new((*inner).into()))),
            ),
            LstSpec::ScaleArg { c, inner } => raw(
                SCALE_ARG,
                &[("c", c)],
                Some(RawInner::One(Box::new((*inner).into()))),
            ),
            LstSpec::Convolution { parts } => raw(
                CONVOLUTION,
                &[],
                Some(RawInner::Many(parts.into_iter().map(Into::into).collect())),
            ),
        }
    }
}
