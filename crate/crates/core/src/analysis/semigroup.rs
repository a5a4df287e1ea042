//! Counting-family generalization: a semigroup transform `ϕ` with
//! `ϕ(τ) = H_p(ϕ(pτ))`, where `H_p` is the pgf of `N_p`.
//!
//! * geometric: `ϕ(τ) = (1+τ)^{-1}`, `H_p(z) = pz/(1-qz)`, `p ∈ (0,1)`;
//! * classical: `ϕ(τ) = e^{-τ}`, `N_p = 1/p` a.s., `H_p(z) = z^{1/p}`,
//!   `p ∈ {1/m : m >= 1}`.

use serde::Serialize;

use super::split::{check_split_p, geometric_split, SplitReport};
use super::Settings;
use crate::error::{Error, Result};
use crate::lst::{check_lambda, LstSpec};
use crate::series::TruncatedSeries;
use crate::verdict::{Method, SequenceReport, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SemigroupFamily {
    Classical,
    Geometric,
}

impl std::str::FromStr for SemigroupFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Self::Classical),
            "geometric" => Ok(Self::Geometric),
            other => Err(Error::InvalidParameter(format!(
                "unknown semigroup '{other}' (expected geometric or classical)"
            ))),
        }
    }
}

impl SemigroupFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Geometric => "geometric",
        }
    }

    pub fn phi(self, t: f64) -> f64 {
        match self {
            Self::Classical => (-t).exp(),
            Self::Geometric => 1.0 / (1.0 + t),
        }
    }

    pub fn phi_prime(self, t: f64) -> f64 {
        match self {
            Self::Classical => -(-t).exp(),
            Self::Geometric => -(1.0 + t).powi(-2),
        }
    }

    /// Inverse on `(0, 1]`.
    pub fn phi_inv(self, y: f64) -> f64 {
        match self {
            Self::Classical => -y.ln(),
            Self::Geometric => 1.0 / y - 1.0,
        }
    }

    pub fn phi_series(self, t: &TruncatedSeries) -> Result<TruncatedSeries> {
        match self {
            Self::Classical => t.neg().exp(),
            Self::Geometric => t.add_scalar(1.0)?.recip(),
        }
    }

    pub fn phi_prime_series(self, t: &TruncatedSeries) -> Result<TruncatedSeries> {
        match self {
            Self::Classical => Ok(t.neg().exp()?.neg()),
            Self::Geometric => {
                let u = t.add_scalar(1.0)?.recip()?;
                Ok(u.mul(&u)?.neg())
            }
        }
    }

    pub fn phi_inv_series(self, y: &TruncatedSeries) -> Result<TruncatedSeries> {
        let y0 = y.coeff(0);
        if !(y0 > 0.0 && y0 <= 1.0) {
            return Err(Error::PreconditionNotMet(format!(
                "{y0} lies outside the range (0,1] of the {} semigroup transform",
                self.name()
            )));
        }
        match self {
            Self::Classical => Ok(y.ln()?.neg()),
            Self::Geometric => y.recip()?.add_scalar(-1.0),
        }
    }

    pub fn check_admissible(self, p: f64) -> Result<()> {
        let inadmissible = Error::InadmissibleP {
            family: self.name(),
            p,
        };
        match self {
            Self::Geometric => check_split_p(p).map_err(|_| inadmissible),
            Self::Classical => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(inadmissible);
                }
                let m = 1.0 / p;
                if (m - m.round()).abs() <= 1e-9 * m {
                    Ok(())
                } else {
                    Err(inadmissible)
                }
            }
        }
    }

    /// `H_p(z)`.
    pub fn h_p(self, p: f64, z: f64) -> Result<f64> {
        self.check_admissible(p)?;
        Ok(match self {
            Self::Classical => z.powi((1.0 / p).round() as i32),
            Self::Geometric => p * z / (1.0 - (1.0 - p) * z),
        })
    }

    /// `H_p^{-1}(y)`.
    pub fn h_p_inv(self, p: f64, y: f64) -> Result<f64> {
        self.check_admissible(p)?;
        Ok(match self {
            Self::Classical => y.powf(p),
            Self::Geometric => y / (p + (1.0 - p) * y),
        })
    }

    pub fn h_p_inv_series(self, p: f64, y: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check_admissible(p)?;
        match self {
            Self::Classical => y.powf(1.0 / (1.0 / p).round()),
            Self::Geometric => geometric_split(y, p),
        }
    }

    fn method(self) -> Method {
        match self {
            Self::Classical => Method::ClassicalKJet,
            Self::Geometric => Method::GeometricKJet,
        }
    }
}

/// Jet of `K(τ) = φ'(τ) / ϕ'(ϕ^{-1}(φ(τ)))` at `λ` and its signed
/// derivatives `(-1)^n K^{(n)}(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KJetReport {
    pub jet: TruncatedSeries,
    pub signed: SequenceReport,
    pub verdict: Verdict,
}

pub fn nid_k_jet(
    family: SemigroupFamily,
    spec: &LstSpec,
    lambda: f64,
    settings: &Settings,
) -> Result<KJetReport> {
    settings.validate()?;
    check_lambda(lambda)?;
    let order = settings.order;
    let phi = spec.jet(lambda, order + 1)?;
    let slope = phi.derivative()?;
    let level = family.phi_inv_series(&phi.truncate(order))?;
    let jet = slope.div(&family.phi_prime_series(&level)?)?;
    let signed: Vec<f64> = jet
        .derivatives()?
        .into_iter()
        .enumerate()
        .map(|(n, d)| if n % 2 == 0 { d } else { -d })
        .collect();
    let signed = SequenceReport::assess(signed, settings.tol);
    let verdict = Verdict::new(
        signed.first_violation,
        order,
        settings.tol,
        Some(lambda),
        family.method(),
    );
    Ok(KJetReport {
        jet,
        signed,
        verdict,
    })
}

/// `G(z; λ, p) = H_p^{-1}(φ(λ(1-z)))` and its pgf validity.
pub fn nid_split(
    family: SemigroupFamily,
    spec: &LstSpec,
    lambda: f64,
    p: f64,
    settings: &Settings,
) -> Result<SplitReport> {
    settings.validate()?;
    family.check_admissible(p)?;
    let pgf = spec.pgf_series(lambda, settings.order)?;
    let g = family.h_p_inv_series(p, &pgf)?;
    Ok(SplitReport::from_coeffs(g.into_coeffs(), settings.tol))
}
