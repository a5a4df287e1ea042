//! Membership tests built on the transform catalog and the recursions.

mod precheck;
mod qgid;
mod semigroup;
mod split;

pub use precheck::{
    mixture_precheck, Condition, Evaluation, PointViolation, PrecheckPoint, PrecheckReport,
    DEFAULT_PRECHECK_ORDER, DEFAULT_Z_GRID,
};
pub use qgid::{
    gid_grid_test, k_jet, q_series, qgid_test, threshold_search, GridReport, QMethod, QSeries,
    Threshold, ThresholdSearch,
};
pub use semigroup::{nid_k_jet, nid_split, KJetReport, SemigroupFamily};
pub use split::{reconstruct_check, split_pgf, SplitReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{DEFAULT_ORDER, DEFAULT_TOL};

/// Truncation order and tolerance shared by every finite-order test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub order: usize,
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            tol: DEFAULT_TOL,
        }
    }
}

impl Settings {
    pub fn new(order: usize, tol: f64) -> Result<Self> {
        let s = Self { order, tol };
        s.validate()?;
        Ok(s)
    }

    pub fn with_order(order: usize) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidParameter("order must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance out of range (0,1), got {}",
                self.tol
            )));
        }
        Ok(())
    }
}
