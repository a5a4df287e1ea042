//! Finite-order tests for geometric and quasi-geometric infinite divisibility
//! of nonnegative laws, computed on truncated power series of their Laplace
//! transforms and of the induced Poisson-mixture pmfs.

pub mod analysis;
pub mod error;
pub mod lst;
pub mod recursions;
pub mod series;
pub mod verdict;

pub use error::{Error, Result};
pub use lst::{LstSpec, Pmf};
pub use series::TruncatedSeries;
pub use verdict::{Method, SequenceReport, Verdict, Violation};
