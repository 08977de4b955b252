//! Partial-identification bounds on conditional treatment effects and regime
//! values under unmeasured confounding, decision criteria that turn bounds
//! into regimes, and one-step estimators with confidence intervals.
//!
//! Exact-law computations work stratum by stratum on discrete covariates;
//! the [`estimation`] module handles sampled data with regression nuisances.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds_bp;
pub mod bounds_msm;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod induced;
pub mod inference_ci;
pub mod interval;
pub mod law;
pub mod oracle;
pub mod regime;
pub mod regimes;

pub use error::{Error, Result};
pub use interval::{Identification, IdentificationStatus, Interval};
pub use law::{ObservationalLaw, PTable, StratifiedIVLaw, Stratum, StratumObs};
pub use regime::{Action, Regime};
