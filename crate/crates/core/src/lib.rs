//! Extreme value analysis for finite, correlated, multivariate time series.
//!
//! Correlated series are rotated into the eigenbasis of their correlation
//! matrix and rescaled to unit variance ([`modes`]). Each resulting mode is
//! then analyzed with univariate tools: peaks-over-threshold GPD fits
//! ([`estimation`]), extremal-index estimates of exceedance clustering
//! ([`clustering`]) and, for nonstationary data, rolling local thresholds on
//! deseasonalized residuals ([`nonstationary`]).

// Negated comparisons are used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod io;
pub mod linalg;
pub mod modes;
pub mod nonstationary;
mod optim;
pub mod order_stats;
pub mod preprocess;
pub mod synthetic;

pub use error::{EvtError, Result};
