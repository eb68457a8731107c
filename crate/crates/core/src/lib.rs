//! Return distributions of limit-order-book tick data at microscopic
//! timescales.
//!
//! The pipeline runs from raw tick records to fitted distribution
//! parameters:
//!
//! 1. [`tickdata`] parses tick files, applies the session calendar and builds
//!    per-instrument midprice series.
//! 2. [`returns`] forms event-time (Δt trades) and clock-time (Δt minutes) log
//!    returns, standardizes them per instrument and pools the ensemble.
//! 3. [`diststats`] estimates moments, log-binned densities and signed tail
//!    CCDFs.
//! 4. [`fitting`] fits the Student density by damped least squares and the
//!    power-law tails by log-log regression, with a Hill cross-check.
//! 5. [`pipeline`] orchestrates all of the above from a config file and emits
//!    report tables and curve files.
//!
//! [`synth`] generates samples and tick streams with known ground truth.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diststats;
pub mod error;
pub mod fitting;
pub mod pipeline;
pub mod returns;
pub mod synth;
pub mod tickdata;

pub use error::{Error, Result};
