//! Weight-of-evidence credit scorecards with a two-stage treatment of
//! temporal degradation.
//!
//! Stage one builds point-in-time default classifiers: applications are
//! cleansed ([`dataset`]), binned and WoE-encoded ([`binning`]), and fed to a
//! logistic (IRLS) or boosted-stump trainer ([`models`]) under one of four
//! training strategies. Stage two ([`calibration`]) regresses the internal
//! default series on an exogenous quarterly series, forecasts next year's
//! monthly default under a chosen scenario and shifts the stage-one scores
//! onto that central tendency with a constant log-odds offset.
//!
//! The crate is `no_std` (it needs `alloc`). Parsing, file formats and the
//! command line live in the companion `scorecard` crate.
#![no_std]
// NaN must fail validation, so negated comparisons are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod binning;
pub mod calibration;
pub mod dataset;
pub mod date;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod math;
pub mod models;
pub mod pipeline;
pub mod rng;
pub mod synthgen;

pub use error::{Error, Result};
