use alloc::string::String;

use crate::date::Quarter;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid date `{0}`")]
    InvalidDate(String),
    #[error("invalid period `{0}`")]
    InvalidPeriod(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("both classes must be present ({0})")]
    SingleClass(String),
    #[error("no inflation factor configured for year {0}")]
    MissingInflationYear(i32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("IRLS did not converge after {iterations} iterations (gradient max-norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },
    #[error("linear system is not positive definite")]
    Singular,
    #[error("no decision stump beats weighted error 0.5")]
    NoWeakLearner,
    #[error("month {0} slice does not contain both classes")]
    MonthMissingClass(u8),
    #[error("interaction `{0}` has fewer than two populated cells")]
    DegenerateInteraction(String),
    #[error("k = {k} folds exceeds the smallest class count {min_class}")]
    TooManyFolds { k: usize, min_class: usize },
    #[error("bin structures differ ({0} vs {1} bins)")]
    BinMismatch(usize, usize),
    #[error("quarter {0} has no neighbouring observation")]
    NoNeighbours(Quarter),
    #[error("predictor has no value for quarter {0}")]
    MissingPredictor(Quarter),
    #[error("series: {0}")]
    Series(String),
    #[error("target {0} outside (0, 1)")]
    TargetOutOfRange(f64),
    #[error("offset root-finding failed (bracket [{lo}, {hi}], residual {residual:e})")]
    RootNotFound { lo: f64, hi: f64, residual: f64 },
    #[error("observed default rate for month {0} is zero")]
    ZeroObserved(usize),
    #[error("cut-off {0} approves no application")]
    EmptyApproval(f64),
    #[error("infeasible macro specification: {0}")]
    InfeasibleMacro(String),
}
