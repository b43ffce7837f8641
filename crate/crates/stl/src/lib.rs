//! Discrete-time signal temporal logic over (x, y, v) trajectories.
//!
//! The exact semantics follow the usual max-based recursion; the smooth
//! variant swaps every max for a softmax average and makes time windows,
//! operator selectors, and predicate coefficients differentiable, which is
//! what the formula-learning code trains against.

pub mod ast;
pub mod parse;
pub mod robust;
pub mod smooth;

pub type Real = f64;

/// Feature dimension of a trajectory sample.
pub const DIM: usize = 3;
/// Grammar names of the sample features, in order.
pub const FEATURE_NAMES: [&str; DIM] = ["x", "y", "v"];

/// One trajectory sample, ordered as [`FEATURE_NAMES`].
pub type Sample = [Real; DIM];

#[derive(Debug, thiserror::Error)]
pub enum StlError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("temporal window out of range at {path}: slots [{lo}, {hi}] outside [0, {len})")]
    WindowOutOfRange { path: String, lo: usize, hi: usize, len: usize },
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, StlError>;

pub use ast::StlFormula;
pub use parse::{format_formula, parse_formula};
pub use robust::{misclassification_rate, robustness, satisfies};
pub use smooth::{smooth_robustness, time_window_indicator, SoftFormula};
