//! Command-line harness over the simulator crates: experiment sweeps,
//! attack planning and tracking, dataset generation, detector training, and
//! the end-to-end pipeline. Every verb is deterministic under a fixed root
//! seed, and all CSV floats round-trip exactly.

pub mod cmd;
pub mod confusion;
pub mod dataset;
pub mod error;
pub mod setup;

pub use confusion::ConfusionMatrix;
pub use error::{CliError, Result};
pub use setup::{AttackerKind, Ctx};
