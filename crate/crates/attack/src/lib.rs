//! Trajectory-level sensing attack: ground-truth motion generation,
//! spatial-temporal consistency scoring, the per-slot spoofing MDP built on
//! the physical sensing chain, a masked policy-gradient learner, an
//! exhaustive planning oracle, and the closed-loop beam-tracking evaluation.

pub mod consistency;
pub mod env;
pub mod gen;
pub mod grid;
pub mod oracle;
pub mod policy;
pub mod ppo;
pub mod track;

pub use mirage_core::Real;

#[derive(Debug, thiserror::Error)]
pub enum AttackError {
    #[error(transparent)]
    Core(#[from] mirage_core::CoreError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no feasible action in this slot")]
    NoFeasibleAction,
    #[error("training diverged: {0}")]
    Diverged(String),
}

pub type Result<T> = std::result::Result<T, AttackError>;
