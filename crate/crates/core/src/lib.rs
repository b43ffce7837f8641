//! Core signal model for a mmWave ISAC roadside unit facing a malicious
//! reflecting surface: steering/coupling kernels, per-slot geometry and path
//! gains, matched-filter Doppler curves (closed form and a brute-force
//! time-domain oracle), compensated echoes, and slot-level spoofing analysis
//! (feasibility sets, AoD maximum-likelihood estimation, sensed-state
//! assembly).
//!
//! Scalar-generic building blocks live in [`kernels`]; everything else is
//! concrete over [`Real`].

pub mod config;
pub mod echo;
pub mod geometry;
pub mod kernels;
pub mod mf;
pub mod rng;
pub mod spoof;
pub mod traj;

/// Concrete scalar used throughout the toolkit.
pub type Real = f64;
/// Concrete complex scalar.
pub type C64 = num_complex::Complex<f64>;

/// Speed of light, m/s.
pub const C_LIGHT: Real = 299_792_458.0;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
