//! Defender side: cluster a one-class dataset of sensed trajectories into
//! behavioral types, learn one temporal-logic formula per type, and flag a
//! trajectory as spoofed when it violates the formula of its nearest type.

pub mod adam;
pub mod bundle;
pub mod detector;
pub mod dtcr;
pub mod gru;
pub mod kmeans;
pub mod tlinet;

pub type Real = f64;

/// A trajectory as the detector sees it: one (x, y, v) sample per slot.
pub type Traj = Vec<mirage_stl::Sample>;

#[derive(Debug, thiserror::Error)]
pub enum DetectError {
    #[error("stl: {0}")]
    Stl(#[from] mirage_stl::StlError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("clustering failed: {0}")]
    Clustering(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DetectError>;

pub use bundle::DetectorBundle;
pub use detector::{benchmark_detect, detect, Verdict};
pub use dtcr::{dtcr_train, ClusterModel, PseudoLabeled};
pub use tlinet::{tlinet_train, TlinetModel};
