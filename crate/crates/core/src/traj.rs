//! Trajectories: length-K sequences of vehicle states, true or sensed.

use crate::geometry::VehicleState;
use crate::{CoreError, Real, Result};

/// Motion pattern labels used by the ground-truth generator and as clustering
/// oracle labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionPattern {
    Straight,
    SingleLaneChange,
    DoubleLaneChange,
}

impl MotionPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            MotionPattern::Straight => "straight",
            MotionPattern::SingleLaneChange => "single_lane_change",
            MotionPattern::DoubleLaneChange => "double_lane_change",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "straight" => Ok(MotionPattern::Straight),
            "single_lane_change" => Ok(MotionPattern::SingleLaneChange),
            "double_lane_change" => Ok(MotionPattern::DoubleLaneChange),
            other => Err(CoreError::InvalidInput(format!("unknown motion pattern '{other}'"))),
        }
    }
}

/// A per-slot state sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory(pub Vec<VehicleState>);

impl Trajectory {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[VehicleState] {
        &self.0
    }

    /// Flatten to (x, y, v) rows.
    pub fn features(&self) -> Vec<[Real; 3]> {
        self.0.iter().map(|s| [s.x, s.y, s.v]).collect()
    }
}

impl FromIterator<VehicleState> for Trajectory {
    fn from_iter<I: IntoIterator<Item = VehicleState>>(iter: I) -> Self {
        Trajectory(iter.into_iter().collect())
    }
}
