//! Spatial-temporal consistency of consecutive kinematic states.

use mirage_core::config::ConsistencyConfig;
use mirage_core::geometry::VehicleState;
use mirage_core::spoof::SensedState;
use mirage_core::Real;

/// Anything with a planar position and an x-axis speed.
pub trait Kinematic {
    fn xyv(&self) -> (Real, Real, Real);
}

impl Kinematic for VehicleState {
    fn xyv(&self) -> (Real, Real, Real) {
        (self.x, self.y, self.v)
    }
}

impl Kinematic for SensedState {
    fn xyv(&self) -> (Real, Real, Real) {
        (self.x, self.y, self.v)
    }
}

impl Kinematic for (Real, Real, Real) {
    fn xyv(&self) -> (Real, Real, Real) {
        *self
    }
}

/// Slack of the four kinematic constraints over one slot of duration `t`:
/// acceleration ceiling, acceleration floor, along-road advance, lateral
/// step. All entries nonnegative iff the transition is plausible.
pub fn consistency_vector(
    a: &impl Kinematic,
    b: &impl Kinematic,
    p: &ConsistencyConfig,
    t: Real,
) -> [Real; 4] {
    let (xa, ya, va) = a.xyv();
    let (xb, yb, vb) = b.xyv();
    let dv = vb - va;
    [
        p.a_max * t - dv,
        dv - p.a_min * t,
        p.delta_x - (xb - xa - va * t).abs(),
        p.delta_y - (yb - ya).abs(),
    ]
}

/// Reward of a transition: `Σᵢ min(0, cᵢ)` — zero exactly when consistent.
pub fn consistency_reward(c: &[Real; 4]) -> Real {
    c.iter().map(|v| v.min(0.0)).sum()
}

pub fn transition_ok(
    a: &impl Kinematic,
    b: &impl Kinematic,
    p: &ConsistencyConfig,
    t: Real,
) -> bool {
    consistency_vector(a, b, p, t).iter().all(|&c| c >= 0.0)
}

/// Fraction of consecutive transitions that are consistent (1.0 for a
/// trajectory shorter than two states).
pub fn clean_fraction<S: Kinematic>(states: &[S], p: &ConsistencyConfig, t: Real) -> Real {
    if states.len() < 2 {
        return 1.0;
    }
    let ok = states.windows(2).filter(|w| transition_ok(&w[0], &w[1], p, t)).count();
    ok as Real / (states.len() - 1) as Real
}
