//! Per-slot geometry and complex path gains.

use num_complex::Complex;

use crate::config::Scenario;
use crate::{CoreError, Real, Result, C64, C_LIGHT};

/// True kinematic state of the vehicle in one slot: position on the road
/// plane and the x-axis velocity component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: Real,
    pub y: Real,
    pub v: Real,
}

impl VehicleState {
    pub fn new(x: Real, y: Real, v: Real) -> Self {
        VehicleState { x, y, v }
    }
}

/// Derived per-slot quantities of one reflector: range, AoD, double-path
/// delay, Doppler shift (absent for the static RIS) and the complex gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGeometry {
    pub distance: Real,
    pub aod: Real,
    pub delay: Real,
    pub doppler: Option<Real>,
    pub gain: C64,
}

fn path_gain(wavelength: Real, rcs: Real, distance: Real) -> C64 {
    let mag = (wavelength * wavelength * rcs
        / (64.0 * std::f64::consts::PI.powi(3) * distance.powi(4)))
    .sqrt();
    let phase = 4.0 * std::f64::consts::PI * distance / wavelength;
    Complex::from_polar(mag, phase)
}

fn polar(x: Real, y: Real) -> Result<(Real, Real)> {
    let d = x.hypot(y);
    if d < 1e-9 {
        return Err(CoreError::InvalidInput("reflector at the array origin".into()));
    }
    Ok((d, y.atan2(x)))
}

/// Geometry and gain of the vehicle path.
pub fn vehicle_geometry(state: &VehicleState, scn: &Scenario) -> Result<SlotGeometry> {
    let (d, theta) = polar(state.x, state.y)?;
    let doppler = state.v * scn.carrier_hz * theta.cos() / C_LIGHT;
    Ok(SlotGeometry {
        distance: d,
        aod: theta,
        delay: 2.0 * d / C_LIGHT,
        doppler: Some(doppler),
        gain: path_gain(scn.wavelength_m, scn.vehicle_rcs_m2, d),
    })
}

/// Effective RIS cross-section κ_R = 4πηS²/λ².
pub fn ris_rcs(scn: &Scenario) -> Real {
    4.0 * std::f64::consts::PI * scn.ris_efficiency * scn.ris_area_m2 * scn.ris_area_m2
        / (scn.wavelength_m * scn.wavelength_m)
}

/// Geometry and gain of the RIS path (static: no Doppler).
pub fn ris_geometry(scn: &Scenario) -> Result<SlotGeometry> {
    let (d, theta) = polar(scn.ris_pos.0, scn.ris_pos.1)?;
    Ok(SlotGeometry {
        distance: d,
        aod: theta,
        delay: 2.0 * d / C_LIGHT,
        doppler: None,
        gain: path_gain(scn.wavelength_m, ris_rcs(scn), d),
    })
}
