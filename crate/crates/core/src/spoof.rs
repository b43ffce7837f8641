//! Slot-level spoofing analysis: where the RIS can plant a Doppler peak, how
//! large it must be, what the angle MLE returns under attack, and the sensed
//! kinematic state the RSU assembles.

use num_complex::Complex;

use crate::config::Scenario;
use crate::geometry::SlotGeometry;
use crate::kernels::{beam_coupling, dirichlet, sinc};
use crate::{CoreError, Real, Result, C64, C_LIGHT};

const PI: Real = std::f64::consts::PI;

/// True iff the RIS can gate its echo into the vehicle's delay cell:
/// `d_R ≤ d_k ≤ d_R + Δ_max·c/2`.
pub fn spoofing_range_check(d_vehicle: Real, d_ris: Real, max_delay: Real) -> bool {
    d_vehicle >= d_ris && d_vehicle <= d_ris + max_delay * C_LIGHT / 2.0
}

/// Element-count threshold above which the spoofed peak can dominate:
/// `M* = √(κ_V/(4πη))·(λ/S)·|f(n_tx, ·θ_k·)/f(n_tx, ·θ_R·)|`.
///
/// A beam null exactly on the RIS direction makes the threshold infinite.
pub fn ris_size_threshold(scn: &Scenario, theta0: Real, theta_k: Real, theta_r: Real) -> Real {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f_veh = dirichlet(scn.n_tx, half_pi * (theta0.cos() - theta_k.cos()));
    let f_ris = dirichlet(scn.n_tx, half_pi * (theta0.cos() - theta_r.cos()));
    let base = (scn.vehicle_rcs_m2 / (4.0 * PI * scn.ris_efficiency)).sqrt() * scn.wavelength_m
        / scn.ris_area_m2;
    if f_ris == 0.0 {
        return Real::INFINITY;
    }
    base * (f_veh / f_ris).abs()
}

/// Wrap a spoofing frequency into the principal interval `(0, 1/ΔT]`
/// (exact multiples map to the top, not zero).
pub fn wrap_frequency(mu_t: Real, phase_interval: Real) -> Real {
    let period = 1.0 / phase_interval;
    let r = mu_t.rem_euclid(period);
    if r == 0.0 {
        period
    } else {
        r
    }
}

/// Feasible spoofing frequencies on a grid: where the injected wrapped peak
/// beats the true Doppler peak (envelope approximation).
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    pub grid_freqs: Vec<Real>,
    pub mask: Vec<bool>,
    pub lhs_values: Vec<Real>,
    /// Set when the element count sits below the margin·threshold premise.
    pub low_confidence: bool,
}

impl FeasibleSet {
    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn feasible_freqs(&self) -> impl Iterator<Item = Real> + '_ {
        self.grid_freqs
            .iter()
            .zip(&self.mask)
            .filter_map(|(&f, &m)| if m { Some(f) } else { None })
    }
}

/// Evaluate the peak-dominance inequality at every grid frequency:
/// `M²C_R[sinc²(Δμ̃ΔT) − sinc²(μ_kΔT)·f²(N_sub, πΔT(μ_k−Δμ̃))]
///  − C_V[1 − sinc²(T(μ_k−Δμ̃))] ≥ 0`.
pub fn feasible_set(
    scn: &Scenario,
    veh: &SlotGeometry,
    ris: &SlotGeometry,
    theta0: Real,
    grid: &[Real],
) -> Result<FeasibleSet> {
    if grid.is_empty() {
        return Err(CoreError::InvalidInput("empty frequency grid".into()));
    }
    let mu_k = veh
        .doppler
        .ok_or_else(|| CoreError::InvalidInput("vehicle geometry lacks Doppler".into()))?;
    let (c_v, c_r) = crate::mf::envelope_weights(scn, veh, ris, theta0);
    let m2 = (scn.ris_elements * scn.ris_elements) as Real;
    let t = scn.slot_s;
    let dt = scn.phase_interval_s;
    let s_true = sinc(mu_k * dt);
    let mut mask = Vec::with_capacity(grid.len());
    let mut lhs_values = Vec::with_capacity(grid.len());
    for &dmu in grid {
        let f_leak = dirichlet(scn.n_sub, PI * dt * (mu_k - dmu));
        let s_spoof = sinc(dmu * dt);
        let s_v = sinc(t * (mu_k - dmu));
        let lhs = m2 * c_r * (s_spoof * s_spoof - s_true * s_true * f_leak * f_leak)
            - c_v * (1.0 - s_v * s_v);
        mask.push(lhs >= 0.0);
        lhs_values.push(lhs);
    }
    let threshold = ris_size_threshold(scn, theta0, veh.aod, ris.aod);
    let low_confidence = (scn.ris_elements as Real) < scn.ris_margin * threshold;
    Ok(FeasibleSet { grid_freqs: grid.to_vec(), mask, lhs_values, low_confidence })
}

/// Angle grid-search settings for the MLE.
#[derive(Debug, Clone, Copy)]
pub struct MleGrid {
    pub step_deg: Real,
    pub refine_deg: Real,
}

impl Default for MleGrid {
    fn default() -> Self {
        MleGrid { step_deg: 0.1, refine_deg: 0.01 }
    }
}

fn mle_objective(
    y: &[C64],
    scn: &Scenario,
    beta_v: C64,
    theta0: Real,
    y_norm2: Real,
    theta: Real,
) -> Real {
    // ‖y − T·β_V·b(θ)·h(θ,θ0)‖² expanded; ‖b‖ = 1.
    let t = scn.slot_s;
    let cos_t = theta.cos();
    let w = Complex::from_polar(1.0, -PI * cos_t);
    let mut p = Complex::new(1.0, 0.0);
    let mut inner = Complex::new(0.0, 0.0);
    for yi in y {
        inner += yi.conj() * p;
        p *= w;
    }
    inner /= (scn.n_rx as Real).sqrt();
    let h = beam_coupling(scn.n_tx, theta, theta0);
    let model = t * beta_v * h;
    y_norm2 - 2.0 * (inner * model).re + model.norm_sqr()
}

/// Maximum-likelihood AoD from a compensated echo: exhaustive coarse grid
/// over (0°, 180°) followed by golden-section refinement. Ties break toward
/// the smallest angle.
pub fn aod_mle(
    y: &[C64],
    scn: &Scenario,
    beta_v: C64,
    theta0: Real,
    grid: MleGrid,
) -> Result<Real> {
    if y.len() != scn.n_rx {
        return Err(CoreError::InvalidInput("echo length does not match receive array".into()));
    }
    let y_norm2: Real = y.iter().map(|c| c.norm_sqr()).sum();
    if y_norm2 == 0.0 {
        return Err(CoreError::InvalidInput("all-zero echo".into()));
    }
    let step = grid.step_deg.to_radians();
    let n_steps = (PI / step).floor() as usize;
    let mut best_theta = step;
    let mut best_val = Real::INFINITY;
    for i in 1..n_steps {
        let theta = i as Real * step;
        // Broadside is skipped: the kinematic inversion of the sensed state
        // is singular there, so the estimator never reports it.
        if theta.cos().abs() < 1e-9 {
            continue;
        }
        let val = mle_objective(y, scn, beta_v, theta0, y_norm2, theta);
        if val < best_val {
            best_val = val;
            best_theta = theta;
        }
    }
    // Golden-section refinement inside the bracketing interval.
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = (best_theta - step).max(step * 1e-3);
    let mut b = (best_theta + step).min(PI - step * 1e-3);
    let tol = grid.refine_deg.to_radians();
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = mle_objective(y, scn, beta_v, theta0, y_norm2, c);
    let mut fd = mle_objective(y, scn, beta_v, theta0, y_norm2, d);
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = mle_objective(y, scn, beta_v, theta0, y_norm2, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = mle_objective(y, scn, beta_v, theta0, y_norm2, d);
        }
    }
    let mid = 0.5 * (a + b);
    let f_mid = mle_objective(y, scn, beta_v, theta0, y_norm2, mid);
    Ok(if f_mid <= best_val && mid.cos().abs() >= 1e-9 { mid } else { best_theta })
}

/// Sensed kinematic state assembled from (τ̂, μ̂, θ̂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensedState {
    pub x: Real,
    pub y: Real,
    pub v: Real,
    pub aod: Real,
    pub doppler: Real,
    pub delay: Real,
}

/// Invert the range/angle/Doppler triplet into a position and velocity.
///
/// The default range convention divides the double-path delay by two so a
/// clean round trip reproduces the true state; `literal_position` keeps the
/// undivided form.
pub fn state_estimate(tau: Real, mu: Real, theta: Real, scn: &Scenario) -> Result<SensedState> {
    let cos_t = theta.cos();
    if cos_t.abs() < 1e-12 {
        return Err(CoreError::Numerical(
            "sensed AoD at broadside: velocity unobservable".into(),
        ));
    }
    let range = if scn.literal_position { C_LIGHT * tau } else { C_LIGHT * tau / 2.0 };
    Ok(SensedState {
        x: range * cos_t,
        y: range * theta.sin(),
        v: mu * C_LIGHT / (scn.carrier_hz * cos_t),
        aod: theta,
        doppler: mu,
        delay: tau,
    })
}
