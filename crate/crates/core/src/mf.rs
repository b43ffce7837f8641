//! Matched-filter Doppler response at the true delay gate, in closed form.
//!
//! With the delay axis pinned to the vehicle's true delay and a beam steered
//! to `θ0`, the per-receive-antenna filter output against a trial Doppler `μ`
//! is a coherent sum of the vehicle path and (optionally) the RIS spoof path
//! whose staircase phases inject a tone at `μ̃`. The exact mode keeps the
//! per-antenna complex sum; the approximate mode drops the cross terms,
//! leaving the two squared envelopes.

use num_complex::Complex;

use crate::config::Scenario;
use crate::geometry::SlotGeometry;
use crate::kernels::{beam_coupling, dirichlet, sinc};
use crate::{CoreError, Real, Result, C64};

/// Doppler response curve on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedFilterCurve {
    pub freqs: Vec<Real>,
    pub mags: Vec<Real>,
    pub peak_freq: Real,
}

impl MatchedFilterCurve {
    pub fn from_samples(freqs: Vec<Real>, mags: Vec<Real>) -> Result<Self> {
        if freqs.is_empty() || freqs.len() != mags.len() {
            return Err(CoreError::InvalidInput("empty or mismatched curve grid".into()));
        }
        let mut best = 0;
        for i in 1..mags.len() {
            if mags[i] > mags[best] {
                best = i;
            }
        }
        let peak_freq = freqs[best];
        Ok(MatchedFilterCurve { freqs, mags, peak_freq })
    }

    pub fn peak_mag(&self) -> Real {
        self.mags.iter().cloned().fold(0.0, Real::max)
    }

    /// Value at the grid point nearest to `freq`.
    pub fn nearest(&self, freq: Real) -> Real {
        let mut best = 0;
        let mut dist = Real::INFINITY;
        for (i, &f) in self.freqs.iter().enumerate() {
            let d = (f - freq).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        self.mags[best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfMode {
    Exact,
    Approx,
}

/// Default Doppler grid: 1 Hz spacing over (0, 1/ΔT].
pub fn default_grid(scn: &Scenario) -> Vec<Real> {
    let top = scn.wrap_period().round() as usize;
    (1..=top).map(|i| i as Real).collect()
}

/// Squared-envelope weights of the two paths under beam `θ0`:
/// `C_V = |β_V|²·f²(n_tx, ·)` and `C_R = |β_R|²·f²(n_tx, ·)`.
pub fn envelope_weights(
    scn: &Scenario,
    veh: &SlotGeometry,
    ris: &SlotGeometry,
    theta0: Real,
) -> (Real, Real) {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let fv = dirichlet(scn.n_tx, half_pi * (theta0.cos() - veh.aod.cos()));
    let fr = dirichlet(scn.n_tx, half_pi * (theta0.cos() - ris.aod.cos()));
    (veh.gain.norm_sqr() * fv * fv, ris.gain.norm_sqr() * fr * fr)
}

/// Closed-form Doppler curve. `spoof` carries the RIS geometry and the
/// (unwrapped) spoofing frequency `μ̃`; `None` disables the spoof path.
pub fn matched_filter_closed(
    scn: &Scenario,
    veh: &SlotGeometry,
    spoof: Option<(&SlotGeometry, Real)>,
    theta0: Real,
    grid: &[Real],
    mode: MfMode,
) -> Result<MatchedFilterCurve> {
    if grid.is_empty() {
        return Err(CoreError::InvalidInput("empty Doppler grid".into()));
    }
    let t = scn.slot_s;
    let dt = scn.phase_interval_s;
    let mu_k = veh
        .doppler
        .ok_or_else(|| CoreError::InvalidInput("vehicle geometry lacks Doppler".into()))?;
    let gamma2 = (scn.n_tx * scn.n_rx) as Real;
    let pref = scn.tx_power_w * t * t * gamma2;

    let mags: Vec<Real> = match mode {
        MfMode::Exact => {
            let h_v = beam_coupling(scn.n_tx, veh.aod, theta0);
            let cos_v = veh.aod.cos();
            let spoof_parts = spoof.map(|(ris, mu_t)| {
                let h_r = beam_coupling(scn.n_tx, ris.aod, theta0);
                let amp = h_r
                    * ris.gain
                    * (scn.ris_elements as Real)
                    * Complex::from_polar(1.0, std::f64::consts::PI * mu_t * dt);
                (amp, ris.aod.cos(), mu_t)
            });
            grid.iter()
                .map(|&mu| {
                    let ev = Complex::from_polar(1.0, -std::f64::consts::PI * (mu - mu_k) * t)
                        * sinc(t * (mu - mu_k));
                    let a_v: C64 = veh.gain * h_v * ev;
                    let a_r: C64 = match &spoof_parts {
                        Some((amp, _, mu_t)) => {
                            amp * Complex::from_polar(
                                1.0,
                                -std::f64::consts::PI * (mu - mu_t) * t,
                            ) * sinc(mu * dt)
                                * dirichlet(scn.n_sub, std::f64::consts::PI * dt * (mu - mu_t))
                        }
                        None => Complex::new(0.0, 0.0),
                    };
                    let mut acc = 0.0;
                    for nr in 0..scn.n_rx {
                        let pv = Complex::from_polar(1.0, -std::f64::consts::PI * nr as Real * cos_v);
                        let pr = match &spoof_parts {
                            Some((_, cos_r, _)) => Complex::from_polar(
                                1.0,
                                -std::f64::consts::PI * nr as Real * cos_r,
                            ),
                            None => Complex::new(0.0, 0.0),
                        };
                        acc += (a_v * pv + a_r * pr).norm_sqr();
                    }
                    pref / scn.n_rx as Real * acc
                })
                .collect()
        }
        MfMode::Approx => {
            let (c_v, spoof_parts) = match spoof {
                Some((ris, mu_t)) => {
                    let (c_v, c_r) = envelope_weights(scn, veh, ris, theta0);
                    (c_v, Some((c_r, mu_t)))
                }
                None => {
                    let half_pi = std::f64::consts::FRAC_PI_2;
                    let fv = dirichlet(scn.n_tx, half_pi * (theta0.cos() - veh.aod.cos()));
                    (veh.gain.norm_sqr() * fv * fv, None)
                }
            };
            let m2 = (scn.ris_elements * scn.ris_elements) as Real;
            grid.iter()
                .map(|&mu| {
                    let sv = sinc(t * (mu - mu_k));
                    let mut val = c_v * sv * sv;
                    if let Some((c_r, mu_t)) = spoof_parts {
                        let sr = sinc(mu * dt)
                            * dirichlet(scn.n_sub, std::f64::consts::PI * dt * (mu - mu_t));
                        val += m2 * c_r * sr * sr;
                    }
                    pref * val
                })
                .collect()
        }
    };
    MatchedFilterCurve::from_samples(grid.to_vec(), mags)
}
