//! Time-domain echo synthesis (the brute-force oracle for the closed forms)
//! and the compensated slot echo handed to the angle estimator.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::Scenario;
use crate::geometry::SlotGeometry;
use crate::kernels::{beam_coupling, dirichlet, sinc};
use crate::mf::MatchedFilterCurve;
use crate::{CoreError, Real, Result, C64};

const TAU: Real = std::f64::consts::TAU;
const PI: Real = std::f64::consts::PI;

/// Standard normal draw (Box-Muller; two uniforms per call).
fn gaussian(rng: &mut ChaCha8Rng) -> Real {
    let u1: Real = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: Real = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Staircase RIS phase of Eq-style spoofing: `φ(t) = 2πμ̃·⌈t/ΔT⌉·ΔT mod 2π`.
fn staircase_phase(mu_t: Real, dt: Real, t: Real) -> Real {
    (TAU * mu_t * (t / dt).ceil() * dt) % TAU
}

/// Numerically integrate the composite slot echo and scan the Doppler grid.
///
/// Midpoint rule with `n_samples` points over the slot; the RIS elements all
/// run the same staircase phase law, so their cascade sums to
/// `M·e^{jφ(t)}`. Serves as the ground truth for `matched_filter_closed`.
pub fn echo_synth_oracle(
    scn: &Scenario,
    veh: &SlotGeometry,
    spoof: Option<(&SlotGeometry, Real)>,
    theta0: Real,
    grid: &[Real],
    n_samples: usize,
) -> Result<MatchedFilterCurve> {
    if grid.is_empty() {
        return Err(CoreError::InvalidInput("empty Doppler grid".into()));
    }
    if n_samples < 10 * scn.n_sub {
        return Err(CoreError::InvalidInput(format!(
            "n_samples = {n_samples} too coarse for {} phase updates",
            scn.n_sub
        )));
    }
    let t_slot = scn.slot_s;
    let dt_phase = scn.phase_interval_s;
    let mu_k = veh
        .doppler
        .ok_or_else(|| CoreError::InvalidInput("vehicle geometry lacks Doppler".into()))?;
    let h = t_slot / n_samples as Real;
    let times: Vec<Real> = (0..n_samples).map(|i| (i as Real + 0.5) * h).collect();

    // Scalar waveforms of the two paths, sampled once.
    let s_v: Vec<C64> = times.iter().map(|&t| Complex::from_polar(1.0, TAU * mu_k * t)).collect();
    let s_r: Option<Vec<C64>> = spoof.map(|(_, mu_t)| {
        times
            .iter()
            .map(|&t| Complex::from_polar(1.0, staircase_phase(mu_t, dt_phase, t)))
            .collect()
    });

    let h_v = beam_coupling(scn.n_tx, veh.aod, theta0);
    let amp_v = veh.gain * h_v;
    let spoof_amp = spoof.map(|(ris, _)| {
        (ris.gain * beam_coupling(scn.n_tx, ris.aod, theta0) * scn.ris_elements as Real, ris.aod.cos())
    });

    let gamma2 = (scn.n_tx * scn.n_rx) as Real;
    let pref = scn.tx_power_w * gamma2 / scn.n_rx as Real;
    let cos_v = veh.aod.cos();

    let mut mags = Vec::with_capacity(grid.len());
    for &mu in grid {
        // Incremental rotation e^{−j2πμt_i}.
        let w = Complex::from_polar(1.0, -TAU * mu * h);
        let mut rot = Complex::from_polar(1.0, -TAU * mu * times[0]);
        let mut acc_v = Complex::new(0.0, 0.0);
        let mut acc_r = Complex::new(0.0, 0.0);
        match &s_r {
            Some(sr) => {
                for i in 0..n_samples {
                    acc_v += s_v[i] * rot;
                    acc_r += sr[i] * rot;
                    rot *= w;
                }
            }
            None => {
                for sv in &s_v {
                    acc_v += sv * rot;
                    rot *= w;
                }
            }
        }
        let i_v = acc_v * h;
        let term_v = amp_v * i_v;
        let (term_r, cos_r) = match (&spoof_amp, &s_r) {
            (Some((amp, cos_r)), Some(_)) => (amp * acc_r * h, *cos_r),
            _ => (Complex::new(0.0, 0.0), 0.0),
        };
        let mut sum = 0.0;
        for nr in 0..scn.n_rx {
            let pv = Complex::from_polar(1.0, -PI * nr as Real * cos_v);
            let pr = Complex::from_polar(1.0, -PI * nr as Real * cos_r);
            sum += (term_v * pv + term_r * pr).norm_sqr();
        }
        mags.push(pref * sum);
    }
    MatchedFilterCurve::from_samples(grid.to_vec(), mags)
}

/// Compensated, normalized slot echo at compensation frequency `comp_freq`
/// under an optional spoof tone `μ̃` (both in Hz, unwrapped).
///
/// `ŷ = T·[β_V·b(θ_k)·h(θ_k,θ0)·e^{−jπ(μc−μ_k)T}·sinc(T(μc−μ_k))
///       + M·β_R·b(θ_R)·h(θ_R,θ0)·e^{jπμ̃ΔT}·e^{−jπ(μc−μ̃)T}·sinc(μcΔT)·f(N_sub, πΔT(μc−μ̃))] + ẑ`
/// with per-element noise variance `σ²T/(P·γ²)` when a noise stream is given.
pub fn compensated_echo_general(
    scn: &Scenario,
    veh: &SlotGeometry,
    spoof: Option<(&SlotGeometry, Real)>,
    theta0: Real,
    comp_freq: Real,
    noise: Option<&mut ChaCha8Rng>,
) -> Result<Vec<C64>> {
    let t = scn.slot_s;
    let dt = scn.phase_interval_s;
    let mu_k = veh
        .doppler
        .ok_or_else(|| CoreError::InvalidInput("vehicle geometry lacks Doppler".into()))?;
    let amp_v = veh.gain
        * beam_coupling(scn.n_tx, veh.aod, theta0)
        * Complex::from_polar(1.0, -PI * (comp_freq - mu_k) * t)
        * sinc(t * (comp_freq - mu_k))
        * t;
    let cos_v = veh.aod.cos();
    let spoof_amp = spoof.map(|(ris, mu_t)| {
        let a = ris.gain
            * beam_coupling(scn.n_tx, ris.aod, theta0)
            * scn.ris_elements as Real
            * Complex::from_polar(1.0, PI * mu_t * dt)
            * Complex::from_polar(1.0, -PI * (comp_freq - mu_t) * t)
            * sinc(comp_freq * dt)
            * dirichlet(scn.n_sub, PI * dt * (comp_freq - mu_t))
            * t;
        (a, ris.aod.cos())
    });
    let rx_scale = 1.0 / (scn.n_rx as Real).sqrt();
    let noise_sd = (scn.noise_power_w * t / (scn.tx_power_w * scn.array_gain().powi(2)) / 2.0).sqrt();
    let mut out = Vec::with_capacity(scn.n_rx);
    let mut rng = noise;
    for nr in 0..scn.n_rx {
        let mut y = amp_v * Complex::from_polar(rx_scale, -PI * nr as Real * cos_v);
        if let Some((amp, cos_r)) = &spoof_amp {
            y += amp * Complex::from_polar(rx_scale, -PI * nr as Real * cos_r);
        }
        if let Some(r) = rng.as_deref_mut() {
            y += Complex::new(noise_sd * gaussian(r), noise_sd * gaussian(r));
        }
        out.push(y);
    }
    Ok(out)
}

/// Spoofed compensated echo: compensation pinned at the wrapped spoof
/// frequency `Δμ̃` (the dominant injected peak).
pub fn compensated_echo(
    scn: &Scenario,
    veh: &SlotGeometry,
    ris: &SlotGeometry,
    theta0: Real,
    dmu: Real,
    noise: Option<&mut ChaCha8Rng>,
) -> Result<Vec<C64>> {
    if !(dmu > 0.0 && dmu <= scn.wrap_period() + 1e-9) {
        return Err(CoreError::InvalidInput(format!(
            "wrapped spoof frequency {dmu} outside (0, {}]",
            scn.wrap_period()
        )));
    }
    compensated_echo_general(scn, veh, Some((ris, dmu)), theta0, dmu, noise)
}

/// Clean compensated echo: no RIS path, compensation at the true Doppler.
pub fn perfect_echo(
    scn: &Scenario,
    veh: &SlotGeometry,
    theta0: Real,
    noise: Option<&mut ChaCha8Rng>,
) -> Result<Vec<C64>> {
    let mu_k = veh
        .doppler
        .ok_or_else(|| CoreError::InvalidInput("vehicle geometry lacks Doppler".into()))?;
    compensated_echo_general(scn, veh, None, theta0, mu_k, noise)
}

/// Compensation residual `Δy = ŷ(Δμ̃) − ỹ` in closed form: the vehicle term
/// scaled by `(e^{−jπ(Δμ̃−μ_k)T}·sinc(T(Δμ̃−μ_k)) − 1)` plus the RIS term.
pub fn delta_y(
    scn: &Scenario,
    veh: &SlotGeometry,
    ris: &SlotGeometry,
    theta0: Real,
    dmu: Real,
) -> Result<Vec<C64>> {
    let t = scn.slot_s;
    let dt = scn.phase_interval_s;
    let mu_k = veh
        .doppler
        .ok_or_else(|| CoreError::InvalidInput("vehicle geometry lacks Doppler".into()))?;
    let veh_scale = Complex::from_polar(1.0, -PI * (dmu - mu_k) * t) * sinc(t * (dmu - mu_k))
        - Complex::new(1.0, 0.0);
    let amp_v = veh.gain * beam_coupling(scn.n_tx, veh.aod, theta0) * t * veh_scale;
    let amp_r = ris.gain
        * beam_coupling(scn.n_tx, ris.aod, theta0)
        * scn.ris_elements as Real
        * Complex::from_polar(1.0, PI * dmu * dt)
        * sinc(dmu * dt)
        * t;
    let rx_scale = 1.0 / (scn.n_rx as Real).sqrt();
    let (cos_v, cos_r) = (veh.aod.cos(), ris.aod.cos());
    Ok((0..scn.n_rx)
        .map(|nr| {
            amp_v * Complex::from_polar(rx_scale, -PI * nr as Real * cos_v)
                + amp_r * Complex::from_polar(rx_scale, -PI * nr as Real * cos_r)
        })
        .collect())
}
