//! The closed-form Doppler curve must track the brute-force time-domain
//! integration; these are trimmed-down versions of the full acceptance run.

use mirage_core::config::Scenario;
use mirage_core::echo::{compensated_echo, compensated_echo_general, delta_y, echo_synth_oracle};
use mirage_core::geometry::{ris_geometry, vehicle_geometry, VehicleState};
use mirage_core::mf::{matched_filter_closed, MfMode};
use mirage_core::rng::stream;
use mirage_core::Real;

fn default_setup() -> (Scenario, mirage_core::geometry::SlotGeometry, mirage_core::geometry::SlotGeometry)
{
    let scn = Scenario::defaults();
    let veh = vehicle_geometry(&VehicleState::new(3.0, 21.0, 10.0), &scn).unwrap();
    let ris = ris_geometry(&scn).unwrap();
    (scn, veh, ris)
}

fn max_rel_err(a: &[Real], b: &[Real]) -> Real {
    let peak = b.iter().cloned().fold(0.0, Real::max);
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs() / peak).fold(0.0, Real::max)
}

#[test]
fn exact_matches_oracle_with_spoof() {
    let (scn, veh, ris) = default_setup();
    let theta0 = 85f64.to_radians();
    let grid: Vec<Real> = (1..=100).map(|i| 10.0 * i as Real).collect();
    let spoof = Some((&ris, 600.0));
    let closed = matched_filter_closed(&scn, &veh, spoof, theta0, &grid, MfMode::Exact).unwrap();
    let oracle = echo_synth_oracle(&scn, &veh, spoof, theta0, &grid, 10_000).unwrap();
    assert!(max_rel_err(&closed.mags, &oracle.mags) < 1e-3);
}

#[test]
fn exact_matches_oracle_unwrapped_spoof() {
    let (scn, veh, ris) = default_setup();
    let theta0 = 80f64.to_radians();
    let grid: Vec<Real> = (1..=100).map(|i| 10.0 * i as Real).collect();
    // Unwrapped tone beyond the principal interval.
    let spoof = Some((&ris, 2600.0));
    let closed = matched_filter_closed(&scn, &veh, spoof, theta0, &grid, MfMode::Exact).unwrap();
    let oracle = echo_synth_oracle(&scn, &veh, spoof, theta0, &grid, 20_000).unwrap();
    assert!(max_rel_err(&closed.mags, &oracle.mags) < 1e-3);
}

#[test]
fn no_ris_is_a_sinc_peak_at_true_doppler() {
    let (scn, veh, _) = default_setup();
    let theta0 = veh.aod;
    let mu_k = veh.doppler.unwrap();
    let grid: Vec<Real> = (1..=1000).map(|i| i as Real).collect();
    let closed = matched_filter_closed(&scn, &veh, None, theta0, &grid, MfMode::Exact).unwrap();
    assert!((closed.peak_freq - mu_k.round()).abs() <= 1.0);
    let oracle = echo_synth_oracle(&scn, &veh, None, theta0, &grid, 10_000).unwrap();
    assert!(max_rel_err(&closed.mags, &oracle.mags) < 1e-3);
    // Shape check against a pure sinc² with the beam dead on the vehicle.
    let pref = scn.tx_power_w
        * scn.slot_s
        * scn.slot_s
        * (scn.n_tx * scn.n_rx) as Real
        * veh.gain.norm_sqr();
    for (&f, &m) in closed.freqs.iter().zip(&closed.mags) {
        let s = mirage_core::kernels::sinc(scn.slot_s * (f - mu_k));
        assert!((m / pref - s * s).abs() < 1e-9);
    }
}

#[test]
fn oracle_converged_in_sample_count() {
    let (scn, veh, ris) = default_setup();
    let theta0 = 85f64.to_radians();
    let grid: Vec<Real> = (1..=50).map(|i| 20.0 * i as Real).collect();
    let spoof = Some((&ris, 600.0));
    let a = echo_synth_oracle(&scn, &veh, spoof, theta0, &grid, 10_000).unwrap();
    let b = echo_synth_oracle(&scn, &veh, spoof, theta0, &grid, 20_000).unwrap();
    assert!(max_rel_err(&a.mags, &b.mags) < 1e-4);
}

#[test]
fn approx_tracks_exact_off_the_infeasible_comb() {
    let (scn, veh, ris) = default_setup();
    let theta0 = 85f64.to_radians();
    let grid: Vec<Real> = (1..=1000).map(|i| i as Real).collect();
    let spoof = Some((&ris, 600.0));
    let exact = matched_filter_closed(&scn, &veh, spoof, theta0, &grid, MfMode::Exact).unwrap();
    let approx = matched_filter_closed(&scn, &veh, spoof, theta0, &grid, MfMode::Approx).unwrap();
    assert!(max_rel_err(&exact.mags, &approx.mags) < 0.01);
}

#[test]
fn compensated_echo_reductions() {
    let (scn, veh, ris) = default_setup();
    let theta0 = 83f64.to_radians();
    let mu_k = veh.doppler.unwrap();
    // Vehicle-only compensation at the true Doppler: T·β_V·b·h exactly.
    let y = compensated_echo_general(&scn, &veh, None, theta0, mu_k, None).unwrap();
    let b = mirage_core::kernels::steering(veh.aod, scn.n_rx);
    let h = mirage_core::kernels::beam_coupling(scn.n_tx, veh.aod, theta0);
    for (yi, bi) in y.iter().zip(&b) {
        let expect = scn.slot_s * veh.gain * h * bi;
        assert!((yi - expect).norm() < 1e-18);
    }
    // Residual identity: spoofed minus perfect equals the closed-form delta.
    let dmu = 640.0;
    let spoofed = compensated_echo(&scn, &veh, &ris, theta0, dmu, None).unwrap();
    let dy = delta_y(&scn, &veh, &ris, theta0, dmu).unwrap();
    for i in 0..scn.n_rx {
        let diff = spoofed[i] - y[i];
        assert!((diff - dy[i]).norm() < 1e-20);
    }
    // Doubling M doubles the RIS term.
    let mut scn2 = scn.clone();
    scn2.ris_elements *= 2;
    let dy2 = delta_y(&scn2, &veh, &ris, theta0, dmu).unwrap();
    // Compare RIS-only parts by removing the shared vehicle contribution.
    let mut scn0 = scn.clone();
    scn0.ris_elements = 0;
    let dy0 = delta_y(&scn0, &veh, &ris, theta0, dmu).unwrap();
    for i in 0..scn.n_rx {
        let r1 = dy[i] - dy0[i];
        let r2 = dy2[i] - dy0[i];
        assert!((r2 - 2.0 * r1).norm() < 1e-20);
    }
}

#[test]
fn noise_moment_matches_variance() {
    let (scn, veh, ris) = default_setup();
    let theta0 = 82f64.to_radians();
    let expected = scn.n_rx as Real * scn.noise_power_w * scn.slot_s
        / (scn.tx_power_w * scn.array_gain() * scn.array_gain());
    let mut total = 0.0;
    let n_trials = 1000;
    for trial in 0..n_trials {
        let mut rng = mirage_core::rng::indexed_stream(scn.rng_seed, "noise-moment", trial);
        let noisy = compensated_echo(&scn, &veh, &ris, theta0, 500.0, Some(&mut rng)).unwrap();
        let clean = compensated_echo(&scn, &veh, &ris, theta0, 500.0, None).unwrap();
        total += noisy
            .iter()
            .zip(&clean)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<Real>();
    }
    let mean = total / n_trials as Real;
    assert!((mean - expected).abs() / expected < 0.05, "mean {mean} vs expected {expected}");
    let _ = stream(0, "unused");
}
