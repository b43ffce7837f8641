//! Scenario configuration.
//!
//! Internally everything is SI (watts, Hz, seconds, meters, radians).
//! dBm / dBsm / degrees / ms / µs are accepted only at the config-file
//! boundary, which is a TOML document with optional sections; missing keys
//! fall back to the built-in default scenario.

use serde::Deserialize;

use crate::{CoreError, Real, Result, C_LIGHT};

pub fn dbm_to_watts(dbm: Real) -> Real {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn dbsm_to_m2(dbsm: Real) -> Real {
    10f64.powf(dbsm / 10.0)
}

pub fn deg_to_rad(deg: Real) -> Real {
    deg.to_radians()
}

/// Physical-layer scenario: RSU arrays, slot timing, RIS and vehicle
/// reflection parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tx_power_w: Real,
    pub noise_power_w: Real,
    pub carrier_hz: Real,
    pub wavelength_m: Real,
    pub n_tx: usize,
    pub n_rx: usize,
    /// Slot duration T.
    pub slot_s: Real,
    /// RIS phase-update interval ΔT.
    pub phase_interval_s: Real,
    /// Phase updates per slot, T/ΔT (exact).
    pub n_sub: usize,
    pub ris_pos: (Real, Real),
    /// RIS element count M.
    pub ris_elements: usize,
    pub ris_efficiency: Real,
    pub ris_area_m2: Real,
    pub ris_max_delay_s: Real,
    /// Vehicle radar cross-section κ_V.
    pub vehicle_rcs_m2: Real,
    /// Margin factor interpreting the "M much larger than threshold" premise.
    pub ris_margin: Real,
    /// Use the literal double-path position convention (no ½ factor).
    pub literal_position: bool,
    pub rng_seed: u64,
}

impl Scenario {
    /// Default evaluation scenario: 28 GHz, 32×32 arrays, 10 ms slots with
    /// 1 ms phase updates, RIS of 32 elements at (5, 15), 7 dBsm vehicle.
    pub fn defaults() -> Self {
        let carrier_hz = 28e9;
        Scenario {
            tx_power_w: dbm_to_watts(30.0),
            noise_power_w: dbm_to_watts(-100.0),
            carrier_hz,
            wavelength_m: C_LIGHT / carrier_hz,
            n_tx: 32,
            n_rx: 32,
            slot_s: 10e-3,
            phase_interval_s: 1e-3,
            n_sub: 10,
            ris_pos: (5.0, 15.0),
            ris_elements: 32,
            ris_efficiency: 0.8,
            ris_area_m2: 0.05,
            ris_max_delay_s: 0.32e-6,
            vehicle_rcs_m2: dbsm_to_m2(7.0),
            ris_margin: 10.0,
            literal_position: false,
            rng_seed: 1,
        }
    }

    /// Combined array gain γ = √(n_tx·n_rx).
    pub fn array_gain(&self) -> Real {
        ((self.n_tx * self.n_rx) as Real).sqrt()
    }

    /// Doppler wrap period 1/ΔT.
    pub fn wrap_period(&self) -> Real {
        1.0 / self.phase_interval_s
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power_w", self.tx_power_w),
            ("noise_power_w", self.noise_power_w),
            ("carrier_hz", self.carrier_hz),
            ("slot_s", self.slot_s),
            ("phase_interval_s", self.phase_interval_s),
            ("ris_area_m2", self.ris_area_m2),
            ("ris_max_delay_s", self.ris_max_delay_s),
            ("vehicle_rcs_m2", self.vehicle_rcs_m2),
            ("ris_margin", self.ris_margin),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CoreError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(CoreError::Config("antenna counts must be positive".into()));
        }
        if !(self.ris_efficiency > 0.0 && self.ris_efficiency <= 1.0) {
            return Err(CoreError::Config(format!(
                "ris_efficiency must lie in (0,1], got {}",
                self.ris_efficiency
            )));
        }
        let ratio = self.slot_s / self.phase_interval_s;
        if self.n_sub == 0 || (ratio - self.n_sub as Real).abs() > 1e-9 * ratio {
            return Err(CoreError::Config(format!(
                "slot must be an integer number of phase intervals (T/ΔT = {ratio}, n_sub = {})",
                self.n_sub
            )));
        }
        let wl = C_LIGHT / self.carrier_hz;
        if ((self.wavelength_m - wl) / wl).abs() > 1e-9 {
            return Err(CoreError::Config("wavelength inconsistent with carrier".into()));
        }
        Ok(())
    }

    /// Stable FNV-1a hash of every physical field, for dataset manifests.
    pub fn hash(&self) -> u64 {
        let canon = format!(
            "{:e};{:e};{:e};{};{};{:e};{:e};{};{:e};{:e};{};{:e};{:e};{:e};{:e};{:e};{}",
            self.tx_power_w,
            self.noise_power_w,
            self.carrier_hz,
            self.n_tx,
            self.n_rx,
            self.slot_s,
            self.phase_interval_s,
            self.n_sub,
            self.ris_pos.0,
            self.ris_pos.1,
            self.ris_elements,
            self.ris_efficiency,
            self.ris_area_m2,
            self.ris_max_delay_s,
            self.vehicle_rcs_m2,
            self.ris_margin,
            self.literal_position,
        );
        fnv1a(canon.as_bytes())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Kinematic-consistency bounds used by trajectory checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyConfig {
    pub a_max: Real,
    pub a_min: Real,
    pub delta_x: Real,
    pub delta_y: Real,
}

impl ConsistencyConfig {
    pub fn defaults() -> Self {
        ConsistencyConfig { a_max: 3.0, a_min: -3.0, delta_x: 1.0, delta_y: 0.3 }
    }
}

/// Road geometry and ground-truth generator ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadConfig {
    pub lanes_y: Vec<Real>,
    pub x_start: (Real, Real),
    pub speed: (Real, Real),
    /// Trajectory length in slots.
    pub horizon: usize,
}

impl RoadConfig {
    pub fn defaults() -> Self {
        RoadConfig {
            lanes_y: vec![18.0, 21.0, 24.0],
            x_start: (2.0, 5.0),
            speed: (8.0, 15.0),
            horizon: 67,
        }
    }
}

/// Attack planner knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    /// Action grid size L (grid step is 1/(ΔT·L)).
    pub action_count: usize,
    pub mask_floor: Real,
    pub gamma: Real,
    pub clip: Real,
    pub learning_rate: Real,
    pub epochs_per_update: usize,
    pub episodes_per_update: usize,
    pub episodes: usize,
    pub oracle_horizon: usize,
}

impl AttackConfig {
    pub fn defaults() -> Self {
        AttackConfig {
            action_count: 1000,
            mask_floor: 0.01,
            gamma: 0.99,
            clip: 0.2,
            learning_rate: 3e-4,
            epochs_per_update: 10,
            episodes_per_update: 32,
            episodes: 600,
            oracle_horizon: 1,
        }
    }
}

/// Detector training knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub clusters: usize,
    pub latent_dim: usize,
    pub cluster_iters: usize,
    pub indicator_every: usize,
    pub lambda0: Real,
    /// Per-class (λ1, λ2, λ3); recycled modulo its length.
    pub class_lambdas: Vec<(Real, Real, Real)>,
    pub formula_epochs: usize,
    pub train_size: usize,
    pub test_clean: usize,
    pub test_spoofed: usize,
    /// Literal e^{−c·r} task loss with labels in {0,1} instead of {−1,+1}.
    pub literal_task_labels: bool,
}

impl DetectConfig {
    pub fn defaults() -> Self {
        DetectConfig {
            clusters: 6,
            latent_dim: 16,
            cluster_iters: 50,
            indicator_every: 5,
            lambda0: 50.0,
            class_lambdas: vec![
                (4e-2, 5.0, 5.0),
                (1e-3, 5.0, 5.0),
                (1e-1, 10.0, 10.0),
                (1e-3, 5.0, 5.0),
                (2e-2, 5.0, 5.0),
                (2e-2, 5.0, 5.0),
            ],
            formula_epochs: 400,
            train_size: 480,
            test_clean: 120,
            test_spoofed: 120,
            literal_task_labels: false,
        }
    }
}

/// Full simulator configuration: scenario plus module knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub consistency: ConsistencyConfig,
    pub road: RoadConfig,
    pub attack: AttackConfig,
    pub detect: DetectConfig,
    /// Default vehicle state for single-slot experiments.
    pub vehicle: (Real, Real, Real),
}

impl SimConfig {
    pub fn defaults() -> Self {
        SimConfig {
            scenario: Scenario::defaults(),
            consistency: ConsistencyConfig::defaults(),
            road: RoadConfig::defaults(),
            attack: AttackConfig::defaults(),
            detect: DetectConfig::defaults(),
            vehicle: (3.0, 21.0, 10.0),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CoreError::Config(format!("config parse: {e}")))?;
        raw.build()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::Config(format!("read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    link: RawLink,
    #[serde(default)]
    ris: RawRis,
    #[serde(default)]
    vehicle: RawVehicle,
    #[serde(default)]
    consistency: RawConsistency,
    #[serde(default)]
    road: RawRoad,
    #[serde(default)]
    attack: RawAttack,
    #[serde(default)]
    detect: RawDetect,
    #[serde(default)]
    seed: RawSeed,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    tx_power_dbm: Option<Real>,
    noise_power_dbm: Option<Real>,
    carrier_hz: Option<Real>,
    n_tx: Option<usize>,
    n_rx: Option<usize>,
    slot_ms: Option<Real>,
    phase_interval_ms: Option<Real>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRis {
    x: Option<Real>,
    y: Option<Real>,
    elements: Option<usize>,
    efficiency: Option<Real>,
    area_m2: Option<Real>,
    max_delay_us: Option<Real>,
    margin: Option<Real>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVehicle {
    rcs_dbsm: Option<Real>,
    x: Option<Real>,
    y: Option<Real>,
    speed_mps: Option<Real>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConsistency {
    a_max: Option<Real>,
    a_min: Option<Real>,
    delta_x: Option<Real>,
    delta_y: Option<Real>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoad {
    lanes_y: Option<Vec<Real>>,
    x_start_min: Option<Real>,
    x_start_max: Option<Real>,
    speed_min: Option<Real>,
    speed_max: Option<Real>,
    horizon: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttack {
    action_count: Option<usize>,
    mask_floor: Option<Real>,
    gamma: Option<Real>,
    clip: Option<Real>,
    learning_rate: Option<Real>,
    epochs_per_update: Option<usize>,
    episodes_per_update: Option<usize>,
    episodes: Option<usize>,
    oracle_horizon: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetect {
    clusters: Option<usize>,
    latent_dim: Option<usize>,
    cluster_iters: Option<usize>,
    indicator_every: Option<usize>,
    lambda0: Option<Real>,
    formula_epochs: Option<usize>,
    train_size: Option<usize>,
    test_clean: Option<usize>,
    test_spoofed: Option<usize>,
    literal_task_labels: Option<bool>,
    literal_position: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeed {
    rng_seed: Option<u64>,
}

impl RawConfig {
    fn build(self) -> Result<SimConfig> {
        let mut cfg = SimConfig::defaults();
        let s = &mut cfg.scenario;
        if let Some(p) = self.link.tx_power_dbm {
            s.tx_power_w = dbm_to_watts(p);
        }
        if let Some(p) = self.link.noise_power_dbm {
            s.noise_power_w = dbm_to_watts(p);
        }
        if let Some(f) = self.link.carrier_hz {
            s.carrier_hz = f;
            s.wavelength_m = C_LIGHT / f;
        }
        if let Some(n) = self.link.n_tx {
            s.n_tx = n;
        }
        if let Some(n) = self.link.n_rx {
            s.n_rx = n;
        }
        if let Some(t) = self.link.slot_ms {
            s.slot_s = t * 1e-3;
        }
        if let Some(t) = self.link.phase_interval_ms {
            s.phase_interval_s = t * 1e-3;
        }
        let ratio = s.slot_s / s.phase_interval_s;
        s.n_sub = ratio.round() as usize;

        if let Some(x) = self.ris.x {
            s.ris_pos.0 = x;
        }
        if let Some(y) = self.ris.y {
            s.ris_pos.1 = y;
        }
        if let Some(m) = self.ris.elements {
            s.ris_elements = m;
        }
        if let Some(e) = self.ris.efficiency {
            s.ris_efficiency = e;
        }
        if let Some(a) = self.ris.area_m2 {
            s.ris_area_m2 = a;
        }
        if let Some(d) = self.ris.max_delay_us {
            s.ris_max_delay_s = d * 1e-6;
        }
        if let Some(m) = self.ris.margin {
            s.ris_margin = m;
        }
        if let Some(r) = self.vehicle.rcs_dbsm {
            s.vehicle_rcs_m2 = dbsm_to_m2(r);
        }
        if let Some(b) = self.detect.literal_position {
            s.literal_position = b;
        }
        if let Some(seed) = self.seed.rng_seed {
            s.rng_seed = seed;
        }
        s.validate()?;

        if let Some(x) = self.vehicle.x {
            cfg.vehicle.0 = x;
        }
        if let Some(y) = self.vehicle.y {
            cfg.vehicle.1 = y;
        }
        if let Some(v) = self.vehicle.speed_mps {
            cfg.vehicle.2 = v;
        }

        let c = &mut cfg.consistency;
        if let Some(v) = self.consistency.a_max {
            c.a_max = v;
        }
        if let Some(v) = self.consistency.a_min {
            c.a_min = v;
        }
        if let Some(v) = self.consistency.delta_x {
            c.delta_x = v;
        }
        if let Some(v) = self.consistency.delta_y {
            c.delta_y = v;
        }
        if c.a_min >= c.a_max || c.delta_x <= 0.0 || c.delta_y <= 0.0 {
            return Err(CoreError::Config("inconsistent consistency bounds".into()));
        }

        let r = &mut cfg.road;
        if let Some(l) = self.road.lanes_y {
            if l.is_empty() {
                return Err(CoreError::Config("road.lanes_y must be non-empty".into()));
            }
            r.lanes_y = l;
        }
        if let Some(v) = self.road.x_start_min {
            r.x_start.0 = v;
        }
        if let Some(v) = self.road.x_start_max {
            r.x_start.1 = v;
        }
        if let Some(v) = self.road.speed_min {
            r.speed.0 = v;
        }
        if let Some(v) = self.road.speed_max {
            r.speed.1 = v;
        }
        if let Some(v) = self.road.horizon {
            r.horizon = v;
        }
        if r.horizon < 2 {
            return Err(CoreError::Config("road.horizon must be at least 2".into()));
        }

        let a = &mut cfg.attack;
        if let Some(v) = self.attack.action_count {
            a.action_count = v;
        }
        if let Some(v) = self.attack.mask_floor {
            a.mask_floor = v;
        }
        if let Some(v) = self.attack.gamma {
            a.gamma = v;
        }
        if let Some(v) = self.attack.clip {
            a.clip = v;
        }
        if let Some(v) = self.attack.learning_rate {
            a.learning_rate = v;
        }
        if let Some(v) = self.attack.epochs_per_update {
            a.epochs_per_update = v;
        }
        if let Some(v) = self.attack.episodes_per_update {
            a.episodes_per_update = v;
        }
        if let Some(v) = self.attack.episodes {
            a.episodes = v;
        }
        if let Some(v) = self.attack.oracle_horizon {
            a.oracle_horizon = v;
        }
        if a.action_count == 0 || !(a.mask_floor > 0.0 && a.mask_floor < 1.0) {
            return Err(CoreError::Config("invalid attack settings".into()));
        }

        let d = &mut cfg.detect;
        if let Some(v) = self.detect.clusters {
            d.clusters = v;
        }
        if let Some(v) = self.detect.latent_dim {
            d.latent_dim = v;
        }
        if let Some(v) = self.detect.cluster_iters {
            d.cluster_iters = v;
        }
        if let Some(v) = self.detect.indicator_every {
            d.indicator_every = v;
        }
        if let Some(v) = self.detect.lambda0 {
            d.lambda0 = v;
        }
        if let Some(v) = self.detect.formula_epochs {
            d.formula_epochs = v;
        }
        if let Some(v) = self.detect.train_size {
            d.train_size = v;
        }
        if let Some(v) = self.detect.test_clean {
            d.test_clean = v;
        }
        if let Some(v) = self.detect.test_spoofed {
            d.test_spoofed = v;
        }
        if let Some(v) = self.detect.literal_task_labels {
            d.literal_task_labels = v;
        }
        if d.clusters == 0 || d.latent_dim == 0 {
            return Err(CoreError::Config("invalid detect settings".into()));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = SimConfig::defaults();
        cfg.scenario.validate().unwrap();
        assert_eq!(cfg.scenario.n_sub, 10);
        assert!((cfg.scenario.tx_power_w - 1.0).abs() < 1e-12);
        assert!((cfg.scenario.noise_power_w - 1e-13).abs() < 1e-25);
        assert!((cfg.scenario.vehicle_rcs_m2 - 5.011872336272722).abs() < 1e-9);
    }

    #[test]
    fn toml_overrides() {
        let cfg = SimConfig::from_toml_str(
            "[link]\ntx_power_dbm = 20.0\nslot_ms = 8.0\nphase_interval_ms = 2.0\n\
             [ris]\nelements = 64\n[seed]\nrng_seed = 9\n",
        )
        .unwrap();
        assert!((cfg.scenario.tx_power_w - 0.1).abs() < 1e-12);
        assert_eq!(cfg.scenario.n_sub, 4);
        assert_eq!(cfg.scenario.ris_elements, 64);
        assert_eq!(cfg.scenario.rng_seed, 9);
    }

    #[test]
    fn bad_timing_rejected() {
        let err = SimConfig::from_toml_str("[link]\nslot_ms = 10.0\nphase_interval_ms = 3.0\n");
        assert!(err.is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(SimConfig::from_toml_str("[link]\nbogus = 1\n").is_err());
    }

    #[test]
    fn hash_tracks_physics() {
        let a = Scenario::defaults();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.ris_elements = 33;
        assert_ne!(a.hash(), b.hash());
    }
}
