//! Dataset generation: clean ground-truth trajectories for training, plus a
//! mixed test set where the spoofed half is what the RSU actually sensed
//! while under attack.

use std::collections::BTreeMap;

use mirage_attack::env::SpoofEnv;
use mirage_attack::gen::gen_ground_truth;
use mirage_attack::oracle::oracle_plan;
use mirage_attack::policy::{masked_policy, PolicySpec};
use mirage_core::geometry::VehicleState;
use mirage_core::traj::MotionPattern;

use crate::cmd::plan::load_policy;
use crate::dataset::{write_csv, DataManifest, Dataset, Traj};
use crate::error::{CliError, Result};
use crate::setup::{sub_seed, AttackerKind, Ctx};

pub const TRAIN_FILE: &str = "train.csv";
pub const TEST_FILE: &str = "test.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

const PATTERNS: [MotionPattern; 3] = [
    MotionPattern::Straight,
    MotionPattern::SingleLaneChange,
    MotionPattern::DoubleLaneChange,
];

pub struct Generated {
    pub train: Dataset,
    pub test: Dataset,
    pub manifest: DataManifest,
}

fn ground_truth(ctx: &Ctx, stream: &str, i: usize) -> Result<mirage_core::traj::Trajectory> {
    Ok(gen_ground_truth(
        PATTERNS[i % PATTERNS.len()],
        ctx.cfg.road.horizon,
        ctx.cfg.scenario.slot_s,
        &ctx.cfg.road,
        &ctx.cfg.consistency,
        sub_seed(ctx.seed, stream, i as u64),
    )?)
}

/// The trajectory the RSU records while this attacker drives the RIS: the
/// accurate initial sensing followed by one sensed state per slot.
pub fn sensed_under_attack(
    env: &SpoofEnv,
    states: &[VehicleState],
    attacker: AttackerKind,
    policy: Option<&PolicySpec>,
    oracle_horizon: usize,
) -> Result<Traj> {
    let mut traj: Traj = Vec::with_capacity(states.len());
    traj.push([states[0].x, states[0].y, states[0].v]);
    match attacker {
        AttackerKind::Oracle => {
            let plan = oracle_plan(env, states, oracle_horizon)?;
            for s in &plan.slots {
                traj.push([s.sensed.x, s.sensed.y, s.sensed.v]);
            }
        }
        AttackerKind::Ppo => {
            let spec = policy
                .ok_or_else(|| CliError::Config("ppo attacker without a policy".into()))?;
            let mut xi = env.initial_state(&states[0], &states[1])?;
            for k in 1..states.len() {
                let mask = env.action_mask(&xi)?;
                let action = if mask.iter().any(|&m| m) {
                    let fwd = spec.net.forward(&env.features(&xi));
                    let p = masked_policy(&fwd.out[..env.grid.len()], &mask, spec.alpha)?;
                    let a = p
                        .iter()
                        .enumerate()
                        .max_by(|x, y| x.1.total_cmp(y.1))
                        .map(|(i, _)| i)
                        .expect("nonempty action grid");
                    Some(env.grid.freqs[a])
                } else {
                    None
                };
                let o = env.step(&xi, action, states.get(k + 1), None)?;
                traj.push([o.sensed.x, o.sensed.y, o.sensed.v]);
                match o.next {
                    Some(n) => xi = n,
                    None => break,
                }
            }
        }
        AttackerKind::None => {
            for s in &states[1..] {
                traj.push([s.x, s.y, s.v]);
            }
        }
    }
    Ok(traj)
}

pub fn generate(ctx: &Ctx, attacker: AttackerKind, policy: Option<&PolicySpec>) -> Result<Generated> {
    let d = &ctx.cfg.detect;
    let env = ctx.env()?;
    let mut mix: BTreeMap<String, usize> = BTreeMap::new();

    let mut train: Vec<Traj> = Vec::with_capacity(d.train_size);
    for i in 0..d.train_size {
        let t = ground_truth(ctx, "datagen-train", i)?;
        *mix.entry(PATTERNS[i % PATTERNS.len()].as_str().into()).or_insert(0) += 1;
        train.push(t.features());
    }

    let mut test: Vec<Traj> = Vec::with_capacity(d.test_clean + d.test_spoofed);
    let mut labels: Vec<bool> = Vec::with_capacity(d.test_clean + d.test_spoofed);
    for i in 0..d.test_clean {
        let t = ground_truth(ctx, "datagen-test-clean", i)?;
        *mix.entry(PATTERNS[i % PATTERNS.len()].as_str().into()).or_insert(0) += 1;
        test.push(t.features());
        labels.push(false);
    }
    for i in 0..d.test_spoofed {
        let t = ground_truth(ctx, "datagen-test-spoofed", i)?;
        *mix.entry(PATTERNS[i % PATTERNS.len()].as_str().into()).or_insert(0) += 1;
        test.push(sensed_under_attack(
            &env,
            t.states(),
            attacker,
            policy,
            ctx.cfg.attack.oracle_horizon,
        )?);
        labels.push(true);
    }

    let manifest = DataManifest {
        seed: ctx.seed,
        scenario_hash: ctx.cfg.scenario.hash(),
        slots: ctx.cfg.road.horizon,
        pattern_mix: mix,
        clean: d.train_size + d.test_clean,
        spoofed: d.test_spoofed,
        attacker: attacker.as_str().into(),
    };
    Ok(Generated {
        train: Dataset { trajs: train, labels: None },
        test: Dataset { trajs: test, labels: Some(labels) },
        manifest,
    })
}

pub fn write(ctx: &Ctx, g: &Generated) -> Result<()> {
    write_csv(&ctx.out.join(TRAIN_FILE), &g.train)?;
    write_csv(&ctx.out.join(TEST_FILE), &g.test)?;
    g.manifest.save(&ctx.out.join(MANIFEST_FILE))
}

pub fn run(ctx: &Ctx, attacker: AttackerKind) -> Result<()> {
    let policy = match attacker {
        AttackerKind::Ppo => Some(load_policy(ctx)?),
        _ => None,
    };
    let g = generate(ctx, attacker, policy.as_ref())?;
    write(ctx, &g)
}
