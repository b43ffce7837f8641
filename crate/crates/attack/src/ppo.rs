//! Clipped policy-gradient training of the spoofing policy, with or without
//! invalid-action masking.

use rand::Rng;
use mirage_core::config::{AttackConfig, RoadConfig};
use mirage_core::rng::indexed_stream;
use mirage_core::spoof::SensedState;
use mirage_core::traj::MotionPattern;
use mirage_core::Real;

use crate::consistency::clean_fraction;
use crate::env::SpoofEnv;
use crate::gen::gen_ground_truth;
use crate::policy::{masked_policy, Mlp, PolicySpec};
use crate::{AttackError, Result};

const VALUE_COEF: Real = 0.5;
const ENTROPY_COEF: Real = 0.01;

#[derive(Debug, Clone)]
pub struct PpoHyper {
    pub gamma: Real,
    pub clip: Real,
    pub learning_rate: Real,
    pub epochs_per_update: usize,
    pub episodes_per_update: usize,
    pub episodes: usize,
    pub mask_floor: Real,
    pub hidden: usize,
}

impl PpoHyper {
    pub fn from_config(cfg: &AttackConfig) -> Self {
        PpoHyper {
            gamma: cfg.gamma,
            clip: cfg.clip,
            learning_rate: cfg.learning_rate,
            epochs_per_update: cfg.epochs_per_update,
            episodes_per_update: cfg.episodes_per_update,
            episodes: cfg.episodes,
            mask_floor: cfg.mask_floor,
            hidden: 64,
        }
    }
}

struct Transition {
    feat: [Real; 6],
    mask: Vec<bool>,
    action: usize,
    logp_old: Real,
    value_old: Real,
    reward: Real,
    ret: Real,
    adv: Real,
}

/// Per-episode evaluation of what the sensing chain actually produced.
#[derive(Debug, Clone, Default)]
pub struct EpisodeStats {
    pub total_reward: Real,
    pub mean_reward: Real,
    /// Chosen actions that were physically infeasible.
    pub infeasible_frac: Real,
    /// Consistent transitions in the sensed trajectory.
    pub clean_frac: Real,
    /// Mean reward over slots where the Doppler reading was actually spoofed.
    pub attack_effective_reward: Real,
    /// Median |v̂ − v| over attacked slots.
    pub median_speed_error: Real,
    pub spoofed_slot_frac: Real,
}

#[derive(Debug, Clone, Default)]
pub struct TrainStats {
    pub mean_reward: Real,
    pub infeasible_frac: Real,
    pub clean_frac: Real,
    pub attack_effective_reward: Real,
    pub median_speed_error: Real,
    pub spoofed_slot_frac: Real,
}

pub struct TrainReport {
    pub policy: PolicySpec,
    /// (episode index, mean per-slot reward).
    pub reward_curve: Vec<(usize, Real)>,
    pub eval: TrainStats,
}

fn median(mut v: Vec<Real>) -> Real {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(Real::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn pattern_for(i: usize) -> MotionPattern {
    match i % 3 {
        0 => MotionPattern::Straight,
        1 => MotionPattern::SingleLaneChange,
        _ => MotionPattern::DoubleLaneChange,
    }
}

/// Roll one episode. `greedy` takes the argmax action instead of sampling.
#[allow(clippy::too_many_arguments)]
fn rollout(
    env: &SpoofEnv,
    road: &RoadConfig,
    policy: &PolicySpec,
    masked: bool,
    episode: usize,
    seed: u64,
    greedy: bool,
    gamma: Real,
    out: Option<&mut Vec<Transition>>,
) -> Result<EpisodeStats> {
    let traj_seed = indexed_stream(seed, "ppo-traj", episode as u64).gen::<u64>();
    let traj = gen_ground_truth(
        pattern_for(episode),
        road.horizon,
        env.scn.slot_s,
        road,
        &env.cons,
        traj_seed,
    )?;
    let states = traj.states();
    let mut act_rng = indexed_stream(seed, "ppo-action", episode as u64);
    let mut xi = env.initial_state(&states[0], &states[1])?;
    let mut transitions = Vec::new();
    let mut sensed: Vec<SensedState> = vec![xi.prev_sensed];
    let mut rewards = Vec::new();
    let mut infeasible = 0usize;
    let mut spoofed_slots = Vec::new();
    let mut speed_errors = Vec::new();

    for k in 1..states.len() {
        let env_mask = env.action_mask(&xi)?;
        let sel_mask: Vec<bool> = if masked { env_mask } else { vec![true; env.grid.len()] };
        let next_true = states.get(k + 1);

        let outcome = if masked && !sel_mask.iter().any(|&m| m) {
            // No feasible tone: the RIS stays silent this slot.
            env.step(&xi, None, next_true, None)?
        } else {
            let fwd = policy.net.forward(&env.features(&xi));
            let logits = &fwd.out[..env.grid.len()];
            let value = fwd.out[env.grid.len()];
            let p = masked_policy(logits, &sel_mask, policy.alpha)?;
            let a = if greedy {
                p.iter()
                    .enumerate()
                    .max_by(|x, y| x.1.total_cmp(y.1))
                    .map(|(i, _)| i)
                    .expect("nonempty action grid")
            } else {
                let draw: Real = act_rng.gen_range(0.0..1.0);
                let mut acc = 0.0;
                let mut idx = p.len() - 1;
                for (i, &pi) in p.iter().enumerate() {
                    acc += pi;
                    if draw < acc {
                        idx = i;
                        break;
                    }
                }
                idx
            };
            let outcome = env.step(&xi, Some(env.grid.freqs[a]), next_true, None)?;
            transitions.push(Transition {
                feat: env.features(&xi),
                mask: sel_mask,
                action: a,
                logp_old: p[a].max(1e-300).ln(),
                value_old: value,
                reward: outcome.reward,
                ret: 0.0,
                adv: 0.0,
            });
            if !outcome.feasible {
                infeasible += 1;
            }
            outcome
        };

        rewards.push(outcome.reward);
        sensed.push(outcome.sensed);
        let true_now = &states[k];
        let mu_true = outcome.sensed.doppler;
        // The realized Doppler was spoofed iff it differs from the physical one.
        let veh = mirage_core::geometry::vehicle_geometry(true_now, &env.scn)?;
        let spoofed = (mu_true - veh.doppler.unwrap_or(mu_true)).abs() > 1e-9;
        spoofed_slots.push(spoofed);
        speed_errors.push((outcome.sensed.v - true_now.v).abs());
        match outcome.next {
            Some(n) => xi = n,
            None => break,
        }
    }

    let n_act = transitions.len().max(1);
    let total: Real = rewards.iter().sum();
    let eff: Vec<Real> = rewards
        .iter()
        .zip(&spoofed_slots)
        .filter(|(_, &s)| s)
        .map(|(&r, _)| r)
        .collect();
    let stats = EpisodeStats {
        total_reward: total,
        mean_reward: total / rewards.len().max(1) as Real,
        infeasible_frac: infeasible as Real / n_act as Real,
        clean_frac: clean_fraction(&sensed, &env.cons, env.scn.slot_s),
        attack_effective_reward: if eff.is_empty() {
            0.0
        } else {
            eff.iter().sum::<Real>() / eff.len() as Real
        },
        median_speed_error: median(
            speed_errors
                .iter()
                .zip(&spoofed_slots)
                .filter(|(_, &s)| s)
                .map(|(&e, _)| e)
                .collect(),
        ),
        spoofed_slot_frac: spoofed_slots.iter().filter(|&&s| s).count() as Real
            / spoofed_slots.len().max(1) as Real,
    };
    if let Some(out) = out {
        // Discounted returns within the episode; advantages are set
        // wave-wide by the caller.
        let mut acc = 0.0;
        for t in transitions.iter_mut().rev() {
            acc = t.reward + gamma * acc;
            t.ret = acc;
        }
        out.extend(transitions);
    }
    Ok(stats)
}

struct Adam {
    m: Vec<Real>,
    v: Vec<Real>,
    t: usize,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [Real], grad: &[Real], lr: Real) {
        self.t += 1;
        let (b1, b2, eps): (Real, Real, Real) = (0.9, 0.999, 1e-8);
        let bc1 = 1.0 - b1.powi(self.t as i32);
        let bc2 = 1.0 - b2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * grad[i];
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / bc1) / ((self.v[i] / bc2).sqrt() + eps);
        }
    }
}

/// Train a policy on the spoofing MDP. `masked = false` trains the ablation
/// that may pick physically infeasible tones.
pub fn ppo_train(
    env: &SpoofEnv,
    road: &RoadConfig,
    hyper: &PpoHyper,
    masked: bool,
    seed: u64,
) -> Result<TrainReport> {
    let l = env.grid.len();
    let mut init_rng = indexed_stream(seed, "ppo-init", 0);
    let mut policy = PolicySpec {
        net: Mlp::new(6, hyper.hidden, l + 1, &mut init_rng),
        alpha: hyper.mask_floor,
    };
    let mut adam = Adam::new(policy.net.params.len());
    let mut reward_curve = Vec::with_capacity(hyper.episodes);
    let mut episode = 0usize;

    while episode < hyper.episodes {
        let wave = hyper.episodes_per_update.min(hyper.episodes - episode);
        let mut batch: Vec<Transition> = Vec::new();
        for _ in 0..wave {
            let stats = rollout(
                env,
                road,
                &policy,
                masked,
                episode,
                seed,
                false,
                hyper.gamma,
                Some(&mut batch),
            )?;
            reward_curve.push((episode, stats.mean_reward));
            episode += 1;
        }
        if batch.is_empty() {
            continue;
        }
        // Advantage = return − value, normalized over the wave.
        let mean = batch.iter().map(|t| t.ret - t.value_old).sum::<Real>() / batch.len() as Real;
        let var = batch
            .iter()
            .map(|t| (t.ret - t.value_old - mean).powi(2))
            .sum::<Real>()
            / batch.len() as Real;
        let sd = var.sqrt().max(1e-8);
        for t in &mut batch {
            t.adv = (t.ret - t.value_old - mean) / sd;
        }

        for _ in 0..hyper.epochs_per_update {
            let mut grad = vec![0.0; policy.net.params.len()];
            let mut loss_acc = 0.0;
            for t in &batch {
                let fwd = policy.net.forward(&t.feat);
                let logits = &fwd.out[..l];
                let value = fwd.out[l];
                let p = masked_policy(logits, &t.mask, policy.alpha)?;
                let logp = p[t.action].max(1e-300).ln();
                let ratio = (logp - t.logp_old).exp();
                let surr1 = ratio * t.adv;
                let surr2 = ratio.clamp(1.0 - hyper.clip, 1.0 + hyper.clip) * t.adv;
                let entropy: Real =
                    -p.iter().filter(|&&pi| pi > 0.0).map(|&pi| pi * pi.ln()).sum::<Real>();
                loss_acc += -surr1.min(surr2) + VALUE_COEF * (value - t.ret).powi(2)
                    - ENTROPY_COEF * entropy;

                let mut gout = vec![0.0; l + 1];
                if surr1 <= surr2 {
                    // Unclipped branch active: ∂(−ratio·adv)/∂z̃ through logπ.
                    let c = -t.adv * ratio;
                    for (j, gj) in gout.iter_mut().take(l).enumerate() {
                        let on = if j == t.action { 1.0 } else { 0.0 };
                        *gj += c * (on - p[j]);
                    }
                }
                for (j, gj) in gout.iter_mut().take(l).enumerate() {
                    // ∂(−H)/∂z̃_j = p_j (ln p_j + H).
                    if p[j] > 0.0 {
                        *gj += ENTROPY_COEF * p[j] * (p[j].ln() + entropy);
                    }
                }
                gout[l] = 2.0 * VALUE_COEF * (value - t.ret);
                policy.net.backward(&fwd, &gout, &mut grad);
            }
            let scale = 1.0 / batch.len() as Real;
            for g in &mut grad {
                *g *= scale;
            }
            if loss_acc.is_nan() || grad.iter().any(|g| g.is_nan()) {
                return Err(AttackError::Diverged(format!(
                    "NaN loss at episode {episode}"
                )));
            }
            adam.step(&mut policy.net.params, &grad, hyper.learning_rate);
        }
    }

    let eval = evaluate_policy(env, road, &policy, masked, seed, 30)?;
    Ok(TrainReport { policy, reward_curve, eval })
}

/// Greedy evaluation over fresh episodes.
pub fn evaluate_policy(
    env: &SpoofEnv,
    road: &RoadConfig,
    policy: &PolicySpec,
    masked: bool,
    seed: u64,
    episodes: usize,
) -> Result<TrainStats> {
    let mut per: Vec<EpisodeStats> = Vec::with_capacity(episodes);
    for e in 0..episodes {
        per.push(rollout(env, road, policy, masked, 1_000_000 + e, seed, true, 1.0, None)?);
    }
    let n = per.len().max(1) as Real;
    Ok(TrainStats {
        mean_reward: per.iter().map(|s| s.mean_reward).sum::<Real>() / n,
        infeasible_frac: per.iter().map(|s| s.infeasible_frac).sum::<Real>() / n,
        clean_frac: per.iter().map(|s| s.clean_frac).sum::<Real>() / n,
        attack_effective_reward: per.iter().map(|s| s.attack_effective_reward).sum::<Real>() / n,
        median_speed_error: median(per.iter().map(|s| s.median_speed_error).collect()),
        spoofed_slot_frac: per.iter().map(|s| s.spoofed_slot_frac).sum::<Real>() / n,
    })
}
