//! Differentiable formula learning on a fixed wiring: four affine predicates,
//! each under its own temporal window, joined by one Boolean unit. Operator
//! choices (and/or, always/eventually) and child participation are selector
//! probabilities trained by gradient; the forward pass draws them at their
//! maximum-likelihood value (round at 0.5) and passes gradients straight
//! through to the probabilities. The trained model hardens into a discrete
//! formula.

use mirage_core::rng::stream;
use mirage_stl::{SoftFormula, StlFormula, DIM};
use rand::Rng;

use crate::adam::Adam;
use crate::{DetectError, Real, Result, Traj};

pub const UNITS: usize = 4;
const RESTARTS: usize = 3;

/// Flat layout of the fixed wiring: `[p_and_or, gates x4]`, then per unit
/// `[p_alw_ev, t1, t2, a x3, b]`.
const UNIT_STRIDE: usize = 3 + DIM + 1;
const HEADER: usize = 1 + UNITS;
const N_PARAMS: usize = HEADER + UNITS * UNIT_STRIDE;

#[derive(Debug, Clone)]
pub struct TlinetModel {
    /// Trained soft structure, probabilities and windows in place.
    pub soft: SoftFormula,
    /// Hardened discrete formula.
    pub formula: StlFormula,
    pub beta: Real,
    pub eta: Real,
    /// Final composite training loss.
    pub loss: Real,
}

fn skeleton() -> SoftFormula {
    SoftFormula::Bool {
        select: 0.0,
        gates: vec![1.0; UNITS],
        children: (0..UNITS)
            .map(|_| SoftFormula::Temporal {
                select: 0.0,
                t1: 0.0,
                t2: 0.0,
                child: Box::new(SoftFormula::Predicate { a: [0.0; DIM], b: 0.0 }),
            })
            .collect(),
    }
}

fn unit_base(u: usize) -> usize {
    HEADER + u * UNIT_STRIDE
}

/// Selector and gate probabilities drawn at their likeliest value. If every
/// gate rounds closed, the widest-open one stays, matching hardening.
fn drawn(params: &[Real]) -> Vec<Real> {
    let mut p = params.to_vec();
    p[0] = if p[0] >= 0.5 { 1.0 } else { 0.0 };
    let open = (1..=UNITS).filter(|&i| params[i] >= 0.5).count();
    if open == 0 {
        let best = (1..=UNITS).max_by(|&a, &b| params[a].total_cmp(&params[b])).unwrap();
        for i in 1..=UNITS {
            p[i] = if i == best { 1.0 } else { 0.0 };
        }
    } else {
        for i in 1..=UNITS {
            p[i] = if params[i] >= 0.5 { 1.0 } else { 0.0 };
        }
    }
    for u in 0..UNITS {
        let s = unit_base(u);
        p[s] = if p[s] >= 0.5 { 1.0 } else { 0.0 };
    }
    p
}

/// Smooth robustness at slot 0 with selectors drawn; gradients flow straight
/// through the draw to the underlying probabilities.
fn forward_grad(
    skel: &SoftFormula,
    params: &[Real],
    traj: &Traj,
    beta: Real,
    eta: Real,
) -> Result<(Real, Vec<Real>)> {
    let soft = skel.with_params(&drawn(params))?;
    Ok(soft.eval_grad(traj, 0, beta, eta)?)
}

/// Robustness of a trained model on a trajectory (smooth, selectors drawn).
pub fn tlinet_forward(model: &TlinetModel, traj: &Traj) -> Result<Real> {
    let params = model.soft.params();
    let soft = skeleton().with_params(&drawn(&params))?;
    Ok(soft.eval(traj, 0, model.beta, model.eta)?)
}

struct LossParts {
    task: Real,
    sparsity: Real,
    gate_entropy: Real,
    selector_entropy: Real,
}

impl LossParts {
    fn total(&self, l1: Real, l2: Real, l3: Real) -> Real {
        self.task + l1 * self.sparsity + l2 * self.gate_entropy + l3 * self.selector_entropy
    }
}

fn composite_loss_grad(
    skel: &SoftFormula,
    params: &[Real],
    data: &[(Traj, bool)],
    lambdas: (Real, Real, Real),
    literal_labels: bool,
    beta: Real,
    eta: Real,
    grad: &mut [Real],
) -> Result<LossParts> {
    let (l1, l2, l3) = lambdas;
    grad.iter_mut().for_each(|g| *g = 0.0);
    // Class-balanced weights: one-vs-rest splits are heavily skewed toward
    // out-of-class samples, and the unweighted exponential loss then prefers
    // rejecting everything.
    let n_pos = data.iter().filter(|(_, c)| *c).count().max(1);
    let n_neg = (data.len() - n_pos.min(data.len())).max(1);

    let mut task = 0.0;
    for (traj, in_class) in data {
        let (r, dr) = forward_grad(skel, params, traj, beta, eta)?;
        let c: Real = match (*in_class, literal_labels) {
            (true, _) => 1.0,
            (false, false) => -1.0,
            (false, true) => 0.0,
        };
        let w = if *in_class { 0.6 / n_pos as Real } else { 0.4 / n_neg as Real };
        let e = (-c * r).exp();
        task += e * w;
        let scale = -c * e * w;
        for (g, d) in grad.iter_mut().zip(&dr) {
            *g += scale * d;
        }
    }

    let mut sparsity = 0.0;
    let mut gate_entropy = 0.0;
    let mut selector_entropy = params[0] * (1.0 - params[0]);
    grad[0] += l3 * (1.0 - 2.0 * params[0]);
    for i in 1..=UNITS {
        gate_entropy += params[i] * (1.0 - params[i]);
        grad[i] += l2 * (1.0 - 2.0 * params[i]);
    }
    for u in 0..UNITS {
        let s = unit_base(u);
        selector_entropy += params[s] * (1.0 - params[s]);
        grad[s] += l3 * (1.0 - 2.0 * params[s]);
        for j in 0..DIM {
            let a = params[s + 3 + j];
            sparsity += a.abs();
            grad[s + 3 + j] += l1 * a.signum();
        }
    }

    Ok(LossParts { task, sparsity, gate_entropy, selector_entropy })
}

fn clamp_params(params: &mut [Real], max_slot: Real) {
    params[0] = params[0].clamp(0.0, 1.0);
    for p in params.iter_mut().take(HEADER).skip(1) {
        *p = p.clamp(0.0, 1.0);
    }
    for u in 0..UNITS {
        let s = unit_base(u);
        params[s] = params[s].clamp(0.0, 1.0);
        params[s + 1] = params[s + 1].clamp(0.0, max_slot);
        params[s + 2] = params[s + 2].clamp(0.0, max_slot);
        if params[s + 1] > params[s + 2] {
            params.swap(s + 1, s + 2);
        }
    }
}

fn init_params(len: usize, mean: &[Real; DIM], rng: &mut impl Rng) -> Vec<Real> {
    let mut p = vec![0.0; N_PARAMS];
    p[0] = 0.5 + rng.gen_range(-0.1..0.1);
    for i in 1..=UNITS {
        p[i] = 0.9 + rng.gen_range(-0.05..0.05);
    }
    let span = (len - 1) as Real;
    for u in 0..UNITS {
        let s = unit_base(u);
        p[s] = 0.5 + rng.gen_range(-0.1..0.1);
        // Windows start as staggered quarters so both bounds sit on live
        // gradient ramps.
        p[s + 1] = (span * u as Real / UNITS as Real + rng.gen_range(-1.0..1.0)).max(0.0);
        p[s + 2] = (span * (u + 1) as Real / UNITS as Real + rng.gen_range(-1.0..1.0)).min(span);
        for j in 0..DIM {
            p[s + 3 + j] = rng.gen_range(-0.5..0.5);
        }
        // Start the threshold at the data mean so initial robustness is
        // centered near zero regardless of feature scale.
        p[s + 3 + DIM] = (0..DIM).map(|j| p[s + 3 + j] * mean[j]).sum::<Real>()
            + rng.gen_range(-0.2..0.2);
    }
    p
}

/// Mean of the per-class error rates of the hardened formula.
fn balanced_error(data: &[(Traj, bool)], formula: &StlFormula) -> Result<Real> {
    let mut wrong = [0usize; 2];
    let mut total = [0usize; 2];
    for (traj, in_class) in data {
        let side = usize::from(*in_class);
        total[side] += 1;
        if mirage_stl::satisfies(traj, formula)? != *in_class {
            wrong[side] += 1;
        }
    }
    let rate = |i: usize| {
        if total[i] == 0 { 0.0 } else { wrong[i] as Real / total[i] as Real }
    };
    Ok(0.5 * (rate(0) + rate(1)))
}

/// Gradient training of the composite loss (exponential margin task loss plus
/// sparsity and decisiveness regularizers) on a pseudo-labeled dataset. A
/// non-finite loss halves the learning rate and restarts, up to three times.
pub fn tlinet_train(
    data: &[(Traj, bool)],
    lambdas: (Real, Real, Real),
    epochs: usize,
    literal_labels: bool,
    seed: u64,
) -> Result<TlinetModel> {
    if data.is_empty() {
        return Err(DetectError::InvalidInput("empty pseudo-labeled dataset".into()));
    }
    let min_len = data.iter().map(|(t, _)| t.len()).min().unwrap();
    if min_len == 0 {
        return Err(DetectError::InvalidInput("empty trajectory".into()));
    }
    let beta = 10.0;
    let eta = 1.0;
    let skel = skeleton();

    let mut mean = [0.0; DIM];
    let mut count = 0usize;
    for (traj, _) in data {
        for s in traj {
            for j in 0..DIM {
                mean[j] += s[j];
            }
            count += 1;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count as Real);

    let mut lr = 0.05;
    let mut last_err = String::new();
    for _attempt in 0..4 {
        // The exponential task loss has bad local plateaus; train a few
        // restarts and keep the one whose hardened formula fits best.
        let mut best: Option<(Real, Real, TlinetModel)> = None;
        for restart in 0..RESTARTS {
            let mut rng = stream(seed, &format!("tlinet-init-{restart}"));
            let mut params = init_params(min_len, &mean, &mut rng);
            let mut opt = Adam::new(N_PARAMS, lr);
            let mut grad = vec![0.0; N_PARAMS];
            let mut loss = Real::NAN;
            let mut ok = true;
            for ep in 0..epochs {
                // Anneal the softmax temperature from broad (gradient spread
                // over all slots and units) to sharp (near-exact semantics).
                let frac = ep as Real / epochs.max(1) as Real;
                let beta_ep = 1.0 + (beta - 1.0) * frac;
                let parts = composite_loss_grad(
                    &skel, &params, data, lambdas, literal_labels, beta_ep, eta, &mut grad,
                )?;
                loss = parts.total(lambdas.0, lambdas.1, lambdas.2);
                if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    last_err = format!("non-finite loss at learning rate {lr}");
                    ok = false;
                    break;
                }
                opt.step(&mut params, &grad);
                clamp_params(&mut params, (min_len - 1) as Real);
            }
            if !ok {
                continue;
            }
            let soft = skel.with_params(&drawn(&params))?;
            let formula = soft.harden()?;
            let fit = balanced_error(data, &formula)?;
            if best
                .as_ref()
                .map_or(true, |(bf, bl, _)| fit < *bf || (fit == *bf && loss < *bl))
            {
                best = Some((fit, loss, TlinetModel { soft, formula, beta, eta, loss }));
            }
        }
        if let Some((_, _, model)) = best {
            return Ok(model);
        }
        lr *= 0.5;
    }
    Err(DetectError::Diverged(last_err))
}
