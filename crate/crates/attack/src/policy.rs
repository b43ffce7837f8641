//! Feedforward policy/value network and the invalid-action-masked softmax.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use mirage_core::Real;

use crate::{AttackError, Result};

/// Two tanh hidden layers; the last output entry is the value head, the
/// rest are action logits. Parameters live in one flat vector
/// `[w1, b1, w2, b2, w3, b3]` so optimizers can treat them uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    pub params: Vec<Real>,
}

/// Cached activations of one forward pass.
pub struct Forward {
    pub x: Vec<Real>,
    pub h1: Vec<Real>,
    pub h2: Vec<Real>,
    pub out: Vec<Real>,
}

impl Mlp {
    pub fn param_count(n_in: usize, n_hidden: usize, n_out: usize) -> usize {
        n_hidden * n_in + n_hidden + n_hidden * n_hidden + n_hidden + n_out * n_hidden + n_out
    }

    /// Xavier-uniform initialization.
    pub fn new(n_in: usize, n_hidden: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut params = Vec::with_capacity(Self::param_count(n_in, n_hidden, n_out));
        let layer = |fan_in: usize, fan_out: usize, p: &mut Vec<Real>, r: &mut ChaCha8Rng| {
            let bound = (6.0 / (fan_in + fan_out) as Real).sqrt();
            for _ in 0..fan_out * fan_in {
                p.push(r.gen_range(-bound..bound));
            }
            for _ in 0..fan_out {
                p.push(0.0);
            }
        };
        layer(n_in, n_hidden, &mut params, rng);
        layer(n_hidden, n_hidden, &mut params, rng);
        layer(n_hidden, n_out, &mut params, rng);
        Mlp { n_in, n_hidden, n_out, params }
    }

    fn offsets(&self) -> [usize; 6] {
        let (i, h, o) = (self.n_in, self.n_hidden, self.n_out);
        let w1 = 0;
        let b1 = w1 + h * i;
        let w2 = b1 + h;
        let b2 = w2 + h * h;
        let w3 = b2 + h;
        let b3 = w3 + o * h;
        [w1, b1, w2, b2, w3, b3]
    }

    pub fn forward(&self, x: &[Real]) -> Forward {
        debug_assert_eq!(x.len(), self.n_in);
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let p = &self.params;
        let h = self.n_hidden;
        let mut h1 = vec![0.0; h];
        for j in 0..h {
            let row = &p[w1 + j * self.n_in..w1 + (j + 1) * self.n_in];
            let z: Real = row.iter().zip(x).map(|(a, b)| a * b).sum::<Real>() + p[b1 + j];
            h1[j] = z.tanh();
        }
        let mut h2 = vec![0.0; h];
        for j in 0..h {
            let row = &p[w2 + j * h..w2 + (j + 1) * h];
            let z: Real = row.iter().zip(&h1).map(|(a, b)| a * b).sum::<Real>() + p[b2 + j];
            h2[j] = z.tanh();
        }
        let mut out = vec![0.0; self.n_out];
        for j in 0..self.n_out {
            let row = &p[w3 + j * h..w3 + (j + 1) * h];
            out[j] = row.iter().zip(&h2).map(|(a, b)| a * b).sum::<Real>() + p[b3 + j];
        }
        Forward { x: x.to_vec(), h1, h2, out }
    }

    /// Accumulate `d(loss)/d(params)` into `grad` given `d(loss)/d(out)`.
    pub fn backward(&self, fwd: &Forward, grad_out: &[Real], grad: &mut [Real]) {
        debug_assert_eq!(grad.len(), self.params.len());
        let [w1, b1, w2, b2, w3, b3] = self.offsets();
        let p = &self.params;
        let h = self.n_hidden;

        let mut gh2 = vec![0.0; h];
        for j in 0..self.n_out {
            let g = grad_out[j];
            if g == 0.0 {
                continue;
            }
            let row = w3 + j * h;
            for i in 0..h {
                grad[row + i] += g * fwd.h2[i];
                gh2[i] += g * p[row + i];
            }
            grad[b3 + j] += g;
        }
        let mut gh1 = vec![0.0; h];
        for j in 0..h {
            let g = gh2[j] * (1.0 - fwd.h2[j] * fwd.h2[j]);
            if g == 0.0 {
                continue;
            }
            let row = w2 + j * h;
            for i in 0..h {
                grad[row + i] += g * fwd.h1[i];
                gh1[i] += g * p[row + i];
            }
            grad[b2 + j] += g;
        }
        for j in 0..h {
            let g = gh1[j] * (1.0 - fwd.h1[j] * fwd.h1[j]);
            if g == 0.0 {
                continue;
            }
            let row = w1 + j * self.n_in;
            for i in 0..self.n_in {
                grad[row + i] += g * fwd.x[i];
            }
            grad[b1 + j] += g;
        }
    }
}

/// Logit adjustment `z̃_l = z_l + ln(α + (1−α)·m_l)`: feasible actions are
/// untouched, infeasible ones are pushed down by `ln α` while staying
/// differentiable.
pub fn masked_logits(z: &[Real], mask: &[bool], alpha: Real) -> Vec<Real> {
    let drop = alpha.ln();
    z.iter().zip(mask).map(|(&zl, &m)| if m { zl } else { zl + drop }).collect()
}

pub fn softmax(z: &[Real]) -> Vec<Real> {
    let m = z.iter().cloned().fold(Real::NEG_INFINITY, Real::max);
    let exps: Vec<Real> = z.iter().map(|&v| (v - m).exp()).collect();
    let sum: Real = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Masked action distribution. An all-false mask signals that no feasible
/// action exists this slot.
pub fn masked_policy(z: &[Real], mask: &[bool], alpha: Real) -> Result<Vec<Real>> {
    if z.len() != mask.len() {
        return Err(AttackError::InvalidInput("logits/mask length mismatch".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AttackError::InvalidInput(format!("mask floor {alpha} outside (0,1)")));
    }
    if !mask.iter().any(|&m| m) {
        return Err(AttackError::NoFeasibleAction);
    }
    Ok(softmax(&masked_logits(z, mask, alpha)))
}

/// A trained policy: the network plus its mask floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub net: Mlp,
    pub alpha: Real,
}
