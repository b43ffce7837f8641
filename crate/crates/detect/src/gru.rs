//! Gated recurrent autoencoder over (x, y, v) trajectories, with hand-rolled
//! backpropagation through time. The encoder's final hidden state is the
//! latent representation; the decoder runs autoregressively from it.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{DetectError, Real, Result, Traj};

pub const IN_DIM: usize = 3;

/// One GRU cell with flat parameters `[Wz, Uz, bz, Wr, Ur, br, Wh, Uh, bh]`
/// (each W is h×in row-major, each U is h×h).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruCell {
    pub n_in: usize,
    pub n_h: usize,
    pub params: Vec<Real>,
}

/// Per-step activations kept for the backward pass.
pub struct StepCache {
    x: Vec<Real>,
    h_prev: Vec<Real>,
    z: Vec<Real>,
    r: Vec<Real>,
    hhat: Vec<Real>,
}

fn sigmoid(x: Real) -> Real {
    1.0 / (1.0 + (-x).exp())
}

impl GruCell {
    pub fn param_count(n_in: usize, n_h: usize) -> usize {
        3 * (n_h * n_in + n_h * n_h + n_h)
    }

    pub fn new(n_in: usize, n_h: usize, rng: &mut ChaCha8Rng) -> GruCell {
        let n = Self::param_count(n_in, n_h);
        let bound = (6.0 / (n_in + n_h) as Real).sqrt();
        let params = (0..n).map(|_| rng.gen_range(-bound..bound)).collect();
        GruCell { n_in, n_h, params }
    }

    /// Offsets of the nine parameter blocks.
    fn blocks(&self) -> [usize; 9] {
        let (i, h) = (self.n_in, self.n_h);
        let gate = h * i + h * h + h;
        let mut off = [0; 9];
        for g in 0..3 {
            off[3 * g] = g * gate;
            off[3 * g + 1] = g * gate + h * i;
            off[3 * g + 2] = g * gate + h * i + h * h;
        }
        off
    }

    pub fn step(&self, x: &[Real], h_prev: &[Real]) -> (Vec<Real>, StepCache) {
        let h = self.n_h;
        let [wz, uz, bz, wr, ur, br, wh, uh, bh] = self.blocks();
        let p = &self.params;
        let gate = |w: usize, u: usize, b: usize, rh: Option<&[Real]>| -> Vec<Real> {
            (0..h)
                .map(|j| {
                    let mut s = p[b + j];
                    for (i, xi) in x.iter().enumerate() {
                        s += p[w + j * self.n_in + i] * xi;
                    }
                    let hv = rh.unwrap_or(h_prev);
                    for (i, hi) in hv.iter().enumerate() {
                        s += p[u + j * h + i] * hi;
                    }
                    s
                })
                .collect()
        };
        let z: Vec<Real> = gate(wz, uz, bz, None).into_iter().map(sigmoid).collect();
        let r: Vec<Real> = gate(wr, ur, br, None).into_iter().map(sigmoid).collect();
        let rh: Vec<Real> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
        let hhat: Vec<Real> = gate(wh, uh, bh, Some(&rh)).into_iter().map(Real::tanh).collect();
        let h_new: Vec<Real> = (0..h).map(|j| (1.0 - z[j]) * h_prev[j] + z[j] * hhat[j]).collect();
        let cache =
            StepCache { x: x.to_vec(), h_prev: h_prev.to_vec(), z, r, hhat };
        (h_new, cache)
    }

    /// Backward through one step: consumes dL/dh_t, accumulates parameter
    /// gradients into `grad`, returns (dL/dh_{t−1}, dL/dx_t).
    pub fn backward(
        &self,
        cache: &StepCache,
        dh: &[Real],
        grad: &mut [Real],
    ) -> (Vec<Real>, Vec<Real>) {
        let h = self.n_h;
        let [wz, uz, bz, wr, ur, br, wh, uh, bh] = self.blocks();
        let p = &self.params;
        let c = cache;

        // Pre-activation gradients.
        let daz: Vec<Real> = (0..h)
            .map(|j| dh[j] * (c.hhat[j] - c.h_prev[j]) * c.z[j] * (1.0 - c.z[j]))
            .collect();
        let dah: Vec<Real> =
            (0..h).map(|j| dh[j] * c.z[j] * (1.0 - c.hhat[j] * c.hhat[j])).collect();
        // The candidate's recurrent input is r ⊙ h_prev.
        let mut drh = vec![0.0; h];
        for j in 0..h {
            for i in 0..h {
                drh[i] += p[uh + j * h + i] * dah[j];
            }
        }
        let dar: Vec<Real> =
            (0..h).map(|j| drh[j] * c.h_prev[j] * c.r[j] * (1.0 - c.r[j])).collect();

        let rh: Vec<Real> = c.r.iter().zip(&c.h_prev).map(|(a, b)| a * b).collect();
        let mut acc =
            |w: usize, u: usize, b: usize, da: &[Real], hv: &[Real]| {
                for j in 0..h {
                    for (i, xi) in c.x.iter().enumerate() {
                        grad[w + j * self.n_in + i] += da[j] * xi;
                    }
                    for (i, hi) in hv.iter().enumerate() {
                        grad[u + j * h + i] += da[j] * hi;
                    }
                    grad[b + j] += da[j];
                }
            };
        acc(wz, uz, bz, &daz, &c.h_prev);
        acc(wr, ur, br, &dar, &c.h_prev);
        acc(wh, uh, bh, &dah, &rh);

        let mut dh_prev: Vec<Real> = (0..h).map(|j| dh[j] * (1.0 - c.z[j])).collect();
        for j in 0..h {
            for i in 0..h {
                dh_prev[i] += p[uz + j * h + i] * daz[j] + p[ur + j * h + i] * dar[j];
            }
            // r ⊙ h_prev path.
        }
        for i in 0..h {
            dh_prev[i] += drh[i] * c.r[i];
        }
        let mut dx = vec![0.0; self.n_in];
        for j in 0..h {
            for i in 0..self.n_in {
                dx[i] += p[wz + j * self.n_in + i] * daz[j]
                    + p[wr + j * self.n_in + i] * dar[j]
                    + p[wh + j * self.n_in + i] * dah[j];
            }
        }
        (dh_prev, dx)
    }
}

/// Encoder + autoregressive decoder + linear readout. Inputs are normalized
/// per feature to roughly [−1, 1] using fixed road-scale bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    pub encoder: GruCell,
    pub decoder: GruCell,
    /// Readout `y = Wo h + bo`, flat [Wo (3×h), bo (3)].
    pub readout: Vec<Real>,
    pub latent_dim: usize,
}

/// Per-feature scale for start-relative coordinates. Centering each
/// trajectory on its first sample makes the latent encode motion shape
/// rather than the (arbitrary) start lane, position, and cruise speed.
const SCALE: [Real; IN_DIM] = [5.0, 3.0, 3.0];

pub fn normalize(s: &[Real; IN_DIM], origin: &[Real; IN_DIM]) -> [Real; IN_DIM] {
    [
        (s[0] - origin[0]) / SCALE[0],
        (s[1] - origin[1]) / SCALE[1],
        (s[2] - origin[2]) / SCALE[2],
    ]
}

pub struct DecodeCache {
    caches: Vec<StepCache>,
    hidden: Vec<Vec<Real>>,
    pub output: Vec<[Real; IN_DIM]>,
}

pub struct EncodeCache {
    caches: Vec<StepCache>,
    pub latent: Vec<Real>,
}

impl Autoencoder {
    pub fn new(latent_dim: usize, rng: &mut ChaCha8Rng) -> Autoencoder {
        let encoder = GruCell::new(IN_DIM, latent_dim, rng);
        let decoder = GruCell::new(IN_DIM, latent_dim, rng);
        let n_read = IN_DIM * latent_dim + IN_DIM;
        let bound = (6.0 / (latent_dim + IN_DIM) as Real).sqrt();
        let readout = (0..n_read).map(|_| rng.gen_range(-bound..bound)).collect();
        Autoencoder { encoder, decoder, readout, latent_dim }
    }

    pub fn param_count(&self) -> usize {
        self.encoder.params.len() + self.decoder.params.len() + self.readout.len()
    }

    /// The latent is the mean of the hidden states, so early and late motion
    /// weigh equally.
    pub fn encode(&self, traj: &Traj) -> Result<EncodeCache> {
        if traj.is_empty() {
            return Err(DetectError::InvalidInput("empty trajectory".into()));
        }
        let mut h = vec![0.0; self.latent_dim];
        let mut latent = vec![0.0; self.latent_dim];
        let mut caches = Vec::with_capacity(traj.len());
        let origin = traj[0];
        for s in traj {
            let (next, cache) = self.encoder.step(&normalize(s, &origin), &h);
            h = next;
            caches.push(cache);
            for (l, hi) in latent.iter_mut().zip(&h) {
                *l += hi;
            }
        }
        latent.iter_mut().for_each(|l| *l /= traj.len() as Real);
        Ok(EncodeCache { caches, latent })
    }

    /// Latent representation of a trajectory.
    pub fn latent(&self, traj: &Traj) -> Result<Vec<Real>> {
        Ok(self.encode(traj)?.latent)
    }

    pub fn decode(&self, latent: &[Real], len: usize) -> DecodeCache {
        let h_dim = self.latent_dim;
        let mut h = latent.to_vec();
        let mut y = [0.0; IN_DIM];
        let mut caches = Vec::with_capacity(len);
        let mut hidden = Vec::with_capacity(len);
        let mut output = Vec::with_capacity(len);
        for _ in 0..len {
            let (next, cache) = self.decoder.step(&y, &h);
            h = next;
            for d in 0..IN_DIM {
                y[d] = self.readout[IN_DIM * h_dim + d];
                for i in 0..h_dim {
                    y[d] += self.readout[d * h_dim + i] * h[i];
                }
            }
            caches.push(cache);
            hidden.push(h.clone());
            output.push(y);
        }
        DecodeCache { caches, hidden, output }
    }

    /// Reconstruction in normalized feature space.
    pub fn reconstruct(&self, traj: &Traj) -> Result<Vec<[Real; IN_DIM]>> {
        let enc = self.encode(traj)?;
        Ok(self.decode(&enc.latent, traj.len()).output)
    }

    /// Squared reconstruction error of one trajectory (normalized space,
    /// summed over slots and features).
    pub fn recon_error(&self, traj: &Traj) -> Result<Real> {
        let rec = self.reconstruct(traj)?;
        let origin = traj[0];
        Ok(rec
            .iter()
            .zip(traj)
            .map(|(y, s)| {
                let t = normalize(s, &origin);
                (0..IN_DIM).map(|d| (y[d] - t[d]).powi(2)).sum::<Real>()
            })
            .sum())
    }

    /// Backpropagate one trajectory's losses. `dlatent_extra` is the gradient
    /// of any additional loss on the latent (the clustering term); `scale`
    /// multiplies the reconstruction term. Gradients are accumulated into
    /// `grad` laid out as [encoder | decoder | readout].
    pub fn backward(
        &self,
        traj: &Traj,
        enc: &EncodeCache,
        dec: &DecodeCache,
        scale: Real,
        dlatent_extra: &[Real],
        grad: &mut [Real],
    ) {
        let h_dim = self.latent_dim;
        let n_enc = self.encoder.params.len();
        let n_dec = self.decoder.params.len();
        let (genc, rest) = grad.split_at_mut(n_enc);
        let (gdec, gread) = rest.split_at_mut(n_dec);

        // Decoder: walk backward, feeding the autoregressive input gradient
        // into the previous step's readout.
        let len = traj.len();
        let origin = traj[0];
        let mut dh = vec![0.0; h_dim];
        let mut dy_next: Vec<Real> = vec![0.0; IN_DIM];
        for t in (0..len).rev() {
            let target = normalize(&traj[t], &origin);
            let mut dy: Vec<Real> = (0..IN_DIM)
                .map(|d| 2.0 * scale * (dec.output[t][d] - target[d]) + dy_next[d])
                .collect();
            // Readout backward into dh.
            for d in 0..IN_DIM {
                for i in 0..h_dim {
                    gread[d * h_dim + i] += dy[d] * dec.hidden[t][i];
                    dh[i] += dy[d] * self.readout[d * h_dim + i];
                }
                gread[IN_DIM * h_dim + d] += dy[d];
            }
            let (dh_prev, dx) = self.decoder.backward(&dec.caches[t], &dh, gdec);
            dh = dh_prev;
            dy.copy_from_slice(&dx);
            dy_next = dy;
        }
        // Decoder h0 is the latent; the latent is the mean of the encoder's
        // hidden states, so its gradient feeds every step.
        let dlat: Vec<Real> = dh.iter().zip(dlatent_extra).map(|(a, b)| a + b).collect();
        let per = 1.0 / enc.caches.len() as Real;
        let mut dh_enc = vec![0.0; h_dim];
        for t in (0..enc.caches.len()).rev() {
            for (d, l) in dh_enc.iter_mut().zip(&dlat) {
                *d += l * per;
            }
            let (dh_prev, _) = self.encoder.backward(&enc.caches[t], &dh_enc, genc);
            dh_enc = dh_prev;
        }
    }

    pub fn params(&self) -> Vec<Real> {
        let mut p = self.encoder.params.clone();
        p.extend_from_slice(&self.decoder.params);
        p.extend_from_slice(&self.readout);
        p
    }

    pub fn set_params(&mut self, p: &[Real]) {
        let n_enc = self.encoder.params.len();
        let n_dec = self.decoder.params.len();
        self.encoder.params.copy_from_slice(&p[..n_enc]);
        self.decoder.params.copy_from_slice(&p[n_enc..n_enc + n_dec]);
        self.readout.copy_from_slice(&p[n_enc + n_dec..]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::SeedableRng;

    fn toy_traj(k: usize) -> Traj {
        (0..k).map(|i| [3.0 + 0.1 * i as Real, 21.0, 10.0 + (i as Real).sin()]).collect()
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = Autoencoder::new(4, &mut rng);
        let traj = toy_traj(5);
        let dlat = [0.3, -0.2, 0.05, 0.1];

        let loss = |net: &Autoencoder| -> Real {
            let enc = net.encode(&traj).unwrap();
            let dec = net.decode(&enc.latent, traj.len());
            let origin = traj[0];
            let re: Real = dec
                .output
                .iter()
                .zip(&traj)
                .map(|(y, s)| {
                    let t = normalize(s, &origin);
                    (0..IN_DIM).map(|d| (y[d] - t[d]).powi(2)).sum::<Real>()
                })
                .sum();
            re + enc.latent.iter().zip(&dlat).map(|(h, d)| h * d).sum::<Real>()
        };

        let enc = net.encode(&traj).unwrap();
        let dec = net.decode(&enc.latent, traj.len());
        let mut grad = vec![0.0; net.param_count()];
        net.backward(&traj, &enc, &dec, 1.0, &dlat, &mut grad);

        let base = net.params();
        let h = 1e-6;
        for i in (0..base.len()).step_by(13) {
            let mut up = base.clone();
            up[i] += h;
            net.set_params(&up);
            let lu = loss(&net);
            let mut dn = base.clone();
            dn[i] -= h;
            net.set_params(&dn);
            let ld = loss(&net);
            net.set_params(&base);
            let numeric = (lu - ld) / (2.0 * h);
            assert_abs_diff_eq!(grad[i], numeric, epsilon = 1e-4);
        }
    }

    #[test]
    fn autoencoder_training_reduces_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = Autoencoder::new(8, &mut rng);
        let trajs: Vec<Traj> = (0..4)
            .map(|j| {
                (0..12)
                    .map(|i| [2.0 + 0.1 * (i as Real), 18.0 + 3.0 * j as Real, 9.0])
                    .collect()
            })
            .collect();
        let loss_of = |net: &Autoencoder| -> Real {
            trajs.iter().map(|t| net.recon_error(t).unwrap()).sum::<Real>() / trajs.len() as Real
        };
        let before = loss_of(&net);
        let mut opt = crate::adam::Adam::new(net.param_count(), 1e-2);
        for _ in 0..60 {
            let mut grad = vec![0.0; net.param_count()];
            for t in &trajs {
                let enc = net.encode(t).unwrap();
                let dec = net.decode(&enc.latent, t.len());
                net.backward(t, &enc, &dec, 1.0 / trajs.len() as Real, &vec![0.0; 8], &mut grad);
            }
            let mut p = net.params();
            opt.step(&mut p, &grad);
            net.set_params(&p);
        }
        let after = loss_of(&net);
        assert!(after < 0.3 * before, "loss {before} -> {after}");
    }

    #[test]
    fn empty_trajectory_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Autoencoder::new(4, &mut rng);
        assert!(net.encode(&vec![]).is_err());
    }
}
