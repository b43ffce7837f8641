//! Joint representation learning and clustering of the one-class trajectory
//! dataset: a recurrent autoencoder trained on reconstruction plus a K-means
//! surrogate loss, with the relaxed cluster-indicator matrix refreshed from
//! the latents' top singular directions on a fixed cadence.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use mirage_core::rng::stream;

use crate::adam::Adam;
use crate::gru::Autoencoder;
use crate::kmeans::kmeans;
use crate::{DetectError, Real, Result, Traj};

/// Trained clustering stage: encoder/decoder, per-cluster latent centers, and
/// the training assignment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClusterModel {
    pub net: Autoencoder,
    /// K-means centroids in latent space (means of member latents).
    pub centers: Vec<Vec<Real>>,
    pub assignment: Vec<usize>,
    /// Set when the latent matrix was rank-deficient at an indicator update.
    pub rank_deficient: bool,
}

/// One-vs-rest dataset for one cluster: every training trajectory, labeled
/// in-class (true) or out-of-class (false).
#[derive(Debug, Clone)]
pub struct PseudoLabeled {
    pub class: usize,
    pub members: Vec<(usize, bool)>,
}

/// Relaxed indicator: columns are the top-`p` right singular directions of
/// the m×D latent matrix. Returns the D×p matrix and a rank-deficiency flag
/// (orthonormality holds either way; trailing columns of a rank-deficient H
/// are an arbitrary orthonormal completion).
pub fn indicator_update(h: &DMatrix<Real>, p: usize) -> Result<(DMatrix<Real>, bool)> {
    let (f, _, flagged) = top_right_singular(h, p)?;
    Ok((f, flagged))
}

fn top_right_singular(
    h: &DMatrix<Real>,
    p: usize,
) -> Result<(DMatrix<Real>, Vec<Real>, bool)> {
    let d = h.ncols();
    if d < p {
        return Err(DetectError::InvalidInput(format!("{d} samples for {p} clusters")));
    }
    let svd = h.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| DetectError::Clustering("SVD failed to produce singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    if order.len() < p {
        return Err(DetectError::Clustering(format!(
            "latent dimension {} below cluster count {p}",
            order.len()
        )));
    }
    let mut f = DMatrix::zeros(d, p);
    for (col, &idx) in order.iter().take(p).enumerate() {
        f.set_column(col, &v_t.row(idx).transpose());
    }
    let top = svd.singular_values[order[0]];
    let flagged = svd.singular_values[order[p - 1]] <= 1e-12 * top.max(1.0);
    let sv = order.iter().take(p).map(|&i| svd.singular_values[i]).collect();
    Ok((f, sv, flagged))
}

/// Loss triple over a dataset: mean squared reconstruction error, the K-means
/// surrogate `tr(HᵀH) − tr(FᵀHᵀHF)`, and their λ₀-weighted sum.
pub fn dtcr_losses(
    net: &Autoencoder,
    data: &[Traj],
    f: &DMatrix<Real>,
    lambda0: Real,
) -> Result<(Real, Real, Real)> {
    if data.is_empty() {
        return Err(DetectError::InvalidInput("empty dataset".into()));
    }
    let h = latent_matrix(net, data)?;
    let l_re = data.iter().map(|t| net.recon_error(t)).sum::<Result<Real>>()?
        / data.len() as Real;
    let l_cl = clustering_loss(&h, f);
    Ok((l_re, l_cl, l_re + lambda0 * l_cl))
}

fn clustering_loss(h: &DMatrix<Real>, f: &DMatrix<Real>) -> Real {
    let hf = h * f;
    h.norm_squared() - hf.norm_squared()
}

fn latent_matrix(net: &Autoencoder, data: &[Traj]) -> Result<DMatrix<Real>> {
    let m = net.latent_dim;
    let mut h = DMatrix::zeros(m, data.len());
    for (d, traj) in data.iter().enumerate() {
        let lat = net.latent(traj)?;
        h.set_column(d, &nalgebra::DVector::from_vec(lat));
    }
    Ok(h)
}

/// Alternating training: every iteration runs one minibatch epoch on the
/// joint loss with the indicator held fixed; every `i_t`-th iteration
/// refreshes the indicator from the current latents. K-means on the
/// indicator rows then yields memberships; centers are latent means.
#[allow(clippy::too_many_arguments)]
pub fn dtcr_train(
    data: &[Traj],
    p: usize,
    i_max: usize,
    i_t: usize,
    lambda0: Real,
    latent_dim: usize,
    learning_rate: Real,
    seed: u64,
) -> Result<(ClusterModel, Vec<PseudoLabeled>)> {
    if data.len() < p {
        return Err(DetectError::InvalidInput(format!(
            "{} trajectories for {p} clusters",
            data.len()
        )));
    }
    if i_t == 0 {
        return Err(DetectError::InvalidInput("indicator cadence must be positive".into()));
    }
    let mut init_rng = stream(seed, "dtcr-init");
    let mut net = Autoencoder::new(latent_dim, &mut init_rng);
    let mut shuffle_rng = stream(seed, "dtcr-batch");

    let mut h = latent_matrix(&net, data)?;
    let (mut f, mut rank_deficient) = indicator_update(&h, p)?;

    let n_params = net.param_count();
    let mut opt = Adam::new(n_params, learning_rate);
    let batch = 32.min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();

    for i in 1..=i_max {
        // Cross term of the clustering gradient, frozen for the epoch:
        // d L_cl / d h_d = 2(h_d − (HFFᵀ)_d).
        let proj = &h * &f * f.transpose();
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(batch) {
            let mut grad = vec![0.0; n_params];
            for &d in chunk {
                let enc = net.encode(&data[d])?;
                let dec = net.decode(&enc.latent, data[d].len());
                let dlat: Vec<Real> = (0..latent_dim)
                    .map(|j| 2.0 * lambda0 * (enc.latent[j] - proj[(j, d)]) / data.len() as Real)
                    .collect();
                net.backward(
                    &data[d],
                    &enc,
                    &dec,
                    1.0 / chunk.len() as Real,
                    &dlat,
                    &mut grad,
                );
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(DetectError::Diverged(format!("non-finite gradient at round {i}")));
            }
            let mut params = net.params();
            opt.step(&mut params, &grad);
            net.set_params(&params);
        }
        h = latent_matrix(&net, data)?;
        if i % i_t == 0 {
            let (next_f, flagged) = indicator_update(&h, p)?;
            f = next_f;
            rank_deficient |= flagged;
        }
    }

    // Discrete memberships from the indicator rows, scaled back by the
    // singular values. The raw rows are whitened (each direction divided by
    // its σ), which inflates noise directions; scaling restores the latents'
    // rank-P projection coordinates.
    let (f_final, sv, flagged) = top_right_singular(&h, p)?;
    rank_deficient |= flagged;
    let rows: Vec<Vec<Real>> = (0..data.len())
        .map(|d| f_final.row(d).iter().zip(&sv).map(|(x, s)| x * s).collect())
        .collect();
    let mut km_rng = stream(seed, "dtcr-kmeans");
    let km = kmeans(&rows, p, 10, &mut km_rng)?;

    let mut centers = vec![vec![0.0; latent_dim]; p];
    let mut counts = vec![0usize; p];
    for (d, &c) in km.assignment.iter().enumerate() {
        counts[c] += 1;
        for j in 0..latent_dim {
            centers[c][j] += h[(j, d)];
        }
    }
    for c in 0..p {
        for j in 0..latent_dim {
            centers[c][j] /= counts[c] as Real;
        }
    }

    let pseudo = (0..p)
        .map(|c| PseudoLabeled {
            class: c,
            members: km.assignment.iter().map(|&a| (a, a == c)).enumerate()
                .map(|(d, (_, inc))| (d, inc))
                .collect(),
        })
        .collect();

    let model = ClusterModel { net, centers, assignment: km.assignment, rank_deficient };
    Ok((model, pseudo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn indicator_is_orthonormal_and_matches_residual_spectrum() {
        let mut rng = stream(11, "test-h");
        let h = DMatrix::from_fn(6, 40, |_, _| rng.gen_range(-1.0..1.0));
        let (f, flagged) = indicator_update(&h, 3).unwrap();
        assert!(!flagged);
        let gram = f.transpose() * &f;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[(i, j)], want, epsilon = 1e-10);
            }
        }
        // tr(HᵀH) − tr(FᵀHᵀHF) equals the residual singular spectrum.
        let l_cl = clustering_loss(&h, &f);
        let mut sv: Vec<Real> = h.clone().svd(false, false).singular_values.iter().cloned().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let residual: Real = sv[3..].iter().map(|s| s * s).sum();
        assert_abs_diff_eq!(l_cl, residual, epsilon = 1e-9);
    }

    #[test]
    fn full_basis_zeroes_the_clustering_loss() {
        let mut rng = stream(12, "test-h");
        let h = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let (f, _) = indicator_update(&h, 4).unwrap();
        assert_abs_diff_eq!(clustering_loss(&h, &f), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn block_structure_recovered() {
        // Three orthogonal groups of latent columns; the indicator rows must
        // separate them.
        let mut h = DMatrix::zeros(6, 30);
        for d in 0..30 {
            let g = d / 10;
            h[(2 * g, d)] = 1.0 + 0.01 * (d % 10) as Real;
            h[(2 * g + 1, d)] = 0.5;
        }
        let (f, flagged) = indicator_update(&h, 3).unwrap();
        assert!(!flagged);
        let rows: Vec<Vec<Real>> = (0..30).map(|d| f.row(d).iter().cloned().collect()).collect();
        let mut rng = stream(13, "test-km");
        let km = kmeans(&rows, 3, 10, &mut rng).unwrap();
        for g in 0..3 {
            for d in 1..10 {
                assert_eq!(km.assignment[10 * g], km.assignment[10 * g + d]);
            }
        }
    }

    #[test]
    fn rank_deficiency_flagged() {
        let h = DMatrix::from_fn(4, 10, |r, _| if r == 0 { 1.0 } else { 0.0 });
        let (f, flagged) = indicator_update(&h, 3).unwrap();
        assert!(flagged);
        let gram = f.transpose() * &f;
        for i in 0..3 {
            assert_abs_diff_eq!(gram[(i, i)], 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn indicator_update_never_raises_the_joint_loss() {
        let mut rng = stream(14, "test-net");
        let net = Autoencoder::new(5, &mut rng);
        let data: Vec<Traj> = (0..12)
            .map(|j| {
                let drift = 0.1 * (j % 3) as Real;
                (0..8)
                    .map(|i| [3.0 + 0.2 * i as Real, 18.0 + drift * i as Real, 10.0])
                    .collect()
            })
            .collect();
        let h = latent_matrix(&net, &data).unwrap();
        // A stale indicator: any orthonormal basis (Gram-Schmidt on random
        // columns). Refreshing from the SVD can only lower the joint loss.
        let mut stale = DMatrix::from_fn(data.len(), 2, |_, _| rng.gen_range(-1.0..1.0));
        let c0 = stale.column(0).normalize();
        stale.set_column(0, &c0);
        let c1 = stale.column(1) - c0.clone() * c0.dot(&stale.column(1));
        stale.set_column(1, &c1.normalize());
        let before = dtcr_losses(&net, &data, &stale, 50.0).unwrap().2;
        let (f_new, _) = indicator_update(&h, 2).unwrap();
        let after = dtcr_losses(&net, &data, &f_new, 50.0).unwrap().2;
        assert!(after <= before + 1e-6, "{after} > {before}");
    }
}
