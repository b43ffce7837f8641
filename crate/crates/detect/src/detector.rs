//! Inference: encode a sensed trajectory, pick the nearest behavioral
//! cluster, and test it against that cluster's formula. The benchmark skips
//! the formulas and thresholds the latent distance instead.

use mirage_stl::robustness;

use crate::bundle::DetectorBundle;
use crate::dtcr::ClusterModel;
use crate::{DetectError, Real, Result, Traj};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    Clean,
    Spoofed,
}

/// Formula-based verdict plus the evidence behind it.
#[derive(Debug, Clone)]
pub struct Detection {
    pub verdict: Verdict,
    /// Nearest cluster index.
    pub cluster: usize,
    /// Exact robustness of the trajectory against that cluster's formula;
    /// negative means spoofed, zero counts as clean.
    pub robustness: Real,
    /// Latent distance to the nearest center.
    pub distance: Real,
}

fn dist(a: &[Real], b: &[Real]) -> Real {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<Real>().sqrt()
}

pub(crate) fn nearest_center(model: &ClusterModel, traj: &Traj) -> Result<(usize, Real)> {
    let latent = model.net.latent(traj)?;
    model
        .centers
        .iter()
        .enumerate()
        .map(|(p, c)| (p, dist(&latent, c)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| DetectError::InvalidInput("cluster model has no centers".into()))
}

/// Encode, route to the nearest cluster, and check its formula: robustness
/// below zero at slot 0 means spoofed.
pub fn detect(traj: &Traj, bundle: &DetectorBundle) -> Result<Detection> {
    let (cluster, distance) = nearest_center(&bundle.clusters, traj)?;
    let r = robustness(traj, &bundle.formulas[cluster], 0)?;
    let verdict = if r < 0.0 { Verdict::Spoofed } else { Verdict::Clean };
    Ok(Detection { verdict, cluster, robustness: r, distance })
}

/// Distance-threshold baseline: spoofed iff the nearest center is farther
/// than that cluster's calibrated threshold.
pub fn benchmark_detect(
    traj: &Traj,
    model: &ClusterModel,
    thresholds: &[Real],
) -> Result<Verdict> {
    let (cluster, distance) = nearest_center(model, traj)?;
    if thresholds.len() != model.centers.len() {
        return Err(DetectError::InvalidInput(format!(
            "{} thresholds for {} clusters",
            thresholds.len(),
            model.centers.len()
        )));
    }
    Ok(if distance > thresholds[cluster] { Verdict::Spoofed } else { Verdict::Clean })
}

/// Per-cluster threshold at the 95th percentile of training distances to the
/// assigned center.
pub fn calibrate_thresholds(model: &ClusterModel, data: &[Traj]) -> Result<Vec<Real>> {
    if data.len() != model.assignment.len() {
        return Err(DetectError::InvalidInput(format!(
            "{} trajectories against {} assignments",
            data.len(),
            model.assignment.len()
        )));
    }
    let p = model.centers.len();
    let mut by_cluster: Vec<Vec<Real>> = vec![Vec::new(); p];
    for (traj, &c) in data.iter().zip(&model.assignment) {
        let latent = model.net.latent(traj)?;
        by_cluster[c].push(dist(&latent, &model.centers[c]));
    }
    by_cluster
        .into_iter()
        .enumerate()
        .map(|(c, mut ds)| {
            if ds.is_empty() {
                return Err(DetectError::InvalidInput(format!("cluster {c} has no members")));
            }
            ds.sort_by(Real::total_cmp);
            let idx = ((ds.len() as Real * 0.95).ceil() as usize).min(ds.len()) - 1;
            Ok(ds[idx])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use mirage_core::rng::stream;
    use mirage_stl::StlFormula;

    use crate::gru::Autoencoder;

    fn toy_model() -> (ClusterModel, Vec<Traj>) {
        let mut rng = stream(21, "toy");
        let net = Autoencoder::new(4, &mut rng);
        let data: Vec<Traj> = (0..10)
            .map(|j| {
                (0..6)
                    .map(|k| [k as Real, 18.0 + 3.0 * (j % 2) as Real, 10.0])
                    .collect()
            })
            .collect();
        let mut centers = vec![vec![0.0; 4]; 2];
        let mut counts = [0usize; 2];
        let assignment: Vec<usize> = (0..10).map(|j| j % 2).collect();
        for (j, traj) in data.iter().enumerate() {
            let l = net.latent(traj).unwrap();
            counts[j % 2] += 1;
            for i in 0..4 {
                centers[j % 2][i] += l[i];
            }
        }
        for c in 0..2 {
            for i in 0..4 {
                centers[c][i] /= counts[c] as Real;
            }
        }
        let model = ClusterModel { net, centers, assignment, rank_deficient: false };
        (model, data)
    }

    #[test]
    fn trajectory_near_a_center_is_clean_for_the_benchmark() {
        let (model, data) = toy_model();
        let thresholds = calibrate_thresholds(&model, &data).unwrap();
        // Members sit within the 95th-percentile radius by construction.
        let verdicts: Vec<Verdict> = data
            .iter()
            .map(|t| benchmark_detect(t, &model, &thresholds).unwrap())
            .collect();
        let clean = verdicts.iter().filter(|v| **v == Verdict::Clean).count();
        assert!(clean >= 9, "{clean}/10 clean");
    }

    #[test]
    fn raising_thresholds_never_raises_false_positives() {
        let (model, data) = toy_model();
        let base = calibrate_thresholds(&model, &data).unwrap();
        let fp = |th: &[Real]| {
            data.iter()
                .filter(|t| benchmark_detect(t, &model, th).unwrap() == Verdict::Spoofed)
                .count()
        };
        let tight: Vec<Real> = base.iter().map(|t| t * 0.1).collect();
        let loose: Vec<Real> = base.iter().map(|t| t * 2.0).collect();
        assert!(fp(&tight) >= fp(&base));
        assert!(fp(&base) >= fp(&loose));
    }

    #[test]
    fn single_violating_slot_flags_spoofed() {
        let (model, data) = toy_model();
        // Formula: always over the full horizon, y stays below 30.
        let phi = StlFormula::always(
            0,
            5,
            StlFormula::Predicate { a: [0.0, -1.0, 0.0], b: -30.0 },
        )
        .unwrap();
        let bundle = DetectorBundle {
            clusters: model,
            formulas: vec![phi.clone(), phi],
            thresholds: vec![1.0, 1.0],
        };
        let mut bad = data[0].clone();
        bad[3][1] = 31.0;
        assert_eq!(detect(&data[0], &bundle).unwrap().verdict, Verdict::Clean);
        assert_eq!(detect(&bad, &bundle).unwrap().verdict, Verdict::Spoofed);
    }
}
