//! Seeded Lloyd K-means with restarts, used on the rows of the relaxed
//! cluster-indicator matrix.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::{DetectError, Real, Result};

pub struct KmeansResult {
    pub assignment: Vec<usize>,
    pub centers: Vec<Vec<Real>>,
    pub inertia: Real,
}

fn dist2(a: &[Real], b: &[Real]) -> Real {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lloyd(points: &[Vec<Real>], k: usize, rng: &mut ChaCha8Rng) -> Option<KmeansResult> {
    let n = points.len();
    let dim = points[0].len();
    // Distinct random points as initial centers.
    let mut centers: Vec<Vec<Real>> = Vec::with_capacity(k);
    let mut tries = 0;
    while centers.len() < k {
        let c = points[rng.gen_range(0..n)].clone();
        if centers.iter().all(|e| dist2(e, &c) > 1e-18) {
            centers.push(c);
        }
        tries += 1;
        if tries > 50 * k {
            return None;
        }
    }
    let mut assignment = vec![0usize; n];
    for _ in 0..200 {
        for (i, p) in points.iter().enumerate() {
            assignment[i] = (0..k)
                .min_by(|&a, &b| dist2(p, &centers[a]).total_cmp(&dist2(p, &centers[b])))
                .unwrap();
        }
        let mut next = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assignment[i]] += 1;
            for d in 0..dim {
                next[assignment[i]][d] += p[d];
            }
        }
        if counts.iter().any(|&c| c == 0) {
            return None;
        }
        let mut shift: Real = 0.0;
        for c in 0..k {
            for d in 0..dim {
                next[c][d] /= counts[c] as Real;
            }
            shift += dist2(&next[c], &centers[c]);
            centers[c] = next[c].clone();
        }
        if shift < 1e-12 {
            break;
        }
    }
    let inertia = points.iter().enumerate().map(|(i, p)| dist2(p, &centers[assignment[i]])).sum();
    Some(KmeansResult { assignment, centers, inertia })
}

/// Best of `restarts` Lloyd runs; restarts that end with an empty cluster are
/// discarded.
pub fn kmeans(
    points: &[Vec<Real>],
    k: usize,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<KmeansResult> {
    if points.len() < k {
        return Err(DetectError::Clustering(format!(
            "{} points cannot form {k} clusters",
            points.len()
        )));
    }
    let mut best: Option<KmeansResult> = None;
    for _ in 0..restarts {
        if let Some(run) = lloyd(points, k, rng) {
            if best.as_ref().map_or(true, |b| run.inertia < b.inertia) {
                best = Some(run);
            }
        }
    }
    best.ok_or_else(|| {
        DetectError::Clustering("every restart produced an empty cluster".into())
    })
}
