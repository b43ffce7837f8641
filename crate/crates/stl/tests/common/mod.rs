//! Shared generators and a second, independently written robustness
//! recursion (min/max folds instead of negated maxes) used as the oracle.
#![allow(dead_code)]

use mirage_stl::{Real, Sample, StlFormula, DIM};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Vec<Sample> {
    (0..len)
        .map(|_| {
            let mut s = [0.0; DIM];
            for f in &mut s {
                *f = rng.gen_range(-5.0..5.0);
            }
            s
        })
        .collect()
}

pub fn random_predicate(rng: &mut ChaCha8Rng) -> StlFormula {
    let mut a = [0.0; DIM];
    for c in &mut a {
        *c = rng.gen_range(-2.0..2.0);
    }
    StlFormula::Predicate { a, b: rng.gen_range(-3.0..3.0) }
}

/// Random formula whose every temporal window chain fits within `slack`
/// slots from the evaluation point.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize, slack: usize) -> StlFormula {
    if depth == 0 {
        return random_predicate(rng);
    }
    match rng.gen_range(0..5) {
        0 => random_predicate(rng),
        1 | 2 => {
            let n = rng.gen_range(2..=3);
            let children = (0..n).map(|_| random_formula(rng, depth - 1, slack)).collect();
            if rng.gen_bool(0.5) {
                StlFormula::And(children)
            } else {
                StlFormula::Or(children)
            }
        }
        _ => {
            let k2 = rng.gen_range(0..=slack.min(6));
            let k1 = rng.gen_range(0..=k2);
            let child = random_formula(rng, depth - 1, slack - k2);
            if rng.gen_bool(0.5) {
                StlFormula::Always { k1, k2, child: Box::new(child) }
            } else {
                StlFormula::Eventually { k1, k2, child: Box::new(child) }
            }
        }
    }
}

/// Brute-force robustness oracle.
pub fn oracle(sig: &[Sample], phi: &StlFormula, k: usize) -> Real {
    match phi {
        StlFormula::Predicate { a, b } => {
            a.iter().zip(&sig[k]).map(|(c, s)| c * s).sum::<Real>() - b
        }
        StlFormula::And(cs) => cs
            .iter()
            .map(|c| oracle(sig, c, k))
            .fold(Real::INFINITY, Real::min),
        StlFormula::Or(cs) => cs
            .iter()
            .map(|c| oracle(sig, c, k))
            .fold(Real::NEG_INFINITY, Real::max),
        StlFormula::Always { k1, k2, child } => (k + k1..=k + k2)
            .map(|kk| oracle(sig, child, kk))
            .fold(Real::INFINITY, Real::min),
        StlFormula::Eventually { k1, k2, child } => (k + k1..=k + k2)
            .map(|kk| oracle(sig, child, kk))
            .fold(Real::NEG_INFINITY, Real::max),
    }
}
