mod common;

use common::{oracle, random_formula, random_signal, rng};
use mirage_stl::{
    misclassification_rate, parse_formula, robustness, satisfies, StlError, StlFormula,
};

#[test]
fn matches_brute_force_oracle() {
    let mut r = rng(11);
    for case in 0..1000 {
        let sig = random_signal(&mut r, 20);
        let phi = random_formula(&mut r, 3, 12);
        let got = robustness(&sig, &phi, 0).unwrap();
        let want = oracle(&sig, &phi, 0);
        assert_eq!(got, want, "case {case} diverged from the oracle");
    }
}

#[test]
fn single_feature_predicate_reads_the_sample() {
    let sig = vec![[1.0, 2.0, 5.0]];
    let phi = StlFormula::pred([0.0, 0.0, 1.0], 0.0);
    assert_eq!(robustness(&sig, &phi, 0).unwrap(), 5.0);
}

#[test]
fn always_window_on_zero_trajectory() {
    let phi = parse_formula("G[30,31](0.4111*x - 0.3976*y + 3.8745 > 0)").unwrap();
    let sig = vec![[0.0; 3]; 40];
    assert_eq!(robustness(&sig, &phi, 0).unwrap(), 3.8745);
}

#[test]
fn zero_robustness_satisfies() {
    let sig = vec![[0.0; 3]];
    let phi = StlFormula::pred([1.0, 0.0, 0.0], 0.0);
    assert_eq!(robustness(&sig, &phi, 0).unwrap(), 0.0);
    assert!(satisfies(&sig, &phi).unwrap());
}

#[test]
fn predicate_negation_duality() {
    let mut r = rng(12);
    for _ in 0..200 {
        let sig = random_signal(&mut r, 16);
        let phi = random_formula(&mut r, 3, 10);
        let mirrored = phi.negate_predicates().dual();
        let a = robustness(&sig, &phi, 0).unwrap();
        let b = robustness(&sig, &mirrored, 0).unwrap();
        assert_eq!(a, -b);
    }
}

#[test]
fn always_over_singleton_window_is_the_child() {
    let mut r = rng(13);
    for _ in 0..100 {
        let sig = random_signal(&mut r, 10);
        let child = random_formula(&mut r, 2, 4);
        let phi = StlFormula::always(3, 3, child.clone()).unwrap();
        assert_eq!(
            robustness(&sig, &phi, 0).unwrap(),
            robustness(&sig, &child, 3).unwrap()
        );
    }
}

#[test]
fn raising_every_predicate_never_lowers_robustness() {
    // Lowering each b by delta raises every predicate by delta pointwise.
    fn lift(phi: &StlFormula, delta: f64) -> StlFormula {
        match phi {
            StlFormula::Predicate { a, b } => StlFormula::Predicate { a: *a, b: b - delta },
            StlFormula::And(cs) => StlFormula::And(cs.iter().map(|c| lift(c, delta)).collect()),
            StlFormula::Or(cs) => StlFormula::Or(cs.iter().map(|c| lift(c, delta)).collect()),
            StlFormula::Always { k1, k2, child } => StlFormula::Always {
                k1: *k1,
                k2: *k2,
                child: Box::new(lift(child, delta)),
            },
            StlFormula::Eventually { k1, k2, child } => StlFormula::Eventually {
                k1: *k1,
                k2: *k2,
                child: Box::new(lift(child, delta)),
            },
        }
    }
    let mut r = rng(14);
    for _ in 0..200 {
        let sig = random_signal(&mut r, 16);
        let phi = random_formula(&mut r, 3, 10);
        let lifted = lift(&phi, 0.25);
        assert!(
            robustness(&sig, &lifted, 0).unwrap() >= robustness(&sig, &phi, 0).unwrap()
        );
    }
}

#[test]
fn out_of_range_window_names_the_operator() {
    let phi = parse_formula("F[0,1](G[8,9](1*x > 0))").unwrap();
    let sig = vec![[0.0; 3]; 8];
    let err = robustness(&sig, &phi, 0).unwrap_err();
    match err {
        StlError::WindowOutOfRange { path, hi, len, .. } => {
            assert!(path.contains("G[8,9]"), "path was {path}");
            assert_eq!(len, 8);
            assert!(hi >= 8);
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn misclassification_counts_both_error_kinds() {
    let mut r = rng(15);
    // Tautology: satisfied by everything, so errors are exactly the
    // out-of-class samples.
    let tautology = StlFormula::pred([0.0; 3], -1.0);
    let dataset: Vec<(Vec<[f64; 3]>, bool)> = (0..10)
        .map(|i| (random_signal(&mut r, 5), i % 3 == 0))
        .collect();
    let out_frac = dataset.iter().filter(|(_, c)| !c).count() as f64 / dataset.len() as f64;
    assert_eq!(misclassification_rate(&dataset, &tautology).unwrap(), out_frac);

    // Perfect separator on synthetic data: in-class iff x >= 1 at slot 0.
    let separator = StlFormula::pred([1.0, 0.0, 0.0], 1.0);
    let labeled: Vec<(Vec<[f64; 3]>, bool)> = (0..20)
        .map(|i| {
            let x = if i % 2 == 0 { 2.0 } else { -2.0 };
            (vec![[x, 0.0, 0.0]; 3], i % 2 == 0)
        })
        .collect();
    assert_eq!(misclassification_rate(&labeled, &separator).unwrap(), 0.0);

    let empty: Vec<(Vec<[f64; 3]>, bool)> = Vec::new();
    assert!(misclassification_rate(&empty, &tautology).is_err());
}
