mod common;

use common::{random_formula, random_signal, rng};
use mirage_stl::{robustness, smooth_robustness, time_window_indicator, SoftFormula, StlFormula};

#[test]
fn window_indicator_marks_the_interval() {
    let t = time_window_indicator(6, 2.0, 4.0, 0.1);
    assert_eq!(t, vec![0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
}

#[test]
fn high_temperature_on_separated_values_is_nearly_exact() {
    // Or over predicates whose slot-0 values are 4, 2, and 0 (gaps >= 1).
    let phi = StlFormula::Or(vec![
        StlFormula::pred([1.0, 0.0, 0.0], 0.0),
        StlFormula::pred([0.0, 1.0, 0.0], 0.0),
        StlFormula::pred([0.0, 0.0, 1.0], 0.0),
    ]);
    let sig = vec![[4.0, 2.0, 0.0]];
    let exact = robustness(&sig, &phi, 0).unwrap();
    let smooth = smooth_robustness(&sig, &phi, 0, 50.0, 0.1).unwrap();
    let range = 4.0;
    assert!((smooth - exact).abs() <= (-25.0f64).exp() * range);
}

#[test]
fn error_shrinks_as_temperature_grows() {
    let mut r = rng(31);
    for _ in 0..50 {
        let sig = random_signal(&mut r, 12);
        let phi = random_formula(&mut r, 3, 8);
        let exact = robustness(&sig, &phi, 0).unwrap();
        let errs: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&beta| (smooth_robustness(&sig, &phi, 0, beta, 0.1).unwrap() - exact).abs())
            .collect();
        assert!(errs[0] >= errs[1] - 1e-12 && errs[1] >= errs[2] - 1e-12, "errs {errs:?}");
    }
}

fn test_net() -> SoftFormula {
    SoftFormula::Bool {
        select: 0.35,
        gates: vec![0.8, 0.9],
        children: vec![
            SoftFormula::Temporal {
                select: 0.7,
                t1: 1.55,
                t2: 4.3,
                child: Box::new(SoftFormula::Predicate { a: [0.7, -0.4, 0.2], b: 0.3 }),
            },
            SoftFormula::Predicate { a: [-0.2, 0.5, 0.9], b: -0.6 },
        ],
    }
}

#[test]
fn gradients_match_central_differences() {
    let mut r = rng(32);
    let sig = random_signal(&mut r, 8);
    let net = test_net();
    let beta = 3.0;
    let eta = 1.2;
    let (_, grad) = net.eval_grad(&sig, 0, beta, eta).unwrap();
    let p0 = net.params();
    let h = 1e-6;
    for i in 0..p0.len() {
        let mut up = p0.clone();
        up[i] += h;
        let mut dn = p0.clone();
        dn[i] -= h;
        let fu = net.with_params(&up).unwrap().eval(&sig, 0, beta, eta).unwrap();
        let fd = net.with_params(&dn).unwrap().eval(&sig, 0, beta, eta).unwrap();
        let numeric = (fu - fd) / (2.0 * h);
        let denom = numeric.abs().max(1.0);
        assert!(
            (grad[i] - numeric).abs() / denom <= 1e-4,
            "param {i}: analytic {} vs numeric {numeric}",
            grad[i]
        );
    }
}

#[test]
fn window_and_selector_gradients_are_live() {
    let mut r = rng(33);
    let sig = random_signal(&mut r, 8);
    let net = test_net();
    let (_, grad) = net.eval_grad(&sig, 0, 3.0, 1.2).unwrap();
    // Layout: bool select, two gates, temporal select, t1, t2, then the
    // predicate parameters.
    assert!(grad[0].abs() > 0.0, "boolean selector gradient");
    assert!(grad[3].abs() > 0.0, "temporal selector gradient");
    assert!(grad[4].abs() + grad[5].abs() > 0.0, "window gradients");
    assert!(grad[6..10].iter().any(|g| g.abs() > 0.0), "predicate gradients");
}

#[test]
fn soft_form_round_trips_and_recovers_exact_limit() {
    let mut r = rng(34);
    for _ in 0..100 {
        let sig = random_signal(&mut r, 12);
        let phi = random_formula(&mut r, 3, 8);
        let soft = SoftFormula::from_formula(&phi);
        assert_eq!(soft.harden().unwrap(), phi);
        let exact = robustness(&sig, &phi, 0).unwrap();
        let nearly = soft.eval(&sig, 0, 400.0, 1e-3).unwrap();
        assert!((nearly - exact).abs() <= 1e-6 * exact.abs().max(1.0));
    }
}

#[test]
fn rejects_nonpositive_temperature() {
    let sig = vec![[0.0; 3]; 4];
    let phi = StlFormula::pred([1.0, 0.0, 0.0], 0.0);
    assert!(smooth_robustness(&sig, &phi, 0, 0.0, 0.1).is_err());
    assert!(smooth_robustness(&sig, &phi, 0, 10.0, 0.0).is_err());
}
