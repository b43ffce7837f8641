//! Exact quantitative semantics.

use crate::{Real, Result, Sample, StlError, StlFormula};

/// Robustness `r(s_k, φ)` of a trajectory at slot `k`.
///
/// Conjunction is `−max(−r_i)`, `Always` is `−max` of the negated child over
/// the shifted window; both equal the corresponding min but are kept in the
/// negated-max form to mirror the smooth semantics. Any window falling
/// outside `[0, K−1]` is an error naming the offending operator.
pub fn robustness(sig: &[Sample], phi: &StlFormula, k: usize) -> Result<Real> {
    if sig.is_empty() {
        return Err(StlError::InvalidInput("empty trajectory".into()));
    }
    if k >= sig.len() {
        return Err(StlError::InvalidInput(format!(
            "evaluation slot {k} outside trajectory of length {}",
            sig.len()
        )));
    }
    let mut path = String::from("root");
    eval(sig, phi, k, &mut path)
}

fn eval(sig: &[Sample], phi: &StlFormula, k: usize, path: &mut String) -> Result<Real> {
    match phi {
        StlFormula::Predicate { a, b } => {
            let s = &sig[k];
            Ok(a.iter().zip(s).map(|(ai, si)| ai * si).sum::<Real>() - b)
        }
        StlFormula::And(cs) => {
            if cs.is_empty() {
                return Err(StlError::InvalidFormula("conjunction with no children".into()));
            }
            let mut worst = Real::NEG_INFINITY;
            for (i, c) in cs.iter().enumerate() {
                let len = push(path, &format!(".and{i}"));
                let r = eval(sig, c, k, path)?;
                path.truncate(len);
                worst = worst.max(-r);
            }
            Ok(-worst)
        }
        StlFormula::Or(cs) => {
            if cs.is_empty() {
                return Err(StlError::InvalidFormula("disjunction with no children".into()));
            }
            let mut best = Real::NEG_INFINITY;
            for (i, c) in cs.iter().enumerate() {
                let len = push(path, &format!(".or{i}"));
                let r = eval(sig, c, k, path)?;
                path.truncate(len);
                best = best.max(r);
            }
            Ok(best)
        }
        StlFormula::Always { k1, k2, child } => {
            let window = window_slots(sig, k, *k1, *k2, "G", path)?;
            let mut worst = Real::NEG_INFINITY;
            for kk in window {
                let len = push(path, &format!(".G[{k1},{k2}]"));
                let r = eval(sig, child, kk, path)?;
                path.truncate(len);
                worst = worst.max(-r);
            }
            Ok(-worst)
        }
        StlFormula::Eventually { k1, k2, child } => {
            let window = window_slots(sig, k, *k1, *k2, "F", path)?;
            let mut best = Real::NEG_INFINITY;
            for kk in window {
                let len = push(path, &format!(".F[{k1},{k2}]"));
                let r = eval(sig, child, kk, path)?;
                path.truncate(len);
                best = best.max(r);
            }
            Ok(best)
        }
    }
}

fn push(path: &mut String, seg: &str) -> usize {
    let len = path.len();
    path.push_str(seg);
    len
}

fn window_slots(
    sig: &[Sample],
    k: usize,
    k1: usize,
    k2: usize,
    op: &str,
    path: &str,
) -> Result<std::ops::RangeInclusive<usize>> {
    crate::ast::check_window(k1, k2)?;
    let lo = k + k1;
    let hi = k + k2;
    if hi >= sig.len() {
        return Err(StlError::WindowOutOfRange {
            path: format!("{path}.{op}[{k1},{k2}]"),
            lo,
            hi,
            len: sig.len(),
        });
    }
    Ok(lo..=hi)
}

/// `S ⊨ φ` iff the robustness at slot 0 is nonnegative.
pub fn satisfies(sig: &[Sample], phi: &StlFormula) -> Result<bool> {
    Ok(robustness(sig, phi, 0)? >= 0.0)
}

/// Fraction of samples on the wrong side of the formula: satisfied but
/// labeled out-of-class, or violated but labeled in-class.
pub fn misclassification_rate<S: AsRef<[Sample]>>(
    dataset: &[(S, bool)],
    phi: &StlFormula,
) -> Result<Real> {
    if dataset.is_empty() {
        return Err(StlError::InvalidInput("empty dataset".into()));
    }
    let mut wrong = 0usize;
    for (sig, in_class) in dataset {
        let sat = satisfies(sig.as_ref(), phi)?;
        if sat != *in_class {
            wrong += 1;
        }
    }
    Ok(wrong as Real / dataset.len() as Real)
}
