//! Formula syntax tree.

use crate::{Real, Result, StlError, DIM};

/// STL formula without `until`: affine predicates, n-ary Boolean
/// connectives, and windowed temporal operators.
#[derive(Debug, Clone, PartialEq)]
pub enum StlFormula {
    /// `a·s − b > 0` on one sample.
    Predicate { a: [Real; DIM], b: Real },
    And(Vec<StlFormula>),
    Or(Vec<StlFormula>),
    /// Holds at every slot of `[k + k1, k + k2]`.
    Always { k1: usize, k2: usize, child: Box<StlFormula> },
    /// Holds at some slot of `[k + k1, k + k2]`.
    Eventually { k1: usize, k2: usize, child: Box<StlFormula> },
}

impl StlFormula {
    pub fn pred(a: [Real; DIM], b: Real) -> Self {
        StlFormula::Predicate { a, b }
    }

    pub fn and(children: Vec<StlFormula>) -> Result<Self> {
        if children.is_empty() {
            return Err(StlError::InvalidFormula("conjunction with no children".into()));
        }
        Ok(StlFormula::And(children))
    }

    pub fn or(children: Vec<StlFormula>) -> Result<Self> {
        if children.is_empty() {
            return Err(StlError::InvalidFormula("disjunction with no children".into()));
        }
        Ok(StlFormula::Or(children))
    }

    pub fn always(k1: usize, k2: usize, child: StlFormula) -> Result<Self> {
        check_window(k1, k2)?;
        Ok(StlFormula::Always { k1, k2, child: Box::new(child) })
    }

    pub fn eventually(k1: usize, k2: usize, child: StlFormula) -> Result<Self> {
        check_window(k1, k2)?;
        Ok(StlFormula::Eventually { k1, k2, child: Box::new(child) })
    }

    /// Negate every predicate (`f > 0` becomes `−f > 0`), leaving the
    /// connective structure untouched. Useful for duality checks.
    pub fn negate_predicates(&self) -> StlFormula {
        match self {
            StlFormula::Predicate { a, b } => {
                StlFormula::Predicate { a: a.map(|c| -c), b: -b }
            }
            StlFormula::And(cs) => {
                StlFormula::And(cs.iter().map(|c| c.negate_predicates()).collect())
            }
            StlFormula::Or(cs) => {
                StlFormula::Or(cs.iter().map(|c| c.negate_predicates()).collect())
            }
            StlFormula::Always { k1, k2, child } => StlFormula::Always {
                k1: *k1,
                k2: *k2,
                child: Box::new(child.negate_predicates()),
            },
            StlFormula::Eventually { k1, k2, child } => StlFormula::Eventually {
                k1: *k1,
                k2: *k2,
                child: Box::new(child.negate_predicates()),
            },
        }
    }

    /// Swap And with Or and Always with Eventually everywhere.
    pub fn dual(&self) -> StlFormula {
        match self {
            StlFormula::Predicate { a, b } => StlFormula::Predicate { a: *a, b: *b },
            StlFormula::And(cs) => StlFormula::Or(cs.iter().map(|c| c.dual()).collect()),
            StlFormula::Or(cs) => StlFormula::And(cs.iter().map(|c| c.dual()).collect()),
            StlFormula::Always { k1, k2, child } => StlFormula::Eventually {
                k1: *k1,
                k2: *k2,
                child: Box::new(child.dual()),
            },
            StlFormula::Eventually { k1, k2, child } => StlFormula::Always {
                k1: *k1,
                k2: *k2,
                child: Box::new(child.dual()),
            },
        }
    }
}

pub(crate) fn check_window(k1: usize, k2: usize) -> Result<()> {
    if k1 > k2 {
        return Err(StlError::InvalidFormula(format!("reversed window [{k1}, {k2}]")));
    }
    Ok(())
}
