//! Differentiable robustness.
//!
//! Every max in the exact semantics becomes a softmax-weighted average
//! `Σ wᵢxᵢ` with `wᵢ ∝ e^{βxᵢ}`; temporal windows become soft indicator
//! gates with slope `η`; the discrete And/Or (and Always/Eventually) choice
//! becomes a blend controlled by a selector probability. Exact semantics are
//! recovered as `β → ∞`, `η → 0`, and selectors at 0 or 1. Gradients are
//! carried forward-mode through a small dual-number type, so one evaluation
//! yields the value and the derivative with respect to every parameter.

use crate::{Real, Result, Sample, StlError, StlFormula, DIM};

/// Value plus gradient against a flat parameter vector. A zero-length
/// gradient is a plain scalar, which keeps value-only evaluation on the same
/// code path as training.
#[derive(Debug, Clone)]
pub struct Dual {
    pub v: Real,
    pub g: Vec<Real>,
}

impl Dual {
    fn constant(v: Real, n: usize) -> Dual {
        Dual { v, g: vec![0.0; n] }
    }

    fn seeded(v: Real, idx: Option<usize>, n: usize) -> Dual {
        let mut g = vec![0.0; n];
        if let Some(i) = idx {
            g[i] = 1.0;
        }
        Dual { v, g }
    }

    fn add(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            g: self
                .g
                .iter()
                .zip(&o.g)
                .map(|(a, b)| a * o.v + b * self.v)
                .collect(),
        }
    }

    fn div(&self, o: &Dual) -> Dual {
        let inv = 1.0 / o.v;
        Dual {
            v: self.v * inv,
            g: self
                .g
                .iter()
                .zip(&o.g)
                .map(|(a, b)| (a - b * self.v * inv) * inv)
                .collect(),
        }
    }

    fn scale(&self, c: Real) -> Dual {
        Dual { v: self.v * c, g: self.g.iter().map(|a| a * c).collect() }
    }

    fn neg(&self) -> Dual {
        self.scale(-1.0)
    }

    fn exp(&self) -> Dual {
        let e = self.v.exp();
        Dual { v: e, g: self.g.iter().map(|a| a * e).collect() }
    }

    fn relu(&self) -> Dual {
        if self.v > 0.0 {
            self.clone()
        } else {
            Dual::constant(0.0, self.g.len())
        }
    }

    fn min(&self, o: &Dual) -> Dual {
        if self.v <= o.v {
            self.clone()
        } else {
            o.clone()
        }
    }
}

/// Differentiable counterpart of [`StlFormula`]: selectors and windows are
/// continuous, Boolean children carry participation gates.
#[derive(Debug, Clone, PartialEq)]
pub enum SoftFormula {
    Predicate { a: [Real; DIM], b: Real },
    /// `select` blends conjunction (0) into disjunction (1); `gates` weight
    /// each child's participation.
    Bool { select: Real, gates: Vec<Real>, children: Vec<SoftFormula> },
    /// `select` blends Always (0) into Eventually (1); `t1`/`t2` are the
    /// continuous window bounds.
    Temporal { select: Real, t1: Real, t2: Real, child: Box<SoftFormula> },
}

impl SoftFormula {
    /// Lossless embedding: selectors at exactly 0 or 1, gates fully open.
    pub fn from_formula(phi: &StlFormula) -> SoftFormula {
        match phi {
            StlFormula::Predicate { a, b } => SoftFormula::Predicate { a: *a, b: *b },
            StlFormula::And(cs) => SoftFormula::Bool {
                select: 0.0,
                gates: vec![1.0; cs.len()],
                children: cs.iter().map(SoftFormula::from_formula).collect(),
            },
            StlFormula::Or(cs) => SoftFormula::Bool {
                select: 1.0,
                gates: vec![1.0; cs.len()],
                children: cs.iter().map(SoftFormula::from_formula).collect(),
            },
            StlFormula::Always { k1, k2, child } => SoftFormula::Temporal {
                select: 0.0,
                t1: *k1 as Real,
                t2: *k2 as Real,
                child: Box::new(SoftFormula::from_formula(child)),
            },
            StlFormula::Eventually { k1, k2, child } => SoftFormula::Temporal {
                select: 1.0,
                t1: *k1 as Real,
                t2: *k2 as Real,
                child: Box::new(SoftFormula::from_formula(child)),
            },
        }
    }

    /// Maximum-likelihood hardening: selectors and gates round at 0.5,
    /// windows round to the nearest slots. Closed gates drop children; if
    /// every gate is closed the widest-open child is kept.
    pub fn harden(&self) -> Result<StlFormula> {
        match self {
            SoftFormula::Predicate { a, b } => Ok(StlFormula::Predicate { a: *a, b: *b }),
            SoftFormula::Bool { select, gates, children } => {
                let mut kept: Vec<StlFormula> = children
                    .iter()
                    .zip(gates)
                    .filter(|(_, g)| **g >= 0.5)
                    .map(|(c, _)| c.harden())
                    .collect::<Result<_>>()?;
                if kept.is_empty() {
                    let best = gates
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(b.1))
                        .map(|(i, _)| i)
                        .ok_or_else(|| {
                            StlError::InvalidFormula("boolean node with no children".into())
                        })?;
                    kept.push(children[best].harden()?);
                }
                Ok(if *select >= 0.5 { StlFormula::Or(kept) } else { StlFormula::And(kept) })
            }
            SoftFormula::Temporal { select, t1, t2, child } => {
                let k1 = t1.round().max(0.0) as usize;
                let k2 = t2.round().max(0.0) as usize;
                let (k1, k2) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
                let c = child.harden()?;
                if *select >= 0.5 {
                    StlFormula::eventually(k1, k2, c)
                } else {
                    StlFormula::always(k1, k2, c)
                }
            }
        }
    }

    /// Number of trainable parameters under the flat layout.
    pub fn param_count(&self) -> usize {
        match self {
            SoftFormula::Predicate { .. } => DIM + 1,
            SoftFormula::Bool { gates, children, .. } => {
                1 + gates.len() + children.iter().map(|c| c.param_count()).sum::<usize>()
            }
            SoftFormula::Temporal { child, .. } => 3 + child.param_count(),
        }
    }

    /// Flatten parameters depth-first: predicate `[a.., b]`, boolean
    /// `[select, gates..]`, temporal `[select, t1, t2]`.
    pub fn params(&self) -> Vec<Real> {
        let mut out = Vec::with_capacity(self.param_count());
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut Vec<Real>) {
        match self {
            SoftFormula::Predicate { a, b } => {
                out.extend_from_slice(a);
                out.push(*b);
            }
            SoftFormula::Bool { select, gates, children } => {
                out.push(*select);
                out.extend_from_slice(gates);
                for c in children {
                    c.collect_params(out);
                }
            }
            SoftFormula::Temporal { select, t1, t2, child } => {
                out.push(*select);
                out.push(*t1);
                out.push(*t2);
                child.collect_params(out);
            }
        }
    }

    /// Rebuild the same structure from a flat parameter vector.
    pub fn with_params(&self, p: &[Real]) -> Result<SoftFormula> {
        if p.len() != self.param_count() {
            return Err(StlError::InvalidInput(format!(
                "parameter vector of length {} against a structure wanting {}",
                p.len(),
                self.param_count()
            )));
        }
        let mut at = 0;
        Ok(self.rebuild(p, &mut at))
    }

    fn rebuild(&self, p: &[Real], at: &mut usize) -> SoftFormula {
        match self {
            SoftFormula::Predicate { .. } => {
                let mut a = [0.0; DIM];
                a.copy_from_slice(&p[*at..*at + DIM]);
                let b = p[*at + DIM];
                *at += DIM + 1;
                SoftFormula::Predicate { a, b }
            }
            SoftFormula::Bool { gates, children, .. } => {
                let select = p[*at];
                let g = p[*at + 1..*at + 1 + gates.len()].to_vec();
                *at += 1 + gates.len();
                let cs = children.iter().map(|c| c.rebuild(p, at)).collect();
                SoftFormula::Bool { select, gates: g, children: cs }
            }
            SoftFormula::Temporal { child, .. } => {
                let (select, t1, t2) = (p[*at], p[*at + 1], p[*at + 2]);
                *at += 3;
                SoftFormula::Temporal {
                    select,
                    t1,
                    t2,
                    child: Box::new(child.rebuild(p, at)),
                }
            }
        }
    }

    /// Smooth robustness value at slot `k`.
    pub fn eval(&self, sig: &[Sample], k: usize, beta: Real, eta: Real) -> Result<Real> {
        Ok(self.eval_node(sig, k, beta, eta, &mut 0, 0)?.v)
    }

    /// Smooth robustness and its gradient over the flat parameter layout.
    pub fn eval_grad(
        &self,
        sig: &[Sample],
        k: usize,
        beta: Real,
        eta: Real,
    ) -> Result<(Real, Vec<Real>)> {
        let n = self.param_count();
        let d = self.eval_node(sig, k, beta, eta, &mut 0, n)?;
        Ok((d.v, d.g))
    }

    fn eval_node(
        &self,
        sig: &[Sample],
        k: usize,
        beta: Real,
        eta: Real,
        at: &mut usize,
        n: usize,
    ) -> Result<Dual> {
        if beta <= 0.0 {
            return Err(StlError::InvalidInput("temperature must be positive".into()));
        }
        if eta <= 0.0 {
            return Err(StlError::InvalidInput("window slope must be positive".into()));
        }
        if k >= sig.len() {
            return Err(StlError::InvalidInput(format!(
                "evaluation slot {k} outside trajectory of length {}",
                sig.len()
            )));
        }
        match self {
            SoftFormula::Predicate { a, b } => {
                let base = *at;
                *at += DIM + 1;
                let mut acc = Dual::seeded(*b, seed(base + DIM, n), n).neg();
                for (i, (ai, si)) in a.iter().zip(&sig[k]).enumerate() {
                    acc = acc.add(&Dual::seeded(*ai, seed(base + i, n), n).scale(*si));
                }
                Ok(acc)
            }
            SoftFormula::Bool { select, gates, children } => {
                let base = *at;
                *at += 1 + gates.len();
                let sel = Dual::seeded(*select, seed(base, n), n);
                let mut vals = Vec::with_capacity(children.len());
                let mut gs = Vec::with_capacity(children.len());
                for (i, c) in children.iter().enumerate() {
                    gs.push(Dual::seeded(gates[i], seed(base + 1 + i, n), n));
                    vals.push(c.eval_node(sig, k, beta, eta, at, n)?);
                }
                let or = soft_max_avg(&vals, &gs, beta)?;
                let neg: Vec<Dual> = vals.iter().map(Dual::neg).collect();
                let and = soft_max_avg(&neg, &gs, beta)?.neg();
                Ok(blend(&sel, &and, &or))
            }
            SoftFormula::Temporal { select, t1, t2, child } => {
                let base = *at;
                *at += 3;
                let sel = Dual::seeded(*select, seed(base, n), n);
                let d1 = Dual::seeded(*t1, seed(base + 1, n), n);
                let d2 = Dual::seeded(*t2, seed(base + 2, n), n);
                let child_at = *at;
                let mut vals = Vec::with_capacity(sig.len());
                let mut gs = Vec::with_capacity(sig.len());
                for i in 0..sig.len() {
                    let offset = i as Real - k as Real;
                    let gate = soft_indicator(offset, &d1, &d2, eta, n);
                    // A fully closed gate (zero value, zero gradient) cannot
                    // contribute; skipping it also keeps nested windows from
                    // being evaluated past the end of the trajectory.
                    if gate.v <= 0.0 && gate.g.iter().all(|&d| d == 0.0) {
                        continue;
                    }
                    *at = child_at;
                    vals.push(child.eval_node(sig, i, beta, eta, at, n)?);
                    gs.push(gate);
                }
                *at = child_at + child.param_count();
                let ev = soft_max_avg(&vals, &gs, beta)?;
                let neg: Vec<Dual> = vals.iter().map(Dual::neg).collect();
                let al = soft_max_avg(&neg, &gs, beta)?.neg();
                Ok(blend(&sel, &al, &ev))
            }
        }
    }
}

fn seed(idx: usize, n: usize) -> Option<usize> {
    (n > 0).then_some(idx)
}

/// `(1 − s)·lo + s·hi`.
fn blend(s: &Dual, lo: &Dual, hi: &Dual) -> Dual {
    lo.add(&s.mul(&hi.sub(lo)))
}

/// Gated softmax average `Σ gᵢ e^{βxᵢ} xᵢ / Σ gᵢ e^{βxᵢ}`, stabilized by
/// shifting with the gated max.
fn soft_max_avg(vals: &[Dual], gates: &[Dual], beta: Real) -> Result<Dual> {
    let n = vals.first().map_or(0, |d| d.g.len());
    let shift = vals
        .iter()
        .zip(gates)
        .filter(|(_, g)| g.v > 0.0)
        .map(|(x, _)| x.v)
        .fold(Real::NEG_INFINITY, Real::max);
    if !shift.is_finite() {
        return Err(StlError::InvalidFormula(
            "all participation gates closed in a smooth aggregation".into(),
        ));
    }
    let mut num = Dual::constant(0.0, n);
    let mut den = Dual::constant(0.0, n);
    for (x, g) in vals.iter().zip(gates) {
        if g.v <= 0.0 && g.g.iter().all(|&d| d == 0.0) {
            continue;
        }
        let w = g.mul(&x.scale(beta).add(&Dual::constant(-beta * shift, n)).exp());
        num = num.add(&w.mul(x));
        den = den.add(&w);
    }
    Ok(num.div(&den))
}

/// Soft window gate at offset `x`: ramps from 0 to 1 over `[t1 − η, t1]`,
/// stays 1 on `[t1, t2]`, falls back to 0 over `[t2, t2 + η]`.
fn soft_indicator(x: Real, t1: &Dual, t2: &Dual, eta: Real, n: usize) -> Dual {
    let dim = n.max(t1.g.len());
    let xd = Dual::constant(x, dim);
    let cap = Dual::constant(eta, dim);
    let rise = xd.sub(t1).add(&cap).relu().min(&cap);
    let fall = t2.sub(&xd).add(&cap).relu().min(&cap);
    rise.min(&fall).scale(1.0 / eta)
}

/// The integer-sampled soft window of a temporal operator: entry `n` is the
/// gate at slot offset `n` for bounds `[t1, t2]` and slope `η`.
pub fn time_window_indicator(len: usize, t1: Real, t2: Real, eta: Real) -> Vec<Real> {
    let d1 = Dual::constant(t1, 0);
    let d2 = Dual::constant(t2, 0);
    (0..len).map(|i| soft_indicator(i as Real, &d1, &d2, eta, 0).v).collect()
}

/// Smooth robustness of an exact formula (selectors pinned, windows at their
/// integer bounds): softmax averages at temperature `beta`, window slope `eta`.
pub fn smooth_robustness(
    sig: &[Sample],
    phi: &StlFormula,
    k: usize,
    beta: Real,
    eta: Real,
) -> Result<Real> {
    SoftFormula::from_formula(phi).eval(sig, k, beta, eta)
}
