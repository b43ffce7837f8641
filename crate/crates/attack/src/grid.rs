//! Discretized spoofing-frequency action space over one wrap period.

use mirage_core::Real;

use crate::{AttackError, Result};

/// `l` actions at multiples of `step = 1/(ΔT·l)`, spanning `(0, 1/ΔT]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    pub step: Real,
    pub freqs: Vec<Real>,
}

impl ActionGrid {
    pub fn new(l: usize, phase_interval_s: Real) -> Result<Self> {
        if l == 0 {
            return Err(AttackError::InvalidInput("empty action grid".into()));
        }
        if !(phase_interval_s > 0.0) {
            return Err(AttackError::InvalidInput("phase interval must be positive".into()));
        }
        let step = 1.0 / (phase_interval_s * l as Real);
        let freqs = (1..=l).map(|i| i as Real * step).collect();
        Ok(ActionGrid { step, freqs })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Index of a frequency that lies on the grid, within a small tolerance.
    pub fn index_of(&self, freq: Real) -> Option<usize> {
        let ratio = freq / self.step;
        let idx = ratio.round();
        if idx < 1.0 || idx > self.freqs.len() as Real || (ratio - idx).abs() > 1e-6 {
            None
        } else {
            Some(idx as usize - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_the_wrap_period() {
        let g = ActionGrid::new(1000, 1e-3).unwrap();
        assert_eq!(g.len(), 1000);
        assert_eq!(g.step, 1.0);
        assert_eq!(g.freqs[0], 1.0);
        assert_eq!(*g.freqs.last().unwrap(), 1000.0);
        assert_eq!(g.index_of(600.0), Some(599));
        assert_eq!(g.index_of(600.4), None);
        assert_eq!(g.index_of(0.0), None);
        assert_eq!(g.index_of(1000.5), None);
    }
}
