//! Dense real signals.

use crate::error::{Error, Result};

/// A dense real vector of length `p >= 1` with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    entries: Vec<f64>,
}

impl Signal {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::param("entries", "signal must have length >= 1"));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("entries", format!("non-finite entry {bad}")));
        }
        Ok(Signal { entries })
    }

    /// Standard basis vector `e_(index)` in dimension `p`.
    pub fn basis(p: usize, index: usize) -> Result<Self> {
        if index >= p {
            return Err(Error::param("index", format!("{index} out of range for p = {p}")));
        }
        let mut entries = vec![0.0; p];
        entries[index] = 1.0;
        Signal::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of exactly non-zero coordinates.
    pub fn l0(&self) -> usize {
        self.entries.iter().filter(|v| **v != 0.0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Signal {
        Signal {
            entries: self.entries.iter().map(|v| c * v).collect(),
        }
    }
}

impl std::ops::Index<usize> for Signal {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}
