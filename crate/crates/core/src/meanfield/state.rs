use crate::error::{Error, Result};
use crate::params::EpidemicParams;

/// Per-node (or per-cell) compartment probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldState {
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
}

impl MeanFieldState {
    pub fn new(s: Vec<f64>, i: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if i.len() != s.len() || r.len() != s.len() {
            return Err(Error::SizeMismatch {
                expected: s.len(),
                found: if i.len() != s.len() { i.len() } else { r.len() },
            });
        }
        Ok(Self { s, i, r })
    }

    /// `S = 1 - I - R` on every node.
    pub fn from_ir(i: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        let s = i.iter().zip(&r).map(|(a, b)| 1.0 - a - b).collect();
        Self::new(s, i, r)
    }

    /// Same triple on every node.
    pub fn uniform(n: usize, s: f64, i: f64, r: f64) -> Self {
        Self {
            s: vec![s; n],
            i: vec![i; n],
            r: vec![r; n],
        }
    }

    /// Disease-free equilibrium: `I = 0`, `R = σ/(γ+σ)`.
    pub fn disease_free(n: usize, p: &EpidemicParams) -> Self {
        let r = p.dfe_recovered();
        Self::uniform(n, 1.0 - r, 0.0, r)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Layout `[S.., I.., R..]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(3 * self.len());
        y.extend_from_slice(&self.s);
        y.extend_from_slice(&self.i);
        y.extend_from_slice(&self.r);
        y
    }

    pub fn from_flat(y: &[f64]) -> Result<Self> {
        if !y.len().is_multiple_of(3) {
            return Err(Error::SizeMismatch {
                expected: 3 * (y.len() / 3),
                found: y.len(),
            });
        }
        let n = y.len() / 3;
        Ok(Self {
            s: y[..n].to_vec(),
            i: y[n..2 * n].to_vec(),
            r: y[2 * n..].to_vec(),
        })
    }

    /// Largest violation of `S, I, R >= 0` and `S + I + R = 1`.
    pub fn simplex_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let (s, i, r) = (self.s[k], self.i[k], self.r[k]);
            worst = worst.max(-s).max(-i).max(-r).max((s + i + r - 1.0).abs());
        }
        worst
    }

    pub fn check_simplex(&self, tol: f64) -> Result<()> {
        let v = self.simplex_violation();
        if v > tol {
            return Err(Error::InvalidConfiguration(format!(
                "state leaves the probability simplex by {v:e}"
            )));
        }
        Ok(())
    }

    pub fn mean_infected(&self) -> f64 {
        self.i.iter().sum::<f64>() / self.len() as f64
    }
}
