//! Perron root of non-negative irreducible matrices by shifted power iteration.

use super::{Graph, WeightedAdjacency};
use crate::error::{Error, Result};

/// A square non-negative matrix that can act on a vector.
pub trait NonNegativeOperator {
    fn dim(&self) -> usize;
    /// `y = M x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn max_row_sum(&self) -> f64;
}

impl NonNegativeOperator for Graph {
    fn dim(&self) -> usize {
        self.node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.neighbors(i).iter().map(|&j| x[j]).sum();
        }
    }

    fn max_row_sum(&self) -> f64 {
        self.max_degree() as f64
    }
}

impl NonNegativeOperator for WeightedAdjacency {
    fn dim(&self) -> usize {
        self.node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y);
    }

    fn max_row_sum(&self) -> f64 {
        (0..self.node_count())
            .map(|i| self.row(i).map(|(_, w)| w).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Spectral radius.
    pub lambda1: f64,
    /// Perron vector, unit 2-norm, strictly positive.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    /// `max_i |(M v)_i - lambda1 v_i|` at termination.
    pub residual: f64,
}

pub fn spectral_radius<M: NonNegativeOperator + ?Sized>(m: &M, tol: f64) -> Result<SpectralResult> {
    spectral_radius_with(
        m,
        SpectralOptions {
            tol,
            ..SpectralOptions::default()
        },
    )
}

/// Power iteration on `M + s I` with `s` half the largest row sum.
///
/// The shift makes the Perron root strictly dominant even for bipartite
/// graphs, whose spectrum is symmetric about zero. Stops when the residual
/// of the Rayleigh estimate against the unshifted matrix is `<= tol`.
pub fn spectral_radius_with<M: NonNegativeOperator + ?Sized>(
    m: &M,
    opts: SpectralOptions,
) -> Result<SpectralResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be > 0, got {}",
            opts.tol
        )));
    }
    let n = m.dim();
    if n == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    let shift = 0.5 * m.max_row_sum();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut mv = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        m.apply(&v, &mut mv);
        let lambda = dot(&v, &mv);
        residual = v
            .iter()
            .zip(&mv)
            .map(|(vi, mvi)| (mvi - lambda * vi).abs())
            .fold(0.0, f64::max);
        if residual <= opts.tol {
            return Ok(SpectralResult {
                lambda1: lambda,
                eigenvector: v,
                iterations: it,
                residual,
            });
        }
        for (vi, mvi) in v.iter_mut().zip(&mv) {
            *vi = mvi + shift * *vi;
        }
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            // zero matrix
            return Ok(SpectralResult {
                lambda1: 0.0,
                eigenvector: vec![1.0 / (n as f64).sqrt(); n],
                iterations: it,
                residual: 0.0,
            });
        }
        v.iter_mut().for_each(|vi| *vi /= norm);
    }
    Err(Error::NotConverged {
        what: "power iteration",
        iterations: opts.max_iterations,
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
