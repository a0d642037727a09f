//! Spectral upper bounds on persistence and extinction time.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::params::EpidemicParams;

/// Upper bound on `P(some node infected at t)`:
/// `sqrt(N * I0) * exp((beta * lambda1 - delta) * t)`.
pub fn bound_not_in_final_set(
    t: f64,
    n: usize,
    infected_at_0: usize,
    beta: f64,
    delta: f64,
    lambda1: f64,
) -> f64 {
    ((n * infected_at_0) as f64).sqrt() * ((beta * lambda1 - delta) * t).exp()
}

/// Upper bound `(ln N + 1) / (delta - beta * lambda1)` on the mean hitting
/// time of the final set. Requires `beta / delta < 1 / lambda1`.
pub fn bound_mean_extinction_time(n: usize, beta: f64, delta: f64, lambda1: f64) -> Result<f64> {
    if beta * lambda1 >= delta {
        return Err(Error::AboveFastExtinctionThreshold {
            tau: beta / delta,
            limit: 1.0 / lambda1,
        });
    }
    Ok(((n as f64).ln() + 1.0) / (delta - beta * lambda1))
}

/// Margin within which `-gamma` counts as an eigenvalue of `beta A - delta I`.
pub const SPECTRUM_COLLISION_MARGIN: f64 = 1e-8;

/// The 2N x 2N matrix `[[beta A - delta I, 0], [delta I, -gamma I]]` that
/// bounds the joint (I, R) marginals, with an eigendecomposition
/// `M D M^-1` and condition constant `C = ||M||_2 ||M^-1||_2`.
#[derive(Debug, Clone)]
pub struct BlockMatrixAbar {
    n: usize,
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    condition: f64,
}

impl BlockMatrixAbar {
    pub fn new(g: &Graph, p: &EpidemicParams) -> Result<Self> {
        let n = g.node_count();
        let rows = g.adjacency_rows();
        let b = DMatrix::from_fn(n, n, |i, j| {
            p.beta * rows[i][j] - if i == j { p.delta } else { 0.0 }
        });
        let eig = b.clone().symmetric_eigen();
        for &mu in eig.eigenvalues.iter() {
            if (mu + p.gamma).abs() < SPECTRUM_COLLISION_MARGIN {
                return Err(Error::SpectrumCollision {
                    gamma_neg: -p.gamma,
                    eigenvalue: mu,
                    margin: SPECTRUM_COLLISION_MARGIN,
                });
            }
        }

        let mut matrix = DMatrix::zeros(2 * n, 2 * n);
        matrix.view_mut((0, 0), (n, n)).copy_from(&b);
        for i in 0..n {
            matrix[(n + i, i)] = p.delta;
            matrix[(n + i, n + i)] = -p.gamma;
        }

        // eigenvector for (mu, u): [u; delta u / (mu + gamma)]; for -gamma: [0; e_i]
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        let mut eigenvalues = Vec::with_capacity(2 * n);
        for (k, &mu) in eig.eigenvalues.iter().enumerate() {
            let u = eig.eigenvectors.column(k);
            let scale = p.delta / (mu + p.gamma);
            let norm = (1.0 + scale * scale).sqrt();
            for i in 0..n {
                m[(i, k)] = u[i] / norm;
                m[(n + i, k)] = scale * u[i] / norm;
            }
            eigenvalues.push(mu);
        }
        for i in 0..n {
            m[(n + i, n + i)] = 1.0;
            eigenvalues.push(-p.gamma);
        }

        let sv = m.clone().singular_values();
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if !(smin > 0.0) {
            return Err(Error::Singular("eigenvector matrix of Ā".into()));
        }
        Ok(Self {
            n,
            matrix,
            eigenvalues,
            eigenvectors: m,
            condition: smax / smin,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `C = ||M||_2 ||M^-1||_2`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Largest eigenvalue, `max(beta lambda1 - delta, -gamma)`.
    pub fn top_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `C sqrt(N * initial_ir) exp(top_eigenvalue * t)`.
    pub fn bound(&self, t: f64, initial_ir_count: usize) -> f64 {
        self.condition
            * ((self.n * initial_ir_count) as f64).sqrt()
            * (self.top_eigenvalue() * t).exp()
    }
}

/// Upper bound on `P(not all susceptible at t)` for the model without
/// vaccination.
pub fn bound_no_absorption(
    t: f64,
    g: &Graph,
    p: &EpidemicParams,
    initial_ir_count: usize,
) -> Result<f64> {
    if p.sigma != 0.0 {
        return Err(Error::InvalidParams(format!(
            "the no-absorption bound needs sigma = 0, got {}",
            p.sigma
        )));
    }
    Ok(BlockMatrixAbar::new(g, p)?.bound(t, initial_ir_count))
}
