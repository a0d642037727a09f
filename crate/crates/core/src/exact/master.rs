//! Master-equation solve by uniformization.
//!
//! With `Λ >= max_z |q_zz|` and `P = I + Q/Λ` (a stochastic matrix),
//! `v(t + h) = Σ_k Pois(k; Λh) v(t) P^k`. Each interval is cut into
//! sub-steps with `Λh <= MAX_POISSON_MEAN` so the Poisson weights never
//! underflow, and the series stops once the accumulated weight reaches
//! `1 - tail_tol`.

use super::generator::GeneratorMatrix;
use super::state::NodeState;
use crate::error::{Error, Result};

const MAX_POISSON_MEAN: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformizationOptions {
    /// Poisson tail mass dropped per sub-step.
    pub tail_tol: f64,
    /// Cap on series terms per sub-step.
    pub max_terms: usize,
}

impl Default for UniformizationOptions {
    fn default() -> Self {
        Self {
            tail_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

pub fn solve_master_equation(
    q: &GeneratorMatrix,
    v0: &[f64],
    t_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    solve_master_equation_with(q, v0, t_grid, UniformizationOptions::default())
}

pub fn solve_master_equation_with(
    q: &GeneratorMatrix,
    v0: &[f64],
    t_grid: &[f64],
    opts: UniformizationOptions,
) -> Result<Vec<Vec<f64>>> {
    if v0.len() != q.dim() {
        return Err(Error::SizeMismatch {
            expected: q.dim(),
            found: v0.len(),
        });
    }
    check_probability_vector(v0)?;
    check_grid(t_grid)?;

    let lambda = q.max_exit_rate();
    let mut v = v0.to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut term = vec![0.0; v.len()];
    let mut next = vec![0.0; v.len()];
    let mut acc = vec![0.0; v.len()];
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 && lambda > 0.0 {
            let steps = (lambda * span / MAX_POISSON_MEAN).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let mean = lambda * h;
                let mut weight = (-mean).exp();
                let mut cumulative = weight;
                term.copy_from_slice(&v);
                for (a, x) in acc.iter_mut().zip(&term) {
                    *a = weight * x;
                }
                let mut k = 0;
                while cumulative < 1.0 - opts.tail_tol {
                    k += 1;
                    if k > opts.max_terms {
                        return Err(Error::NotConverged {
                            what: "uniformization series",
                            iterations: k,
                            residual: 1.0 - cumulative,
                        });
                    }
                    q.uniformized_step(&term, lambda, &mut next);
                    std::mem::swap(&mut term, &mut next);
                    weight *= mean / k as f64;
                    cumulative += weight;
                    for (a, x) in acc.iter_mut().zip(&term) {
                        *a += weight * x;
                    }
                }
                // renormalize to remove the dropped tail mass
                for (vi, a) in v.iter_mut().zip(&acc) {
                    *vi = (a / cumulative).max(0.0);
                }
            }
        }
        t = target;
        out.push(v.clone());
    }
    Ok(out)
}

fn check_probability_vector(v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| !(x >= -1e-12) || !x.is_finite()) {
        return Err(Error::InvalidConfiguration(
            "probability vector has negative or non-finite entries".into(),
        ));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfiguration(format!(
            "probability vector sums to {total}"
        )));
    }
    Ok(())
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if !(t_grid[0] >= 0.0) {
        return Err(Error::InvalidGrid(format!("grid starts at {}", t_grid[0])));
    }
    if t_grid
        .windows(2)
        .any(|w| !(w[1] >= w[0]) || !w[1].is_finite())
    {
        return Err(Error::InvalidGrid(
            "grid must be non-decreasing and finite".into(),
        ));
    }
    Ok(())
}

/// Point mass on configuration `index`.
pub fn point_mass(dim: usize, index: u64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[index as usize] = 1.0;
    v
}

/// `P(X_i = I)` for every node.
pub fn marginal_infection_probabilities(v: &[f64], n: usize) -> Vec<f64> {
    marginals(v, n, NodeState::I)
}

/// `P(X_i = s)` for every node.
pub fn marginals(v: &[f64], n: usize, s: NodeState) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let digit = s.digit();
    for (k, &p) in v.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut rest = k as u64;
        for o in out.iter_mut() {
            if rest % 3 == digit {
                *o += p;
            }
            rest /= 3;
        }
    }
    out.iter_mut().for_each(|x| *x = x.clamp(0.0, 1.0));
    out
}

/// Probability of at least one infected node.
pub fn prob_not_in_final_set(v: &[f64], n: usize) -> f64 {
    v.iter()
        .enumerate()
        .filter(|&(k, _)| has_infected(k as u64, n))
        .map(|(_, p)| p)
        .sum()
}

/// Probability of not being in the all-susceptible state.
pub fn prob_not_absorbed(v: &[f64]) -> f64 {
    v[1..].iter().sum()
}

pub(crate) fn has_infected(mut k: u64, n: usize) -> bool {
    for _ in 0..n {
        if k % 3 == 1 {
            return true;
        }
        k /= 3;
    }
    false
}
