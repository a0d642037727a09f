use rayon::prelude::*;

use super::state::state_count;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::params::EpidemicParams;

/// Default largest N for which the full chain is built (3^12 = 531441 states).
pub const DEFAULT_STATE_CAP: usize = 12;

/// Infinitesimal generator of the network chain.
///
/// Row `z` holds the rates out of configuration `z` (row-to-column
/// orientation). Probability vectors therefore evolve by the transposed
/// action `dv/dt = v Q`, computed from the incoming lists.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    n_nodes: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    rates: Vec<f64>,
    diag: Vec<f64>,
    in_ptr: Vec<usize>,
    in_rows: Vec<u32>,
    in_rates: Vec<f64>,
}

/// Rough bytes needed by [`build_generator`] for `n` nodes.
pub fn memory_estimate(n: usize) -> Option<u64> {
    let states = state_count(n)?;
    // each row: up to 2N off-diagonal entries stored twice (out + in) as
    // (u32, f64), plus diagonal and two row pointers
    let per_row = 2 * (2 * n as u64) * 12 + 8 + 16;
    states.checked_mul(per_row)
}

pub fn build_generator(g: &Graph, p: &EpidemicParams) -> Result<GeneratorMatrix> {
    build_generator_with_cap(g, p, DEFAULT_STATE_CAP)
}

pub fn build_generator_with_cap(
    g: &Graph,
    p: &EpidemicParams,
    cap: usize,
) -> Result<GeneratorMatrix> {
    p.validate()?;
    let n = g.node_count();
    if n > cap {
        return Err(Error::StateSpaceTooLarge { n, cap });
    }
    let dim = state_count(n).ok_or(Error::StateSpaceTooLarge { n, cap })? as usize;
    let pow3: Vec<u64> = (0..n).map(|m| 3u64.pow(m as u32)).collect();

    let rows: Vec<Vec<(u32, f64)>> = (0..dim)
        .into_par_iter()
        .map(|z| {
            let mut digits = vec![0u8; n];
            let mut k = z;
            for d in digits.iter_mut() {
                *d = (k % 3) as u8;
                k /= 3;
            }
            let z = z as u64;
            let mut out = Vec::with_capacity(2 * n);
            for m in 0..n {
                match digits[m] {
                    0 => {
                        let infected = g.neighbors(m).iter().filter(|&&i| digits[i] == 1).count();
                        if infected > 0 {
                            out.push(((z + pow3[m]) as u32, p.beta * infected as f64));
                        }
                        if p.sigma > 0.0 {
                            out.push(((z + 2 * pow3[m]) as u32, p.sigma));
                        }
                    }
                    1 => out.push(((z + pow3[m]) as u32, p.delta)),
                    _ => out.push(((z - 2 * pow3[m]) as u32, p.gamma)),
                }
            }
            out
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(Vec::len).sum();
    let mut cols = Vec::with_capacity(nnz);
    let mut rates = Vec::with_capacity(nnz);
    let mut diag = Vec::with_capacity(dim);
    for row in &rows {
        let mut total = 0.0;
        for &(c, r) in row {
            cols.push(c);
            rates.push(r);
            total += r;
        }
        diag.push(-total);
        row_ptr.push(cols.len());
    }
    drop(rows);

    // incoming lists by counting sort on the column index
    let mut in_ptr = vec![0usize; dim + 1];
    for &c in &cols {
        in_ptr[c as usize + 1] += 1;
    }
    for j in 0..dim {
        in_ptr[j + 1] += in_ptr[j];
    }
    let mut fill = in_ptr.clone();
    let mut in_rows = vec![0u32; nnz];
    let mut in_rates = vec![0.0; nnz];
    for z in 0..dim {
        for e in row_ptr[z]..row_ptr[z + 1] {
            let j = cols[e] as usize;
            in_rows[fill[j]] = z as u32;
            in_rates[fill[j]] = rates[e];
            fill[j] += 1;
        }
    }

    Ok(GeneratorMatrix {
        n_nodes: n,
        row_ptr,
        cols,
        rates,
        diag,
        in_ptr,
        in_rows,
        in_rates,
    })
}

impl GeneratorMatrix {
    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Off-diagonal `(target, rate)` pairs of row `z`.
    pub fn row(&self, z: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[z]..self.row_ptr[z + 1];
        self.cols[r.clone()]
            .iter()
            .map(|&c| c as usize)
            .zip(self.rates[r].iter().copied())
    }

    pub fn diagonal(&self, z: usize) -> f64 {
        self.diag[z]
    }

    /// Rate from state `z` to state `j` (diagonal included).
    pub fn rate(&self, z: usize, j: usize) -> f64 {
        if z == j {
            return self.diag[z];
        }
        self.row(z).find(|&(c, _)| c == j).map_or(0.0, |(_, r)| r)
    }

    /// Largest total exit rate.
    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, &d| m.max(-d))
    }

    /// `out = v (I + Q / lambda)`, the uniformized one-step transition.
    pub(crate) fn uniformized_step(&self, v: &[f64], lambda: f64, out: &mut [f64]) {
        out.par_iter_mut()
            .enumerate()
            .with_min_len(4096)
            .for_each(|(j, o)| {
                let mut acc = v[j] * (1.0 + self.diag[j] / lambda);
                for e in self.in_ptr[j]..self.in_ptr[j + 1] {
                    acc += v[self.in_rows[e] as usize] * (self.in_rates[e] / lambda);
                }
                *o = acc;
            });
    }
}
