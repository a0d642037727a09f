//! Expected hitting time of the final set (no infected node).
//!
//! On the transient states `T` (those with an infected node) the mean
//! hitting times solve `-Q_TT h = 1`. Small systems use a dense LU
//! factorization; larger ones Gauss-Seidel sweeps, which converge because
//! `-Q_TT` is a non-singular M-matrix whenever `delta > 0`.

use nalgebra::{DMatrix, DVector};

use super::generator::GeneratorMatrix;
use super::master::has_infected;
use super::state::{NetworkConfiguration, NodeState};
use crate::error::{Error, Result};

const DENSE_LIMIT: usize = 2500;
const GS_TOL: f64 = 1e-13;
const GS_MAX_SWEEPS: usize = 1_000_000;

/// Mean hitting time of the final set from every configuration; zero on
/// the final set itself.
pub fn hitting_times_final_set(q: &GeneratorMatrix) -> Result<Vec<f64>> {
    let n = q.node_count();
    let dim = q.dim();
    let transient: Vec<usize> = (0..dim).filter(|&k| has_infected(k as u64, n)).collect();
    let mut local = vec![usize::MAX; dim];
    for (i, &k) in transient.iter().enumerate() {
        local[k] = i;
    }
    let h = if transient.len() <= DENSE_LIMIT {
        solve_dense(q, &transient, &local)?
    } else {
        solve_gauss_seidel(q, &transient, &local)?
    };
    let mut full = vec![0.0; dim];
    for (i, &k) in transient.iter().enumerate() {
        full[k] = h[i];
    }
    Ok(full)
}

pub fn expected_hitting_time_final_set(
    q: &GeneratorMatrix,
    start: &NetworkConfiguration,
) -> Result<f64> {
    if start.node_count() != q.node_count() {
        return Err(Error::SizeMismatch {
            expected: q.node_count(),
            found: start.node_count(),
        });
    }
    if start.count(NodeState::I) == 0 {
        return Err(Error::InvalidConfiguration(
            "start configuration has no infected node; hitting time is 0".into(),
        ));
    }
    let k = start
        .index()
        .expect("node count checked against the generator");
    Ok(hitting_times_final_set(q)?[k as usize])
}

fn solve_dense(q: &GeneratorMatrix, transient: &[usize], local: &[usize]) -> Result<Vec<f64>> {
    let m = transient.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (i, &z) in transient.iter().enumerate() {
        a[(i, i)] = -q.diagonal(z);
        for (j, r) in q.row(z) {
            if local[j] != usize::MAX {
                a[(i, local[j])] -= r;
            }
        }
    }
    let b = DVector::from_element(m, 1.0);
    let h = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("restricted generator on transient states".into()))?;
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular(
            "restricted generator on transient states".into(),
        ));
    }
    Ok(h.iter().copied().collect())
}

fn solve_gauss_seidel(
    q: &GeneratorMatrix,
    transient: &[usize],
    local: &[usize],
) -> Result<Vec<f64>> {
    let mut h = vec![0.0; transient.len()];
    for sweep in 1..=GS_MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        for (i, &z) in transient.iter().enumerate() {
            let exit = -q.diagonal(z);
            if exit <= 0.0 {
                return Err(Error::Singular(format!(
                    "transient state {z} has no exit rate"
                )));
            }
            let mut acc = 1.0;
            for (j, r) in q.row(z) {
                let l = local[j];
                if l != usize::MAX {
                    acc += r * h[l];
                }
            }
            let new = acc / exit;
            worst = worst.max((new - h[i]).abs() / new.abs().max(1.0));
            h[i] = new;
        }
        if worst < GS_TOL {
            return Ok(h);
        }
        if sweep == GS_MAX_SWEEPS {
            return Err(Error::NotConverged {
                what: "Gauss-Seidel hitting-time solve",
                iterations: sweep,
                residual: worst,
            });
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::generator::build_generator;
    use crate::exact::state::NodeState::*;
    use crate::graph::Graph;
    use crate::params::EpidemicParams;

    #[test]
    fn single_node_is_one_over_delta() {
        let g = Graph::from_edges_allow_disconnected(1, &[]).unwrap();
        let q = build_generator(&g, &EpidemicParams::new(1.0, 0.4, 0.2, 0.0).unwrap()).unwrap();
        let start = NetworkConfiguration::from_states(vec![I]);
        assert!((expected_hitting_time_final_set(&q, &start).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn two_isolated_nodes_order_statistic() {
        // E[max of two Exp(delta)] = 3 / (2 delta), independent of sigma
        for sigma in [0.0, 0.7] {
            let g = Graph::from_edges_allow_disconnected(2, &[]).unwrap();
            let delta = 0.8;
            let q =
                build_generator(&g, &EpidemicParams::new(1.0, delta, 0.2, sigma).unwrap()).unwrap();
            let start = NetworkConfiguration::from_states(vec![I, I]);
            let h = expected_hitting_time_final_set(&q, &start).unwrap();
            assert!((h - 1.5 / delta).abs() < 1e-12);
        }
    }

    #[test]
    fn start_without_infection_is_rejected() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let q = build_generator(&g, &EpidemicParams::new(1.0, 0.4, 0.2, 0.0).unwrap()).unwrap();
        let start = NetworkConfiguration::from_states(vec![S, R]);
        assert!(expected_hitting_time_final_set(&q, &start).is_err());
    }

    #[test]
    fn dense_and_iterative_agree() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let q = build_generator(&g, &EpidemicParams::new(0.3, 0.4, 0.2, 0.1).unwrap()).unwrap();
        let n = q.node_count();
        let transient: Vec<usize> = (0..q.dim())
            .filter(|&k| has_infected(k as u64, n))
            .collect();
        let mut local = vec![usize::MAX; q.dim()];
        for (i, &k) in transient.iter().enumerate() {
            local[k] = i;
        }
        let a = solve_dense(&q, &transient, &local).unwrap();
        let b = solve_gauss_seidel(&q, &transient, &local).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn non_increasing_in_delta() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let start = NetworkConfiguration::one_infected(4, 0).unwrap();
        let mut last = f64::INFINITY;
        for delta in [0.2, 0.3, 0.5, 0.8, 1.3] {
            let q =
                build_generator(&g, &EpidemicParams::new(0.4, delta, 0.2, 0.0).unwrap()).unwrap();
            let h = expected_hitting_time_final_set(&q, &start).unwrap();
            assert!(h <= last);
            last = h;
        }
    }
}
