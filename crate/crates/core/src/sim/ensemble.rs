//! Many independent paths reduced onto a common time grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::derive_seed;
use super::engine::Engine;
use super::path::check_inputs;
use crate::error::{Error, Result};
use crate::exact::check_grid;
use crate::exact::NetworkConfiguration;
use crate::graph::Graph;
use crate::params::EpidemicParams;

/// Paths per work unit. Each block is summed sequentially and blocks are
/// combined in index order, so results do not depend on the thread count.
const BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct PrevalenceCurve {
    pub times: Vec<f64>,
    /// Mean fraction of infected nodes.
    pub mean: Vec<f64>,
    /// Sample standard deviation of the fraction over `sqrt(paths)`.
    pub stderr: Vec<f64>,
    pub paths: usize,
}

/// Prevalence curve plus per-path extinction times, in path-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub curve: PrevalenceCurve,
    pub base_seed: u64,
    pub t_max: f64,
    /// Hitting time of the final set, `None` when censored at `t_max`.
    pub hitting_times: Vec<Option<f64>>,
}

pub fn estimate_prevalence(
    g: &Graph,
    p: &EpidemicParams,
    x0: &NetworkConfiguration,
    paths: usize,
    t_grid: &[f64],
    base_seed: u64,
) -> Result<PrevalenceCurve> {
    Ok(run_ensemble(g, p, x0, paths, t_grid, base_seed)?.curve)
}

/// Runs `paths` paths up to the last grid time. Path `i` is seeded with
/// `derive_seed(base_seed, i)`.
pub fn run_ensemble(
    g: &Graph,
    p: &EpidemicParams,
    x0: &NetworkConfiguration,
    paths: usize,
    t_grid: &[f64],
    base_seed: u64,
) -> Result<Ensemble> {
    if paths == 0 {
        return Err(Error::InvalidParams("need at least one path".into()));
    }
    check_grid(t_grid)?;
    let t_max = *t_grid.last().unwrap();
    check_inputs(g, p, x0, t_max.max(f64::MIN_POSITIVE))?;

    let grid_len = t_grid.len();
    let blocks: Vec<Block> = (0..paths.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut block = Block::new(grid_len);
            for i in b * BLOCK..((b + 1) * BLOCK).min(paths) {
                block.run_path(g, p, x0, t_grid, derive_seed(base_seed, i as u64));
            }
            block
        })
        .collect();

    let mut sum = vec![0u64; grid_len];
    let mut sum_sq = vec![0u64; grid_len];
    let mut hitting_times = Vec::with_capacity(paths);
    for block in blocks {
        for k in 0..grid_len {
            sum[k] += block.sum[k];
            sum_sq[k] += block.sum_sq[k];
        }
        hitting_times.extend(block.hitting_times);
    }

    let n = g.node_count() as f64;
    let pf = paths as f64;
    let mut mean = Vec::with_capacity(grid_len);
    let mut stderr = Vec::with_capacity(grid_len);
    for k in 0..grid_len {
        let (s1, s2) = (sum[k] as f64, sum_sq[k] as f64);
        mean.push(s1 / (pf * n));
        let var = if paths > 1 {
            ((s2 - s1 * s1 / pf) / (pf - 1.0)).max(0.0) / (n * n)
        } else {
            0.0
        };
        stderr.push((var / pf).sqrt());
    }
    Ok(Ensemble {
        curve: PrevalenceCurve {
            times: t_grid.to_vec(),
            mean,
            stderr,
            paths,
        },
        base_seed,
        t_max,
        hitting_times,
    })
}

struct Block {
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
    hitting_times: Vec<Option<f64>>,
}

impl Block {
    fn new(grid_len: usize) -> Self {
        Self {
            sum: vec![0; grid_len],
            sum_sq: vec![0; grid_len],
            hitting_times: Vec::with_capacity(BLOCK),
        }
    }

    fn run_path(
        &mut self,
        g: &Graph,
        p: &EpidemicParams,
        x0: &NetworkConfiguration,
        t_grid: &[f64],
        seed: u64,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut engine = Engine::new(g, *p, x0.states());
        let t_max = *t_grid.last().unwrap();
        let mut hit = (engine.infected == 0).then_some(0.0);
        let mut k = 0;
        loop {
            let before = engine.infected as u64;
            let event = engine.step(&mut rng, t_max);
            let t_next = event.map_or(f64::INFINITY, |(t, _, _)| t);
            // grid points strictly before the next event see the old count
            while k < t_grid.len() && t_grid[k] < t_next {
                self.sum[k] += before;
                self.sum_sq[k] += before * before;
                k += 1;
            }
            if event.is_none() {
                break;
            }
            if hit.is_none() && engine.infected == 0 {
                hit = Some(t_next);
            }
        }
        self.hitting_times.push(hit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_susceptible_gives_zero_curve() {
        let g = Graph::complete(10).unwrap();
        let p = EpidemicParams::new(1.0, 0.4, 0.2, 0.0).unwrap();
        let grid = [0.0, 1.0, 5.0];
        let c = estimate_prevalence(
            &g,
            &p,
            &NetworkConfiguration::all_susceptible(10),
            50,
            &grid,
            3,
        )
        .unwrap();
        assert_eq!(c.mean, vec![0.0; 3]);
        assert_eq!(c.stderr, vec![0.0; 3]);
        assert_eq!(c.paths, 50);
    }

    #[test]
    fn grid_sampling_matches_path_replay() {
        let g = Graph::circulant_regular(10, 4).unwrap();
        let p = EpidemicParams::new(0.5, 0.4, 0.2, 0.1).unwrap();
        let x0 = NetworkConfiguration::one_infected(10, 0).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
        let e = run_ensemble(&g, &p, &x0, 1, &grid, 11).unwrap();
        let path = super::super::simulate_path(&g, &p, &x0, derive_seed(11, 0), 20.0).unwrap();
        for (t, m) in grid.iter().zip(&e.curve.mean) {
            assert_eq!(*m, path.infected_at(*t) as f64 / 10.0);
        }
        assert_eq!(e.hitting_times[0], path.hitting_time_final_set);
    }

    #[test]
    fn deterministic_across_thread_pools() {
        let g = Graph::complete(20).unwrap();
        let p = EpidemicParams::new(0.1, 0.4, 0.2, 0.3).unwrap();
        let x0 = NetworkConfiguration::one_infected(20, 0).unwrap();
        let grid = [0.0, 2.0, 10.0];
        let a = run_ensemble(&g, &p, &x0, 700, &grid, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_ensemble(&g, &p, &x0, 700, &grid, 5).unwrap());
        assert_eq!(a, b);
        let c = run_ensemble(&g, &p, &x0, 700, &grid, 6).unwrap();
        assert_ne!(a.curve.mean, c.curve.mean);
    }

    #[test]
    fn values_are_fractions() {
        let g = Graph::complete(8).unwrap();
        let p = EpidemicParams::new(0.8, 0.4, 0.2, 0.1).unwrap();
        let x0 = NetworkConfiguration::one_infected(8, 2).unwrap();
        let grid: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let c = estimate_prevalence(&g, &p, &x0, 300, &grid, 0).unwrap();
        assert_eq!(c.mean[0], 1.0 / 8.0);
        assert!(c.mean.iter().all(|&m| (0.0..=1.0).contains(&m)));
        assert!(c.stderr.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn zero_paths_rejected() {
        let g = Graph::complete(3).unwrap();
        let p = EpidemicParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(estimate_prevalence(
            &g,
            &p,
            &NetworkConfiguration::all_susceptible(3),
            0,
            &[1.0],
            0
        )
        .is_err());
    }
}
