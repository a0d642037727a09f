//! Canned figure experiments.
//!
//! Each recipe fixes the graph and parameter set and writes plot-ready CSVs
//! plus a manifest into `<out>/<figure>/`. The data functions are public so
//! tests can check figure shapes without going through files.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use netsirs_core::exact::NetworkConfiguration;
use netsirs_core::graph::spectral_radius;
use netsirs_core::meanfield::{
    endemic_equilibrium, integrate, lyapunov_v, regular_equilibrium, threshold_report,
    IntegrationOptions, MeanFieldState, MeanFieldSystem, Regime, ThresholdReport,
};
use netsirs_core::partitions::{coarsest_equitable_partition, quotient_matrix};
use netsirs_core::sim::{run_ensemble, Ensemble};
use netsirs_core::{EpidemicParams, Graph, WeightedAdjacency};

use crate::error::{CliError, CliResult};
use crate::output::{csv_table, key_values, sha256_hex, write_outputs, OutputFile, RunManifest};
use crate::run::prevalence_csv;

/// Default observation window of the time-course figures.
pub const WINDOW: f64 = 100.0;
/// Output spacing of the time-course figures.
pub const DT: f64 = 0.5;
pub const FIG1_PATHS: usize = 1_000;
pub const FIG2_PATHS: usize = 1_000;
pub const COMPARISON_PATHS: usize = 20_000;
pub const FIG2_SIGMAS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const FIG3_SIGMAS: [f64; 4] = [0.0, 0.1, 0.2, 0.3];
/// Points of every log-spaced gamma axis.
pub const GAMMA_POINTS: usize = 20;
/// The steady-state axis starts at 0.05 so every cell is above threshold.
pub const FIG3_GAMMA_RANGE: (f64, f64) = (0.05, 1.0);
pub const FIG1_GAMMA_RANGE: (f64, f64) = (0.01, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig5a,
    Fig5b,
    Fig5c,
    FigEqPart,
}

impl Figure {
    pub const ALL: [Figure; 11] = [
        Self::Fig1a,
        Self::Fig1b,
        Self::Fig2,
        Self::Fig3,
        Self::Fig4a,
        Self::Fig4b,
        Self::Fig4c,
        Self::Fig5a,
        Self::Fig5b,
        Self::Fig5c,
        Self::FigEqPart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig1a => "fig1a",
            Self::Fig1b => "fig1b",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4a => "fig4a",
            Self::Fig4b => "fig4b",
            Self::Fig4c => "fig4c",
            Self::Fig5a => "fig5a",
            Self::Fig5b => "fig5b",
            Self::Fig5c => "fig5c",
            Self::FigEqPart => "figEqPart",
        }
    }

    /// Graph and parameters of the mean-field vs Monte Carlo panels.
    pub fn comparison_setup(self) -> Option<(Graph, EpidemicParams)> {
        let (complete, beta, delta, gamma, sigma) = match self {
            Self::Fig4a => (true, 0.1, 0.9, 0.1, 0.4),
            Self::Fig4b => (true, 1.0, 0.45, 0.2, 0.4),
            Self::Fig4c => (true, 1.0, 0.45, 0.06, 0.4),
            Self::Fig5a => (false, 0.1, 0.4, 0.2, 0.45),
            Self::Fig5b => (false, 1.0, 0.4, 0.2, 0.45),
            Self::Fig5c => (false, 1.0, 0.4, 0.06, 0.45),
            _ => return None,
        };
        let g = if complete {
            Graph::complete(50)
        } else {
            Graph::circulant_regular(50, 10)
        }
        .expect("fixed graphs are valid");
        Some((
            g,
            EpidemicParams::new(beta, delta, gamma, sigma).expect("fixed parameters are valid"),
        ))
    }
}

impl FromStr for Figure {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|f| f.name()).collect();
                CliError::Config(format!(
                    "unknown figure {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

impl std::fmt::Display for Figure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub out_dir: PathBuf,
    /// Overrides the recipe's path count.
    pub paths: Option<usize>,
    pub seed: u64,
    pub t_max: Option<f64>,
    /// 1-based node infected at time 0.
    pub initial_node: usize,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            paths: None,
            seed: 0,
            t_max: None,
            initial_node: 1,
        }
    }
}

/// `k` log-spaced points from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    assert!(k >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..k)
        .map(|j| {
            if j + 1 == k {
                hi
            } else {
                (a + (b - a) * j as f64 / (k - 1) as f64).exp()
            }
        })
        .collect()
}

/// Uniform grid on `[0, t_max]` with spacing close to `dt`, ending at `t_max`.
pub fn uniform_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round().max(1.0) as usize;
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

fn one_infected(n: usize, node: usize) -> CliResult<NetworkConfiguration> {
    if node == 0 || node > n {
        return Err(CliError::Config(format!(
            "initial node {node} is outside 1..={n}"
        )));
    }
    Ok(NetworkConfiguration::one_infected(n, node - 1)?)
}

/// Time average of the mean curve over the second half of the window,
/// with the averaged standard error as a conservative error bar.
pub fn steady_prevalence(e: &Ensemble) -> (f64, f64) {
    let half = e.t_max / 2.0;
    let idx: Vec<usize> = (0..e.curve.times.len())
        .filter(|&k| e.curve.times[k] >= half)
        .collect();
    let m = idx.len() as f64;
    (
        idx.iter().map(|&k| e.curve.mean[k]).sum::<f64>() / m,
        idx.iter().map(|&k| e.curve.stderr[k]).sum::<f64>() / m,
    )
}

/// Monte Carlo curves over a gamma axis on K_50 (β = 0.25, δ = 0.4).
pub fn fig1_curves(
    sigma: f64,
    paths: usize,
    seed: u64,
    grid: &[f64],
    node: usize,
) -> CliResult<Vec<(f64, Ensemble)>> {
    let g = Graph::complete(50)?;
    let x0 = one_infected(50, node)?;
    let (lo, hi) = FIG1_GAMMA_RANGE;
    log_grid(lo, hi, GAMMA_POINTS)
        .into_iter()
        .map(|gamma| {
            let p = EpidemicParams::new(0.25, 0.4, gamma, sigma)?;
            Ok((gamma, run_ensemble(&g, &p, &x0, paths, grid, seed)?))
        })
        .collect()
}

/// Monte Carlo curves over the sigma axis on K_50 (β = 0.25, δ = 0.4, γ = 0.2).
/// Every cell uses the same base seed (common random numbers).
pub fn fig2_curves(
    paths: usize,
    seed: u64,
    grid: &[f64],
    node: usize,
) -> CliResult<Vec<(f64, Ensemble)>> {
    let g = Graph::complete(50)?;
    let x0 = one_infected(50, node)?;
    FIG2_SIGMAS
        .iter()
        .map(|&sigma| {
            let p = EpidemicParams::new(0.25, 0.4, 0.2, sigma)?;
            Ok((sigma, run_ensemble(&g, &p, &x0, paths, grid, seed)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Row {
    pub gamma: f64,
    pub sigma: f64,
    /// Mean infected fraction at the mean-field equilibrium (0 below threshold).
    pub mean_i_star: f64,
    pub regime: Regime,
}

/// Steady-state prevalence on K_50 (β = 0.25, δ = 0.9) over gamma and sigma.
pub fn fig3_rows() -> CliResult<Vec<Fig3Row>> {
    let g = Graph::complete(50)?;
    let w = WeightedAdjacency::unweighted(&g);
    let lambda1 = spectral_radius(&g, 1e-12)?.lambda1;
    let (lo, hi) = FIG3_GAMMA_RANGE;
    let mut rows = Vec::new();
    for &sigma in &FIG3_SIGMAS {
        for gamma in log_grid(lo, hi, GAMMA_POINTS) {
            let p = EpidemicParams::new(0.25, 0.9, gamma, sigma)?;
            let regime = threshold_report(&p, lambda1)?.regime;
            let mean_i_star = match regime {
                Regime::Endemic => endemic_equilibrium(&w, &p, 1e-13)?.mean_infected(),
                Regime::Extinction => 0.0,
            };
            rows.push(Fig3Row {
                gamma,
                sigma,
                mean_i_star,
                regime,
            });
        }
    }
    Ok(rows)
}

/// Mean-field and Monte Carlo prevalence of one comparison panel.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub params: EpidemicParams,
    pub threshold: ThresholdReport,
    pub times: Vec<f64>,
    /// Mean over nodes of I_i(t) from the reduced mean-field system.
    pub meanfield: Vec<f64>,
    pub montecarlo: Ensemble,
}

pub fn comparison(
    fig: Figure,
    paths: usize,
    seed: u64,
    grid: &[f64],
    node: usize,
) -> CliResult<Comparison> {
    let (g, p) = fig
        .comparison_setup()
        .ok_or_else(|| CliError::Config(format!("{fig} is not a comparison figure")))?;
    let n = g.node_count();
    let x0 = one_infected(n, node)?;
    let w = WeightedAdjacency::unweighted(&g);
    let threshold = threshold_report(&p, spectral_radius(&g, 1e-12)?.lambda1)?;
    let mut i0 = vec![0.0; n];
    i0[node - 1] = 1.0;
    let mut y0 = i0;
    y0.extend(vec![0.0; n]);
    let sys = MeanFieldSystem::Reduced {
        adjacency: &w,
        params: p,
    };
    let tr = integrate(&sys, &y0, grid, IntegrationOptions::default())?;
    let meanfield = tr
        .states
        .iter()
        .map(|y| y[..n].iter().sum::<f64>() / n as f64)
        .collect();
    let montecarlo = run_ensemble(&g, &p, &x0, paths, grid, seed)?;
    Ok(Comparison {
        params: p,
        threshold,
        times: grid.to_vec(),
        meanfield,
        montecarlo,
    })
}

/// Graph and parameters of the equitable-partition figure.
pub fn eq_part_setup() -> (Graph, EpidemicParams) {
    (
        Graph::circulant_regular(50, 10).expect("fixed graph is valid"),
        EpidemicParams::new(0.25, 0.4, 0.2, 0.3).expect("fixed parameters are valid"),
    )
}

/// Distinct per-node starting points: I spread over [0.02, 0.52], R over
/// [0, 0.4] in a scrambled order (17 is coprime to 50).
pub fn eq_part_initial(n: usize) -> MeanFieldState {
    let span = (n - 1).max(1) as f64;
    let i: Vec<f64> = (0..n).map(|k| 0.02 + 0.5 * k as f64 / span).collect();
    let r: Vec<f64> = (0..n).map(|k| 0.4 * ((17 * k) % n) as f64 / span).collect();
    MeanFieldState::from_ir(i, r).expect("I + R <= 0.92")
}

#[derive(Debug, Clone)]
pub struct EqPartData {
    pub times: Vec<f64>,
    /// 0-based nodes whose full-system trajectories are reported.
    pub nodes: [usize; 2],
    /// `(I, R)` of each reported node at every time.
    pub node_paths: [Vec<(f64, f64)>; 2],
    /// `(I, R)` of the single-cell quotient started from the averages.
    pub quotient: Vec<(f64, f64)>,
    pub equilibrium: (f64, f64),
    /// Lyapunov function along the quotient trajectory.
    pub lyapunov: Vec<f64>,
}

pub fn eq_part(grid: &[f64]) -> CliResult<EqPartData> {
    let (g, p) = eq_part_setup();
    let n = g.node_count();
    let degree = g.regular_degree().expect("regular") as f64;
    let w = WeightedAdjacency::unweighted(&g);
    let x0 = eq_part_initial(n);
    let full = integrate(
        &MeanFieldSystem::Full {
            adjacency: &w,
            params: p,
        },
        &x0.to_flat(),
        grid,
        IntegrationOptions::default(),
    )?;
    let nodes = [0, n - 1];
    let node_paths = nodes.map(|v| {
        full.states
            .iter()
            .map(|y| (y[n + v], y[2 * n + v]))
            .collect()
    });

    let part = coarsest_equitable_partition(&g);
    let q = quotient_matrix(&part, p.beta, p.epsilon)?;
    let avg = |x: &[f64]| part.average(x)[0];
    let y0 = vec![avg(&x0.s), avg(&x0.i), avg(&x0.r)];
    let red = integrate(
        &MeanFieldSystem::Quotient {
            quotient: &q,
            params: p,
        },
        &y0,
        grid,
        IntegrationOptions::default(),
    )?;
    let quotient: Vec<(f64, f64)> = red.states.iter().map(|y| (y[1], y[2])).collect();
    let eq = regular_equilibrium(degree, &p)?;
    let lyapunov = quotient
        .iter()
        .map(|&(i, r)| lyapunov_v(i, r, &eq, &p, degree))
        .collect::<Result<_, _>>()?;
    Ok(EqPartData {
        times: grid.to_vec(),
        nodes,
        node_paths,
        quotient,
        equilibrium: (eq.i[0], eq.r[0]),
        lyapunov,
    })
}

fn h(s: &str) -> String {
    s.to_string()
}

fn gamma_tag(g: f64) -> String {
    format!("{g:.4}")
}

fn curve_files(prefix: &str, tag: &str, curves: &[(f64, Ensemble)], seed: u64) -> Vec<OutputFile> {
    curves
        .iter()
        .map(|(v, e)| {
            let mut text = prevalence_csv(
                &e.curve.times,
                &e.curve.mean,
                &e.curve.stderr,
                e.curve.paths,
            );
            text.push_str(&key_values(
                "# ",
                &[
                    (tag.to_string(), v.to_string()),
                    ("base_seed".into(), seed.to_string()),
                ],
            ));
            let label = if tag == "gamma" {
                gamma_tag(*v)
            } else {
                v.to_string()
            };
            OutputFile::new(format!("{prefix}_{tag}{label}_seed{seed}.csv"), text)
        })
        .collect()
}

fn comparison_files(fig: Figure, c: &Comparison, seed: u64) -> Vec<OutputFile> {
    let name = fig.name();
    let mf = csv_table(
        &[h("t"), h("mean_prevalence")],
        c.times.iter().zip(&c.meanfield).map(|(&t, &m)| vec![t, m]),
    );
    let e = &c.montecarlo;
    let mc = prevalence_csv(
        &e.curve.times,
        &e.curve.mean,
        &e.curve.stderr,
        e.curve.paths,
    );
    let r = &c.threshold;
    let report = key_values(
        "",
        &[
            (h("beta"), c.params.beta.to_string()),
            (h("delta"), c.params.delta.to_string()),
            (h("gamma"), c.params.gamma.to_string()),
            (h("sigma"), c.params.sigma.to_string()),
            (h("lambda1"), r.lambda1.to_string()),
            (h("tau"), r.tau.to_string()),
            (h("tau_c"), r.tau_c.to_string()),
            (h("rho"), r.rho.to_string()),
            (h("regime"), r.regime.to_string()),
        ],
    );
    vec![
        OutputFile::new(format!("{name}_meanfield.csv"), mf),
        OutputFile::new(format!("{name}_montecarlo_seed{seed}.csv"), mc),
        OutputFile::new(format!("{name}_threshold.txt"), report),
    ]
}

fn figure_files(fig: Figure, opts: &ReproduceOptions) -> CliResult<(Vec<OutputFile>, Option<u64>)> {
    let t_max = opts.t_max.unwrap_or(WINDOW);
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(CliError::Config(format!(
            "t_max must be finite and > 0, got {t_max}"
        )));
    }
    let grid = uniform_grid(t_max, DT);
    let seed = opts.seed;
    let node = opts.initial_node;
    Ok(match fig {
        Figure::Fig1a | Figure::Fig1b => {
            let sigma = if fig == Figure::Fig1a { 0.0 } else { 0.45 };
            let curves = fig1_curves(sigma, opts.paths.unwrap_or(FIG1_PATHS), seed, &grid, node)?;
            (curve_files(fig.name(), "gamma", &curves, seed), Some(seed))
        }
        Figure::Fig2 => {
            let curves = fig2_curves(opts.paths.unwrap_or(FIG2_PATHS), seed, &grid, node)?;
            let mut files = curve_files("fig2", "sigma", &curves, seed);
            let steady = csv_table(
                &[h("sigma"), h("steady_prevalence"), h("stderr")],
                curves.iter().map(|(s, e)| {
                    let (m, se) = steady_prevalence(e);
                    vec![*s, m, se]
                }),
            );
            files.push(OutputFile::new(
                format!("fig2_steady_seed{seed}.csv"),
                steady,
            ));
            (files, Some(seed))
        }
        Figure::Fig3 => {
            let rows = fig3_rows()?;
            let csv = csv_table(
                &[h("gamma"), h("sigma"), h("mean_I_star"), h("endemic")],
                rows.iter().map(|r| {
                    vec![
                        r.gamma,
                        r.sigma,
                        r.mean_i_star,
                        f64::from(u8::from(r.regime == Regime::Endemic)),
                    ]
                }),
            );
            (vec![OutputFile::new("fig3.csv", csv)], None)
        }
        Figure::FigEqPart => {
            let d = eq_part(&grid)?;
            let [a, b] = d.nodes;
            let nodes = csv_table(
                &[
                    h("t"),
                    format!("I_{}", a + 1),
                    format!("R_{}", a + 1),
                    format!("I_{}", b + 1),
                    format!("R_{}", b + 1),
                ],
                (0..d.times.len()).map(|k| {
                    let (ia, ra) = d.node_paths[0][k];
                    let (ib, rb) = d.node_paths[1][k];
                    vec![d.times[k], ia, ra, ib, rb]
                }),
            );
            let quotient = csv_table(
                &[h("t"), h("I"), h("R")],
                (0..d.times.len()).map(|k| vec![d.times[k], d.quotient[k].0, d.quotient[k].1]),
            );
            let lyap = csv_table(
                &[h("t"), h("V")],
                d.times.iter().zip(&d.lyapunov).map(|(&t, &v)| vec![t, v]),
            );
            let eq = key_values(
                "",
                &[
                    (h("I_star"), d.equilibrium.0.to_string()),
                    (h("R_star"), d.equilibrium.1.to_string()),
                ],
            );
            (
                vec![
                    OutputFile::new("figEqPart_nodes.csv", nodes),
                    OutputFile::new("figEqPart_quotient.csv", quotient),
                    OutputFile::new("figEqPart_lyapunov.csv", lyap),
                    OutputFile::new("figEqPart_equilibrium.txt", eq),
                ],
                None,
            )
        }
        _ => {
            let c = comparison(
                fig,
                opts.paths.unwrap_or(COMPARISON_PATHS),
                seed,
                &grid,
                node,
            )?;
            (comparison_files(fig, &c, seed), Some(seed))
        }
    })
}

/// Runs one figure recipe and writes its bundle to `<out>/<figure>/`.
pub fn reproduce(fig: Figure, opts: &ReproduceOptions) -> CliResult<RunManifest> {
    let start = Instant::now();
    let (files, seed) = figure_files(fig, opts)?;
    let recipe = serde_json::json!({
        "figure": fig.name(),
        "paths": opts.paths,
        "seed": opts.seed,
        "t_max": opts.t_max.unwrap_or(WINDOW),
        "dt": DT,
        "initial_node": opts.initial_node,
    });
    let hash = sha256_hex(recipe.to_string().as_bytes());
    write_outputs(
        &opts.out_dir.join(fig.name()),
        &files,
        hash,
        seed,
        start.elapsed(),
    )
}

/// Runs several recipes, each on its own thread pool slot.
pub fn reproduce_all(figs: &[Figure], opts: &ReproduceOptions) -> CliResult<Vec<RunManifest>> {
    figs.par_iter().map(|&f| reproduce(f, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for f in Figure::ALL {
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert_eq!("FIGEQPART".parse::<Figure>().unwrap(), Figure::FigEqPart);
        assert!(matches!("fig6".parse::<Figure>(), Err(CliError::Config(_))));
    }

    #[test]
    fn grids() {
        let g = log_grid(0.01, 1.0, 20);
        assert_eq!(g.len(), 20);
        assert!((g[0] - 0.01).abs() < 1e-15);
        assert_eq!(g[19], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let u = uniform_grid(100.0, 0.5);
        assert_eq!(u.len(), 201);
        assert_eq!(u[200], 100.0);
        assert_eq!(u[1], 0.5);
    }

    #[test]
    fn eq_part_starts_are_distinct_and_valid() {
        let x = eq_part_initial(50);
        x.check_simplex(1e-15).unwrap();
        let mut r = x.r.clone();
        r.sort_by(f64::total_cmp);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fig3_is_all_endemic() {
        let rows = fig3_rows().unwrap();
        assert_eq!(rows.len(), FIG3_SIGMAS.len() * GAMMA_POINTS);
        assert!(rows
            .iter()
            .all(|r| r.regime == Regime::Endemic && r.mean_i_star > 0.0));
    }

    #[test]
    fn bad_initial_node() {
        let grid = uniform_grid(1.0, 0.5);
        assert!(comparison(Figure::Fig4a, 10, 0, &grid, 51).is_err());
        assert!(comparison(Figure::Fig2, 10, 0, &grid, 1).is_err());
    }
}
