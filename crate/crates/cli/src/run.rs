//! Dispatch of a configuration to the owning solver and CSV emission.

use std::time::Instant;

use rayon::prelude::*;

use netsirs_core::exact::{
    bound_mean_extinction_time, bound_no_absorption, bound_not_in_final_set, build_generator,
    expected_hitting_time_final_set, marginal_infection_probabilities, memory_estimate, point_mass,
    prob_not_absorbed, prob_not_in_final_set, solve_master_equation, NodeState,
};
use netsirs_core::graph::{apply_epsilon_weights, spectral_radius};
use netsirs_core::meanfield::{
    endemic_equilibrium, endemic_equilibrium_quotient, integrate, threshold_report,
    EquilibriumPoint, IntegrationOptions, MeanFieldState, MeanFieldSystem, Regime,
};
use netsirs_core::partitions::{quotient_matrix, EquitablePartition};
use netsirs_core::sim::{extinction_stats_from_times, run_ensemble};
use netsirs_core::{EpidemicParams, Graph, WeightedAdjacency};

use crate::config::{
    initial_configuration, ExperimentConfig, InitialCondition, Method, Prepared, SweepCell,
};
use crate::error::{CliError, CliResult};
use crate::output::{csv_table, key_values, sha256_hex, write_outputs, OutputFile, RunManifest};

/// Tolerance of the endemic fixed-point iteration in reports.
const EQUILIBRIUM_TOL: f64 = 1e-12;

pub fn run(cfg: &ExperimentConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    let prepared = cfg.prepare()?;
    let files = compute(cfg, &prepared)?;
    let seed = (cfg.method == Method::Simulate).then_some(cfg.base_seed);
    write_outputs(
        &cfg.output_dir,
        &files,
        config_hash(cfg),
        seed,
        start.elapsed(),
    )
}

/// SHA-256 of the compact JSON of `cfg`, ignoring where outputs go.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output_dir = std::path::PathBuf::new();
    sha256_hex(
        serde_json::to_string(&c)
            .expect("config serializes")
            .as_bytes(),
    )
}

/// Output files of every sweep cell, computed in parallel.
pub fn compute(cfg: &ExperimentConfig, prepared: &Prepared) -> CliResult<Vec<OutputFile>> {
    if matches!(cfg.method, Method::Exact | Method::Simulate)
        && prepared.cells.iter().any(|c| c.params.epsilon != 1.0)
    {
        return Err(CliError::Config(
            "epsilon weights apply to the mean-field methods only".into(),
        ));
    }
    if cfg.method == Method::Meanfield
        && prepared.partition.is_none()
        && prepared.cells.iter().any(|c| c.params.epsilon != 1.0)
    {
        return Err(CliError::Config("epsilon != 1 needs a partition".into()));
    }
    if cfg.method == Method::Exact {
        if let Some(bytes) = memory_estimate(prepared.graph.node_count()) {
            eprintln!(
                "exact chain: {} nodes, about {:.3} MB for the generator",
                prepared.graph.node_count(),
                bytes as f64 / 1e6
            );
        }
    }
    let per_cell: Vec<CliResult<Vec<OutputFile>>> = prepared
        .cells
        .par_iter()
        .map(|cell| run_cell(cfg, prepared, cell))
        .collect();
    let mut files = Vec::new();
    for r in per_cell {
        files.extend(r?);
    }
    Ok(files)
}

fn file_name(stem: &str, label: &str, suffix: &str) -> String {
    if label.is_empty() {
        format!("{stem}{suffix}")
    } else {
        format!("{stem}_{label}{suffix}")
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    cell: &SweepCell,
) -> CliResult<Vec<OutputFile>> {
    match cfg.method {
        Method::Exact => run_exact(cfg, &prepared.graph, cell),
        Method::Simulate => run_simulate(cfg, &prepared.graph, cell),
        Method::Meanfield => run_meanfield(cfg, prepared, cell),
        Method::Quotient => run_quotient(cfg, prepared, cell),
    }
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |k| format!("{prefix}_{k}"))
}

fn run_exact(cfg: &ExperimentConfig, g: &Graph, cell: &SweepCell) -> CliResult<Vec<OutputFile>> {
    let p = cell.params;
    let n = g.node_count();
    let x0 = initial_configuration(&cfg.initial, n)?;
    let q = build_generator(g, &p)?;
    let start = x0.index().expect("exact chains are small enough to index");
    let grid = cfg.time_grid();
    let vs = solve_master_equation(&q, &point_mass(q.dim(), start), &grid)?;

    let mut header = vec![
        "t".to_string(),
        "P_not_final".into(),
        "P_not_absorbed".into(),
    ];
    header.extend(indexed("I_marginal", n));
    let lambda1 = spectral_radius(g, 1e-12)?.lambda1;
    let infected0 = x0.count(NodeState::I);
    let mut worst_excess = f64::NEG_INFINITY;
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .zip(&vs)
        .map(|(&t, v)| {
            let not_final = prob_not_in_final_set(v, n);
            let bound = bound_not_in_final_set(t, n, infected0, p.beta, p.delta, lambda1);
            worst_excess = worst_excess.max(not_final - bound);
            let mut row = vec![t, not_final, prob_not_absorbed(v)];
            row.extend(marginal_infection_probabilities(v, n));
            row
        })
        .collect();

    let mut report = vec![
        ("nodes".to_string(), n.to_string()),
        ("states".into(), q.dim().to_string()),
        ("transitions".into(), q.nnz().to_string()),
        ("lambda1".into(), lambda1.to_string()),
        ("tau".into(), p.tau().to_string()),
        ("infected_at_0".into(), infected0.to_string()),
    ];
    if infected0 > 0 {
        let h = expected_hitting_time_final_set(&q, &x0)?;
        report.push(("expected_hitting_time_final_set".into(), h.to_string()));
    }
    match bound_mean_extinction_time(n, p.beta, p.delta, lambda1) {
        Ok(b) => report.push(("bound_mean_extinction_time".into(), b.to_string())),
        Err(e) => report.push((
            "bound_mean_extinction_time".into(),
            format!("not applicable ({e})"),
        )),
    }
    report.push((
        "max_excess_over_final_set_bound".into(),
        worst_excess.to_string(),
    ));
    if p.sigma == 0.0 {
        let ir0 = x0.states().iter().filter(|&&s| s != NodeState::S).count();
        match bound_no_absorption(cfg.t_max, g, &p, ir0) {
            Ok(b) => report.push(("bound_no_absorption_at_t_max".into(), b.to_string())),
            Err(e) => report.push((
                "bound_no_absorption_at_t_max".into(),
                format!("not available ({e})"),
            )),
        }
    }
    Ok(vec![
        OutputFile::new(
            file_name("exact", &cell.label, ".csv"),
            csv_table(&header, rows),
        ),
        OutputFile::new(
            file_name("exact", &cell.label, "_report.txt"),
            key_values("", &report),
        ),
    ])
}

fn run_simulate(cfg: &ExperimentConfig, g: &Graph, cell: &SweepCell) -> CliResult<Vec<OutputFile>> {
    let x0 = initial_configuration(&cfg.initial, g.node_count())?;
    let grid = cfg.time_grid();
    let ens = run_ensemble(g, &cell.params, &x0, cfg.paths, &grid, cfg.base_seed)?;
    let stats = extinction_stats_from_times(&ens.hitting_times, cfg.t_max)?;
    let mut text = prevalence_csv(
        &ens.curve.times,
        &ens.curve.mean,
        &ens.curve.stderr,
        ens.curve.paths,
    );
    let mut footer = vec![("base_seed".to_string(), cfg.base_seed.to_string())];
    footer.extend(stats.to_key_values());
    text.push_str(&key_values("# ", &footer));
    let stem = format!(
        "simulate{}",
        if cell.label.is_empty() {
            String::new()
        } else {
            format!("_{}", cell.label)
        }
    );
    Ok(vec![OutputFile::new(
        format!("{stem}_seed{}.csv", cfg.base_seed),
        text,
    )])
}

/// `t, mean_prevalence, stderr, n_paths`.
pub fn prevalence_csv(times: &[f64], mean: &[f64], stderr: &[f64], paths: usize) -> String {
    let header = ["t", "mean_prevalence", "stderr", "n_paths"].map(String::from);
    csv_table(
        &header,
        (0..times.len()).map(|k| vec![times[k], mean[k], stderr[k], paths as f64]),
    )
}

/// Node-level starting state of the mean-field methods.
pub fn node_initial_state(
    ic: &InitialCondition,
    n: usize,
    partition: Option<&EquitablePartition>,
) -> CliResult<MeanFieldState> {
    Ok(match ic {
        InitialCondition::OneInfected { .. } | InitialCondition::Configuration { .. } => {
            let x0 = initial_configuration(ic, n)?;
            let mut st = MeanFieldState::uniform(n, 0.0, 0.0, 0.0);
            for (k, s) in x0.states().iter().enumerate() {
                match s {
                    NodeState::S => st.s[k] = 1.0,
                    NodeState::I => st.i[k] = 1.0,
                    NodeState::R => st.r[k] = 1.0,
                }
            }
            st
        }
        InitialCondition::Explicit { s, i, r } => {
            MeanFieldState::new(s.clone(), i.clone(), r.clone())?
        }
        InitialCondition::CellEqual { s, i, r } => {
            let part = partition
                .ok_or_else(|| CliError::Config("cell-equal start needs a partition".into()))?;
            MeanFieldState::new(part.lift(s), part.lift(i), part.lift(r))?
        }
    })
}

fn weighted_adjacency(prepared: &Prepared, p: &EpidemicParams) -> CliResult<WeightedAdjacency> {
    match &prepared.partition {
        Some(part) => Ok(apply_epsilon_weights(&prepared.graph, part, p.epsilon)?),
        None => Ok(WeightedAdjacency::unweighted(&prepared.graph)),
    }
}

fn equilibrium_report(
    eq: CliResult<EquilibriumPoint>,
    regime: Regime,
    fallback_len: usize,
    p: &EpidemicParams,
    last: &MeanFieldState,
) -> CliResult<Vec<(String, String)>> {
    let eq = match regime {
        Regime::Endemic => eq?,
        Regime::Extinction => EquilibriumPoint::disease_free(fallback_len, p),
    };
    let target = eq.state().to_flat();
    let dist = target
        .iter()
        .zip(last.to_flat())
        .fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
    let mut out: Vec<(String, String)> = eq
        .to_key_values()
        .into_iter()
        .map(|(k, v)| (format!("equilibrium_{k}"), v))
        .collect();
    out.push(("final_distance_to_equilibrium".into(), format!("{dist:e}")));
    Ok(out)
}

fn threshold_lines(lambda1: f64, p: &EpidemicParams) -> CliResult<(Regime, Vec<(String, String)>)> {
    let r = threshold_report(p, lambda1)?;
    Ok((
        r.regime,
        vec![
            ("lambda1".into(), r.lambda1.to_string()),
            ("tau".into(), r.tau.to_string()),
            ("tau_c".into(), r.tau_c.to_string()),
            ("rho".into(), r.rho.to_string()),
            ("regime".into(), r.regime.to_string()),
        ],
    ))
}

fn diagnostics_lines(d: &netsirs_core::meanfield::TrajectoryDiagnostics) -> Vec<(String, String)> {
    vec![
        ("accepted_steps".into(), d.accepted_steps.to_string()),
        ("rejected_steps".into(), d.rejected_steps.to_string()),
        ("clamped_components".into(), d.clamped.to_string()),
        (
            "max_region_violation".into(),
            format!("{:e}", d.max_region_violation),
        ),
    ]
}

fn run_meanfield(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    cell: &SweepCell,
) -> CliResult<Vec<OutputFile>> {
    let p = cell.params;
    let n = prepared.graph.node_count();
    let w = weighted_adjacency(prepared, &p)?;
    let y0 = node_initial_state(&cfg.initial, n, prepared.partition.as_ref())?;
    let grid = cfg.time_grid();
    let sys = MeanFieldSystem::Full {
        adjacency: &w,
        params: p,
    };
    let tr = integrate(&sys, &y0.to_flat(), &grid, IntegrationOptions::default())?;

    let mut header = vec!["t".to_string()];
    header.extend(indexed("S", n));
    header.extend(indexed("I", n));
    header.extend(indexed("R", n));
    let rows = grid.iter().zip(&tr.states).map(|(&t, y)| {
        let mut row = vec![t];
        row.extend_from_slice(y);
        row
    });
    let csv = csv_table(&header, rows);

    let lambda1 = spectral_radius(&w, 1e-12)?.lambda1;
    let (regime, mut report) = threshold_lines(lambda1, &p)?;
    let last = MeanFieldState::from_flat(tr.last())?;
    report.extend(equilibrium_report(
        endemic_equilibrium(&w, &p, EQUILIBRIUM_TOL).map_err(CliError::from),
        regime,
        n,
        &p,
        &last,
    )?);
    report.extend(diagnostics_lines(&tr.diagnostics));
    Ok(vec![
        OutputFile::new(file_name("meanfield", &cell.label, ".csv"), csv),
        OutputFile::new(
            file_name("meanfield", &cell.label, "_report.txt"),
            key_values("", &report),
        ),
    ])
}

fn run_quotient(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    cell: &SweepCell,
) -> CliResult<Vec<OutputFile>> {
    let p = cell.params;
    let part = prepared
        .partition
        .as_ref()
        .expect("quotient method always has a partition");
    let cells = part.cell_count();
    let q = quotient_matrix(part, p.beta, p.epsilon)?;
    let y0 = match &cfg.initial {
        InitialCondition::CellEqual { s, i, r } => {
            MeanFieldState::new(s.clone(), i.clone(), r.clone())?
        }
        ic => {
            // cell averages of the node-level start
            let x = node_initial_state(ic, prepared.graph.node_count(), Some(part))?;
            MeanFieldState::new(part.average(&x.s), part.average(&x.i), part.average(&x.r))?
        }
    };
    let grid = cfg.time_grid();
    let sys = MeanFieldSystem::Quotient {
        quotient: &q,
        params: p,
    };
    let tr = integrate(&sys, &y0.to_flat(), &grid, IntegrationOptions::default())?;

    let mut header = vec!["t".to_string()];
    header.extend(indexed("S_cell", cells));
    header.extend(indexed("I_cell", cells));
    header.extend(indexed("R_cell", cells));
    let rows = grid.iter().zip(&tr.states).map(|(&t, y)| {
        let mut row = vec![t];
        row.extend_from_slice(y);
        row
    });
    let csv = csv_table(&header, rows);

    // the quotient matrix carries beta, so its Perron root is beta * lambda1
    let lambda1 = spectral_radius(&q, 1e-12)?.lambda1 / p.beta;
    let (regime, mut report) = threshold_lines(lambda1, &p)?;
    report.push(("cells".into(), cells.to_string()));
    let last = MeanFieldState::from_flat(tr.last())?;
    report.extend(equilibrium_report(
        endemic_equilibrium_quotient(&q, &p, EQUILIBRIUM_TOL).map_err(CliError::from),
        regime,
        cells,
        &p,
        &last,
    )?);
    report.extend(diagnostics_lines(&tr.diagnostics));
    Ok(vec![
        OutputFile::new(file_name("quotient", &cell.label, ".csv"), csv),
        OutputFile::new(
            file_name("quotient", &cell.label, "_report.txt"),
            key_values("", &report),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GraphSpec, ParamsSpec, SweepAxis};

    fn config(method: Method, dir: &std::path::Path) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: 1,
            graph: GraphSpec::EdgeList {
                n: 3,
                edges: vec![(1, 2), (2, 3)],
            },
            partition: None,
            params: ParamsSpec {
                beta: 0.1,
                delta: 0.4,
                gamma: 0.2,
                sigma: 0.0,
                epsilon: 1.0,
            },
            initial: InitialCondition::OneInfected { node: 1 },
            method,
            t_max: 5.0,
            grid_points: 11,
            paths: 200,
            base_seed: 9,
            sweep: vec![],
            output_dir: dir.to_path_buf(),
        }
    }

    #[test]
    fn exact_run_writes_schema() {
        let dir = tempfile::tempdir().unwrap();
        let m = run(&config(Method::Exact, dir.path())).unwrap();
        let names: Vec<_> = m.outputs.iter().map(|f| f.file.as_str()).collect();
        assert_eq!(names, ["exact.csv", "exact_report.txt"]);
        let csv = std::fs::read_to_string(dir.path().join("exact.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,P_not_final,P_not_absorbed,I_marginal_1,I_marginal_2,I_marginal_3"
        );
        assert_eq!(lines.next().unwrap(), "0.0,1.0,1.0,1.0,0.0,0.0");
        assert_eq!(csv.lines().count(), 12);
        let report = std::fs::read_to_string(dir.path().join("exact_report.txt")).unwrap();
        assert!(report.contains("expected_hitting_time_final_set="));
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn meanfield_from_disease_free_is_constant() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(Method::Meanfield, dir.path());
        c.params.sigma = 0.45;
        let r = 0.45 / 0.65;
        c.initial = InitialCondition::Explicit {
            s: vec![1.0 - r; 3],
            i: vec![0.0; 3],
            r: vec![r; 3],
        };
        run(&c).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("meanfield.csv")).unwrap();
        let rows: Vec<Vec<f64>> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
            .collect();
        for row in &rows {
            for (a, b) in row.iter().zip(&rows[0]) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn simulate_sweep_writes_one_file_per_value() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(Method::Simulate, dir.path());
        c.sweep = vec![SweepAxis {
            param: "sigma".into(),
            values: vec![0.0, 0.45],
        }];
        let m = run(&c).unwrap();
        let names: Vec<_> = m.outputs.iter().map(|f| f.file.as_str()).collect();
        assert_eq!(
            names,
            ["simulate_sigma0.45_seed9.csv", "simulate_sigma0_seed9.csv"]
        );
        assert_eq!(m.seed, Some(9));
        let text = std::fs::read_to_string(dir.path().join("simulate_sigma0_seed9.csv")).unwrap();
        assert!(text.starts_with("t,mean_prevalence,stderr,n_paths\n"));
        assert!(text.contains("# base_seed=9\n"));
        assert!(text.contains("# mean_extinction_time="));
    }

    #[test]
    fn quotient_run_on_regular_graph() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(Method::Quotient, dir.path());
        c.graph = GraphSpec::CirculantRegular { n: 10, degree: 4 };
        c.params.beta = 0.5;
        let m = run(&c).unwrap();
        assert_eq!(m.outputs.len(), 2);
        let report = std::fs::read_to_string(dir.path().join("quotient_report.txt")).unwrap();
        assert!(report.contains("cells=1\n"));
        assert!(report.contains("regime=endemic\n"));
    }

    #[test]
    fn epsilon_outside_meanfield_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(Method::Simulate, dir.path());
        c.params.epsilon = 0.5;
        assert!(matches!(run(&c), Err(CliError::Config(_))));
    }
}
