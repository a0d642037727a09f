//! Text reports of the inspection subcommands (`graph`, `partition`,
//! `threshold`). Node and cell numbers are printed 1-based.

use std::fmt::Write;

use netsirs_core::graph::{apply_epsilon_weights, spectral_radius};
use netsirs_core::meanfield::{threshold_report, Regime};
use netsirs_core::partitions::{coarsest_equitable_partition, quotient_matrix};
use netsirs_core::WeightedAdjacency;

use crate::config::ExperimentConfig;
use crate::error::CliResult;

const SPECTRAL_TOL: f64 = 1e-12;

pub fn graph_summary(cfg: &ExperimentConfig) -> CliResult<String> {
    let prepared = cfg.prepare()?;
    let g = &prepared.graph;
    let n = g.node_count();
    let min_degree = (0..n).map(|i| g.degree(i)).min().unwrap_or(0);
    let s = spectral_radius(g, SPECTRAL_TOL)?;
    let mut out = String::new();
    writeln!(out, "nodes={n}").unwrap();
    writeln!(out, "edges={}", g.edge_count()).unwrap();
    writeln!(out, "min_degree={min_degree}").unwrap();
    writeln!(out, "max_degree={}", g.max_degree()).unwrap();
    writeln!(out, "average_degree={}", g.average_degree()).unwrap();
    match g.regular_degree() {
        Some(d) => writeln!(out, "regular_degree={d}").unwrap(),
        None => writeln!(out, "regular_degree=none").unwrap(),
    }
    writeln!(out, "lambda1={}", s.lambda1).unwrap();
    writeln!(out, "lambda1_residual={:e}", s.residual).unwrap();
    writeln!(out, "lambda1_iterations={}", s.iterations).unwrap();
    Ok(out)
}

/// Coarsest equitable partition (or the configured one, verified), its
/// degree and quotient matrices, and the Perron roots that must agree.
pub fn partition_summary(cfg: &ExperimentConfig) -> CliResult<String> {
    let prepared = cfg.prepare()?;
    let g = &prepared.graph;
    let part = match prepared.partition {
        Some(p) => p,
        None => coarsest_equitable_partition(g),
    };
    let p = prepared.cells[0].params;
    let mut out = String::new();
    writeln!(out, "cells={}", part.cell_count()).unwrap();
    for (h, cell) in part.cells().iter().enumerate() {
        let nodes: Vec<String> = cell.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(out, "cell_{}={}", h + 1, nodes.join(" ")).unwrap();
    }
    for (h, row) in part.degree_matrix().iter().enumerate() {
        let r: Vec<String> = row.iter().map(|d| d.to_string()).collect();
        writeln!(out, "degree_row_{}={}", h + 1, r.join(" ")).unwrap();
    }
    let q = quotient_matrix(&part, p.beta, p.epsilon)?;
    for (h, row) in q.rows().iter().enumerate() {
        let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "quotient_row_{}={}", h + 1, r.join(" ")).unwrap();
    }
    let w = if p.epsilon == 1.0 {
        WeightedAdjacency::unweighted(g)
    } else {
        apply_epsilon_weights(g, &part, p.epsilon)?
    };
    let lq = spectral_radius(&q, SPECTRAL_TOL)?.lambda1;
    let lw = p.beta * spectral_radius(&w, SPECTRAL_TOL)?.lambda1;
    writeln!(out, "lambda1_quotient={lq}").unwrap();
    writeln!(out, "beta_lambda1_network={lw}").unwrap();
    writeln!(out, "lambda1_relative_gap={:e}", (lq - lw).abs() / lw).unwrap();
    Ok(out)
}

/// Threshold quantities for every sweep cell.
pub fn threshold_text(cfg: &ExperimentConfig) -> CliResult<String> {
    let prepared = cfg.prepare()?;
    let mut out = String::new();
    for cell in &prepared.cells {
        let p = cell.params;
        let lambda1 = match &prepared.partition {
            Some(part) if p.epsilon != 1.0 => {
                spectral_radius(
                    &apply_epsilon_weights(&prepared.graph, part, p.epsilon)?,
                    SPECTRAL_TOL,
                )?
                .lambda1
            }
            _ => spectral_radius(&prepared.graph, SPECTRAL_TOL)?.lambda1,
        };
        let r = threshold_report(&p, lambda1)?;
        if !cell.label.is_empty() {
            writeln!(out, "[{}]", cell.label).unwrap();
        }
        writeln!(out, "lambda1={}", r.lambda1).unwrap();
        writeln!(out, "tau={}", r.tau).unwrap();
        writeln!(out, "tau_c={}", r.tau_c).unwrap();
        writeln!(out, "rho={}", r.rho).unwrap();
        writeln!(out, "inverse_lambda1={}", 1.0 / r.lambda1).unwrap();
        writeln!(out, "regime={}", r.regime).unwrap();
        if r.fast_extinction() {
            let n = prepared.graph.node_count();
            let bound =
                netsirs_core::exact::bound_mean_extinction_time(n, p.beta, p.delta, lambda1)?;
            writeln!(out, "fast_extinction=yes").unwrap();
            writeln!(out, "bound_mean_extinction_time={bound}").unwrap();
        } else {
            writeln!(out, "fast_extinction=no").unwrap();
        }
        if r.regime == Regime::Endemic && p.epsilon != 1.0 && prepared.partition.is_none() {
            writeln!(out, "note=epsilon ignored without a partition").unwrap();
        }
    }
    Ok(out)
}
