//! JSON experiment configuration.
//!
//! Node ids in configuration files are 1-based, matching edge-list and
//! partition files; they are shifted to 0-based when the experiment is
//! prepared. A minimal document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "graph": { "kind": "complete", "n": 50 },
//!   "params": { "beta": 0.25, "delta": 0.4, "gamma": 0.2, "sigma": 0.45 },
//!   "method": "simulate",
//!   "t_max": 100.0
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use netsirs_core::exact::{NetworkConfiguration, NodeState, DEFAULT_STATE_CAP};
use netsirs_core::graph::parse_edge_list;
use netsirs_core::partitions::{
    coarsest_equitable_partition, parse_partition, verify_equitable, EquitablePartition,
};
use netsirs_core::{EpidemicParams, Graph, GraphKind};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Parameters a sweep axis may vary.
pub const SWEEPABLE: [&str; 5] = ["beta", "delta", "gamma", "sigma", "epsilon"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub graph: GraphSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
    pub params: ParamsSpec,
    #[serde(default)]
    pub initial: InitialCondition,
    pub method: Method,
    pub t_max: f64,
    /// Output times `0, t_max/(k-1), ..., t_max`.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_grid_points() -> usize {
    201
}

fn default_paths() -> usize {
    1000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Complete {
        n: usize,
    },
    CirculantRegular {
        n: usize,
        degree: usize,
    },
    /// 1-based undirected edges.
    EdgeList {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Text file of `u v` lines, 1-based, `#` comments.
    EdgeListFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSpec {
    /// Coarsest equitable partition by colour refinement.
    Coarsest,
    /// 1-based cells, checked for equitability.
    Cells { cells: Vec<Vec<usize>> },
    /// One cell per line, 1-based node ids.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub sigma: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
}

fn one() -> f64 {
    1.0
}

impl ParamsSpec {
    pub fn from_params(p: &EpidemicParams) -> Self {
        Self {
            beta: p.beta,
            delta: p.delta,
            gamma: p.gamma,
            sigma: p.sigma,
            epsilon: p.epsilon,
        }
    }

    pub fn to_params(&self) -> CliResult<EpidemicParams> {
        EpidemicParams::with_epsilon(self.beta, self.delta, self.gamma, self.sigma, self.epsilon)
            .map_err(CliError::config)
    }

    fn set(&mut self, name: &str, value: f64) -> CliResult<()> {
        match name {
            "beta" => self.beta = value,
            "delta" => self.delta = value,
            "gamma" => self.gamma = value,
            "sigma" => self.sigma = value,
            "epsilon" => self.epsilon = value,
            other => {
                return Err(CliError::Config(format!(
                    "unknown sweep parameter {other:?}"
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Every node susceptible except `node` (1-based).
    OneInfected { node: usize },
    /// One letter per node from `S`, `I`, `R`, node 1 first.
    Configuration { states: String },
    /// Per-node probabilities (mean-field methods only).
    Explicit {
        s: Vec<f64>,
        i: Vec<f64>,
        r: Vec<f64>,
    },
    /// Per-cell probabilities, lifted to every node of the cell.
    CellEqual {
        s: Vec<f64>,
        i: Vec<f64>,
        r: Vec<f64>,
    },
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::OneInfected { node: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Simulate,
    Meanfield,
    Quotient,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Simulate => "simulate",
            Self::Meanfield => "meanfield",
            Self::Quotient => "quotient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(CliError::config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Makes file references relative to the config file's directory.
    fn resolve_paths(&mut self, base: &Path) {
        if let GraphSpec::EdgeListFile { path } = &mut self.graph {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(PartitionSpec::File { path }) = &mut self.partition {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn time_grid(&self) -> Vec<f64> {
        let k = self.grid_points;
        (0..k)
            .map(|j| self.t_max * j as f64 / (k - 1) as f64)
            .collect()
    }

    /// Every combination of sweep values, as `(param, value)` lists.
    pub fn sweep_cells(&self) -> Vec<Vec<(String, f64)>> {
        let mut cells = vec![Vec::new()];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(cells.len() * axis.values.len());
            for cell in &cells {
                for &v in &axis.values {
                    let mut c = cell.clone();
                    c.push((axis.param.clone(), v));
                    next.push(c);
                }
            }
            cells = next;
        }
        cells
    }

    /// Checks everything that can be checked without running a solver and
    /// builds the graph, partition and every sweep cell's parameters.
    pub fn prepare(&self) -> CliResult<Prepared> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(CliError::Config(format!(
                "t_max must be finite and > 0, got {}",
                self.t_max
            )));
        }
        if self.grid_points < 2 {
            return Err(CliError::Config("grid_points must be at least 2".into()));
        }
        if self.method == Method::Simulate && self.paths == 0 {
            return Err(CliError::Config("paths must be at least 1".into()));
        }
        for axis in &self.sweep {
            if !SWEEPABLE.contains(&axis.param.as_str()) {
                return Err(CliError::Config(format!(
                    "sweep axis {:?} is not one of {SWEEPABLE:?}",
                    axis.param
                )));
            }
            if axis.values.is_empty() {
                return Err(CliError::Config(format!(
                    "sweep axis {:?} has no values",
                    axis.param
                )));
            }
        }

        let graph = build_graph(&self.graph)?;
        let n = graph.node_count();
        if self.method == Method::Exact && n > DEFAULT_STATE_CAP {
            return Err(CliError::Config(format!(
                "exact method needs N <= {DEFAULT_STATE_CAP}, got N = {n}; use method \"simulate\""
            )));
        }
        let partition = match &self.partition {
            None if self.method == Method::Quotient
                || matches!(self.initial, InitialCondition::CellEqual { .. }) =>
            {
                Some(coarsest_equitable_partition(&graph))
            }
            None => None,
            Some(spec) => Some(build_partition(&graph, spec)?),
        };

        let mut cells = Vec::new();
        for cell in self.sweep_cells() {
            let mut spec = self.params;
            for (name, v) in &cell {
                spec.set(name, *v)?;
            }
            cells.push(SweepCell {
                label: cell_label(&cell),
                params: spec.to_params()?,
            });
        }
        check_initial(&self.initial, self.method, n, partition.as_ref())?;
        Ok(Prepared {
            graph,
            partition,
            cells,
        })
    }
}

/// Graph, partition and parameter sets of a validated configuration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: Graph,
    pub partition: Option<EquitablePartition>,
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    /// `param<value>` pairs joined by `_`; empty without a sweep.
    pub label: String,
    pub params: EpidemicParams,
}

fn cell_label(cell: &[(String, f64)]) -> String {
    cell.iter()
        .map(|(k, v)| format!("{k}{v}"))
        .collect::<Vec<_>>()
        .join("_")
}

pub fn build_graph(spec: &GraphSpec) -> CliResult<Graph> {
    let kind = match spec {
        GraphSpec::Complete { n } => GraphKind::Complete { n: *n },
        GraphSpec::CirculantRegular { n, degree } => GraphKind::CirculantRegular {
            n: *n,
            degree: *degree,
        },
        GraphSpec::EdgeList { n, edges } => GraphKind::EdgeList {
            n: *n,
            edges: to_zero_based_edges(edges)?,
        },
        GraphSpec::EdgeListFile { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let (n, edges) = parse_edge_list(&text).map_err(CliError::config)?;
            GraphKind::EdgeList { n, edges }
        }
    };
    Graph::build(&kind).map_err(CliError::config)
}

fn to_zero_based_edges(edges: &[(usize, usize)]) -> CliResult<Vec<(usize, usize)>> {
    edges
        .iter()
        .map(|&(u, v)| {
            if u == 0 || v == 0 {
                Err(CliError::Config("edge-list node ids are 1-based".into()))
            } else {
                Ok((u - 1, v - 1))
            }
        })
        .collect()
}

fn build_partition(g: &Graph, spec: &PartitionSpec) -> CliResult<EquitablePartition> {
    let cells = match spec {
        PartitionSpec::Coarsest => return Ok(coarsest_equitable_partition(g)),
        PartitionSpec::Cells { cells } => cells
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&v| {
                        v.checked_sub(1).ok_or_else(|| {
                            CliError::Config("partition node ids are 1-based".into())
                        })
                    })
                    .collect::<CliResult<Vec<_>>>()
            })
            .collect::<CliResult<Vec<_>>>()?,
        PartitionSpec::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_partition(&text).map_err(CliError::config)?
        }
    };
    verify_equitable(g, &cells).map_err(CliError::config)
}

fn check_initial(
    ic: &InitialCondition,
    method: Method,
    n: usize,
    partition: Option<&EquitablePartition>,
) -> CliResult<()> {
    match ic {
        InitialCondition::OneInfected { node } => {
            if *node == 0 || *node > n {
                return Err(CliError::Config(format!(
                    "initial node {node} is not in 1..={n}"
                )));
            }
        }
        InitialCondition::Configuration { states } => {
            parse_states(states, n)?;
        }
        InitialCondition::Explicit { s, i, r } => {
            if matches!(method, Method::Exact | Method::Simulate) {
                return Err(CliError::Config(
                    "explicit probabilities need a mean-field method; use a configuration".into(),
                ));
            }
            check_triple(s, i, r, n)?;
        }
        InitialCondition::CellEqual { s, i, r } => {
            if matches!(method, Method::Exact | Method::Simulate) {
                return Err(CliError::Config(
                    "cell-equal probabilities need a mean-field method".into(),
                ));
            }
            let cells = partition.map_or(0, |p| p.cell_count());
            check_triple(s, i, r, cells)?;
        }
    }
    Ok(())
}

fn check_triple(s: &[f64], i: &[f64], r: &[f64], n: usize) -> CliResult<()> {
    if s.len() != n || i.len() != n || r.len() != n {
        return Err(CliError::Config(format!(
            "initial arrays must have length {n}"
        )));
    }
    for k in 0..n {
        let ok =
            s[k] >= 0.0 && i[k] >= 0.0 && r[k] >= 0.0 && (s[k] + i[k] + r[k] - 1.0).abs() <= 1e-9;
        if !ok {
            return Err(CliError::Config(format!(
                "initial probabilities at index {} are not a distribution",
                k + 1
            )));
        }
    }
    Ok(())
}

pub fn parse_states(states: &str, n: usize) -> CliResult<Vec<NodeState>> {
    let parsed: Vec<NodeState> = states
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c.to_ascii_uppercase() {
            'S' => Ok(NodeState::S),
            'I' => Ok(NodeState::I),
            'R' => Ok(NodeState::R),
            other => Err(CliError::Config(format!("unknown node state {other:?}"))),
        })
        .collect::<CliResult<_>>()?;
    if parsed.len() != n {
        return Err(CliError::Config(format!(
            "configuration has {} states for {n} nodes",
            parsed.len()
        )));
    }
    Ok(parsed)
}

/// Starting configuration for the exact and stochastic methods.
pub fn initial_configuration(ic: &InitialCondition, n: usize) -> CliResult<NetworkConfiguration> {
    match ic {
        InitialCondition::OneInfected { node } => {
            NetworkConfiguration::one_infected(n, node - 1).map_err(CliError::config)
        }
        InitialCondition::Configuration { states } => {
            Ok(NetworkConfiguration::from_states(parse_states(states, n)?))
        }
        _ => Err(CliError::Config(
            "this method needs a discrete initial configuration".into(),
        )),
    }
}
