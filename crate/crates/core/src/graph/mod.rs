//! Undirected contact graphs and their (optionally epsilon-weighted) adjacency.
//!
//! A [`Graph`] is always simple, undirected and connected; construction
//! rejects anything else. Neighbour lists are kept for every graph and a
//! dense 0/1 matrix is kept alongside them while `N <= DENSE_LIMIT`.

mod spectral;

pub use spectral::{
    spectral_radius, spectral_radius_with, NonNegativeOperator, SpectralOptions, SpectralResult,
};

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::partitions::EquitablePartition;

/// Largest node count for which a dense adjacency matrix is stored.
pub const DENSE_LIMIT: usize = 512;

/// Graph families the engine knows how to build.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    /// Complete graph K_n.
    Complete { n: usize },
    /// Circulant graph with offsets 1..=degree/2 (plus n/2 when degree is odd).
    CirculantRegular { n: usize, degree: usize },
    /// Explicit edge list over 0-based node ids.
    EdgeList {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    neighbors: Vec<Vec<usize>>,
    dense: Option<Vec<bool>>,
}

impl Graph {
    pub fn build(kind: &GraphKind) -> Result<Self> {
        match kind {
            GraphKind::Complete { n } => Self::complete(*n),
            GraphKind::CirculantRegular { n, degree } => Self::circulant_regular(*n, *degree),
            GraphKind::EdgeList { n, edges } => Self::from_edges(*n, edges),
        }
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Circulant `degree`-regular graph on `n` nodes.
    ///
    /// Node `i` is joined to `i ± k (mod n)` for `k = 1..=degree/2`; an odd
    /// degree additionally joins `i` to its antipode `i + n/2`, which needs
    /// `n` even.
    pub fn circulant_regular(n: usize, degree: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes(n));
        }
        if degree == 0 || degree >= n {
            return Err(Error::InvalidGraph(format!(
                "degree must be in 1..{n}, got {degree}"
            )));
        }
        if degree % 2 == 1 && n % 2 == 1 {
            return Err(Error::InvalidGraph(format!(
                "odd degree {degree} needs an even node count, got {n}"
            )));
        }
        let mut edges = Vec::with_capacity(n * degree / 2);
        for i in 0..n {
            for k in 1..=degree / 2 {
                edges.push((i, (i + k) % n));
            }
            if degree % 2 == 1 && i < n / 2 {
                edges.push((i, i + n / 2));
            }
        }
        let g = Self::from_edges(n, &edges)?;
        debug_assert!((0..n).all(|i| g.degree(i) == degree));
        Ok(g)
    }

    /// Builds a graph from 0-based undirected edges. Duplicates and reversed
    /// pairs collapse to a single edge.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes(n));
        }
        let g = Self::assemble(n, edges)?;
        check_connected(&g.neighbors)?;
        Ok(g)
    }

    /// Like [`Graph::from_edges`] but accepts a single node and
    /// disconnected graphs. Only the exact chain and the simulator are
    /// meaningful on such graphs; they exist for analytic test cases.
    pub fn from_edges_allow_disconnected(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewNodes(n));
        }
        Self::assemble(n, edges)
    }

    fn assemble(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            sets[u].insert(v);
            sets[v].insert(u);
        }
        let neighbors: Vec<Vec<usize>> =
            sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let dense = (n <= DENSE_LIMIT).then(|| {
            let mut m = vec![false; n * n];
            for (u, nb) in neighbors.iter().enumerate() {
                for &v in nb {
                    m[u * n + v] = true;
                }
            }
            m
        });
        Ok(Self {
            n,
            neighbors,
            dense,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.edge_count() as f64 / self.n as f64
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        match &self.dense {
            Some(m) => m[u * self.n + v],
            None => self.neighbors[u].binary_search(&v).is_ok(),
        }
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        self.neighbors.iter().all(|nb| nb.len() == d).then_some(d)
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Dense 0/1 adjacency as rows.
    pub fn adjacency_rows(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; self.n]; self.n];
        for (u, nb) in self.neighbors.iter().enumerate() {
            for &v in nb {
                rows[u][v] = 1.0;
            }
        }
        rows
    }
}

fn check_connected(neighbors: &[Vec<usize>]) -> Result<()> {
    let n = neighbors.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &neighbors[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        return Ok(());
    }
    // report the component of the first unreached node
    let start = seen.iter().position(|&s| !s).unwrap();
    let mut component = vec![start];
    let mut mark = vec![false; n];
    mark[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &neighbors[u] {
            if !mark[v] {
                mark[v] = true;
                component.push(v);
                queue.push_back(v);
            }
        }
    }
    component.sort_unstable();
    Err(Error::Disconnected { component })
}

/// Parses an edge-list document: one `u v` pair per line, 1-based ids,
/// `#` comments. Returns the node count (largest id seen) and 0-based edges.
pub fn parse_edge_list(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next_id = || -> Result<usize> {
            let tok = fields.next().ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: "expected two node ids".into(),
            })?;
            let id: usize = tok.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad node id {tok:?}"),
            })?;
            if id == 0 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "node ids are 1-based".into(),
                });
            }
            Ok(id)
        };
        let u = next_id()?;
        let v = next_id()?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: "trailing fields after edge".into(),
            });
        }
        n = n.max(u).max(v);
        edges.push((u - 1, v - 1));
    }
    Ok((n, edges))
}

/// Symmetric non-negative adjacency stored row-compressed.
///
/// Built from a [`Graph`] either unweighted or with epsilon on every edge
/// that crosses partition cells.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    epsilon: f64,
}

impl WeightedAdjacency {
    pub fn unweighted(g: &Graph) -> Self {
        Self::from_fn(g, 1.0, |_, _| 1.0)
    }

    fn from_fn(g: &Graph, epsilon: f64, weight: impl Fn(usize, usize) -> f64) -> Self {
        let n = g.node_count();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        row_ptr.push(0);
        for u in 0..n {
            for &v in g.neighbors(u) {
                cols.push(v);
                weights.push(weight(u, v));
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            weights,
            epsilon,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(neighbour, weight)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, w)| w)
    }

    /// Copy with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= c);
        out
    }

    /// `out[i] = Σ_j w_ij x_j`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, w)| w * x[j]).sum();
        }
    }
}

/// Replaces the weight of every inter-cell edge by `epsilon`; intra-cell
/// edges keep weight 1.
pub fn apply_epsilon_weights(
    g: &Graph,
    partition: &EquitablePartition,
    epsilon: f64,
) -> Result<WeightedAdjacency> {
    if partition.node_count() != g.node_count() {
        return Err(Error::SizeMismatch {
            expected: g.node_count(),
            found: partition.node_count(),
        });
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParams(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    Ok(WeightedAdjacency::from_fn(g, epsilon, |u, v| {
        if partition.cell_of(u) == partition.cell_of(v) {
            1.0
        } else {
            epsilon
        }
    }))
}
