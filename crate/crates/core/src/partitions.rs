//! Equitable partitions, their detection by colour refinement, and the
//! quotient matrix that drives the reduced mean-field system.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, NonNegativeOperator};

/// A partition `V_1..V_n` in which every node of `V_i` has exactly
/// `d_ij` neighbours in `V_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquitablePartition {
    n: usize,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    degree_matrix: Vec<Vec<usize>>,
}

impl EquitablePartition {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_of(&self, node: usize) -> usize {
        self.cell_of[node]
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    /// `d_ij`: neighbours a node of cell `i` has in cell `j`.
    pub fn degree_matrix(&self) -> &[Vec<usize>] {
        &self.degree_matrix
    }

    /// Internal degree `d_h = d_hh` of every cell.
    pub fn internal_degrees(&self) -> Vec<usize> {
        (0..self.cells.len())
            .map(|h| self.degree_matrix[h][h])
            .collect()
    }

    /// Spreads per-cell values onto nodes.
    pub fn lift(&self, per_cell: &[f64]) -> Vec<f64> {
        self.cell_of.iter().map(|&h| per_cell[h]).collect()
    }

    /// Per-cell averages of a per-node vector.
    pub fn average(&self, per_node: &[f64]) -> Vec<f64> {
        self.cells
            .iter()
            .map(|c| c.iter().map(|&i| per_node[i]).sum::<f64>() / c.len() as f64)
            .collect()
    }
}

fn validate_cells(n: usize, cells: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut cell_of = vec![usize::MAX; n];
    for (h, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            return Err(Error::InvalidPartition(format!("cell {h} is empty")));
        }
        for &v in cell {
            if v >= n {
                return Err(Error::NodeOutOfRange { node: v, n });
            }
            if cell_of[v] != usize::MAX {
                return Err(Error::InvalidPartition(format!(
                    "node {v} appears in cells {} and {h}",
                    cell_of[v]
                )));
            }
            cell_of[v] = h;
        }
    }
    if let Some(v) = cell_of.iter().position(|&h| h == usize::MAX) {
        return Err(Error::InvalidPartition(format!("node {v} is in no cell")));
    }
    Ok(cell_of)
}

fn neighbour_counts(g: &Graph, cell_of: &[usize], cells: usize, v: usize) -> Vec<usize> {
    let mut counts = vec![0; cells];
    for &w in g.neighbors(v) {
        counts[cell_of[w]] += 1;
    }
    counts
}

/// Checks that `cells` partition the nodes of `g` equitably and computes
/// the degree matrix. Cell order is kept; nodes inside a cell are sorted.
pub fn verify_equitable(g: &Graph, cells: &[Vec<usize>]) -> Result<EquitablePartition> {
    let n = g.node_count();
    let cell_of = validate_cells(n, cells)?;
    let k = cells.len();
    let mut degree_matrix = Vec::with_capacity(k);
    for (h, cell) in cells.iter().enumerate() {
        let first = cell[0];
        let reference = neighbour_counts(g, &cell_of, k, first);
        for &v in &cell[1..] {
            let counts = neighbour_counts(g, &cell_of, k, v);
            if let Some(j) = (0..k).find(|&j| counts[j] != reference[j]) {
                return Err(Error::NotEquitable {
                    cell: h,
                    u: first,
                    v,
                    target: j,
                    count_u: reference[j],
                    count_v: counts[j],
                });
            }
        }
        degree_matrix.push(reference);
    }
    let mut cells = cells.to_vec();
    cells.iter_mut().for_each(|c| c.sort_unstable());
    Ok(EquitablePartition {
        n,
        cells,
        cell_of,
        degree_matrix,
    })
}

/// Coarsest equitable partition, by colour refinement from the one-cell
/// partition.
pub fn coarsest_equitable_partition(g: &Graph) -> EquitablePartition {
    let all: Vec<usize> = (0..g.node_count()).collect();
    refine_from(g, &[all]).expect("the one-cell partition is always a valid start")
}

/// Coarsest equitable refinement of `cells`.
///
/// Each round relabels every node by (current cell, neighbour counts per
/// cell) until the number of cells stops growing. Output cells are ordered
/// by their smallest node id.
pub fn refine_from(g: &Graph, cells: &[Vec<usize>]) -> Result<EquitablePartition> {
    let n = g.node_count();
    let mut labels = validate_cells(n, cells)?;
    let mut count = relabel_in_node_order(&mut labels);
    loop {
        let mut next = vec![0; n];
        let mut seen: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        for v in 0..n {
            let sig = (labels[v], neighbour_counts(g, &labels, count, v));
            let fresh = seen.len();
            next[v] = *seen.entry(sig).or_insert(fresh);
        }
        let new_count = seen.len();
        labels = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let mut out = vec![Vec::new(); count];
    for (v, &h) in labels.iter().enumerate() {
        out[h].push(v);
    }
    let p = verify_equitable(g, &out)?;
    debug_assert_eq!(p.cells, out);
    Ok(p)
}

// Renumbers labels by first appearance; returns the number of labels.
fn relabel_in_node_order(labels: &mut [usize]) -> usize {
    let mut map = HashMap::new();
    for l in labels.iter_mut() {
        let fresh = map.len();
        *l = *map.entry(*l).or_insert(fresh);
    }
    map.len()
}

/// Parses a partition document: one cell per line, 1-based node ids.
pub fn parse_partition(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut cells = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cell = line
            .split_whitespace()
            .map(|tok| match tok.parse::<usize>() {
                Ok(id) if id >= 1 => Ok(id - 1),
                _ => Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad node id {tok:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        cells.push(cell);
    }
    Ok(cells)
}

/// Quotient matrix of an equitable partition: `beta * d_h` on the
/// diagonal, `epsilon * beta * d_hm` off it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientMatrix {
    n: usize,
    data: Vec<f64>,
}

impl QuotientMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, h: usize, m: usize) -> f64 {
        self.data[h * self.n + m]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

impl NonNegativeOperator for QuotientMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (h, yh) in y.iter_mut().enumerate() {
            *yh = self.data[h * self.n..(h + 1) * self.n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    fn max_row_sum(&self) -> f64 {
        self.data
            .chunks(self.n)
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn quotient_matrix(p: &EquitablePartition, beta: f64, epsilon: f64) -> Result<QuotientMatrix> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "beta must be > 0, got {beta}"
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParams(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    let n = p.cell_count();
    let mut data = vec![0.0; n * n];
    for h in 0..n {
        for m in 0..n {
            let d = p.degree_matrix[h][m] as f64;
            data[h * n + m] = if h == m { beta * d } else { epsilon * beta * d };
        }
    }
    Ok(QuotientMatrix { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_epsilon_weights, spectral_radius};
    use proptest::prelude::*;

    fn star() -> Graph {
        Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    /// All set partitions of {0..n} via restricted growth strings.
    fn all_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
        fn rec(
            i: usize,
            n: usize,
            rgs: &mut Vec<usize>,
            max: usize,
            out: &mut Vec<Vec<Vec<usize>>>,
        ) {
            if i == n {
                let mut cells = vec![Vec::new(); max + 1];
                for (v, &c) in rgs.iter().enumerate() {
                    cells[c].push(v);
                }
                out.push(cells);
                return;
            }
            for c in 0..=max + 1 {
                rgs.push(c);
                rec(i + 1, n, rgs, max.max(c), out);
                rgs.pop();
            }
        }
        let mut out = Vec::new();
        let mut rgs = vec![0];
        rec(1, n, &mut rgs, 0, &mut out);
        out
    }

    /// Brute-force coarsest equitable partition: fewest cells among all
    /// equitable partitions.
    fn brute_coarsest(g: &Graph) -> Vec<Vec<usize>> {
        let mut best: Option<Vec<Vec<usize>>> = None;
        for cells in all_partitions(g.node_count()) {
            if verify_equitable(g, &cells).is_ok()
                && best.as_ref().is_none_or(|b| cells.len() < b.len())
            {
                best = Some(cells);
            }
        }
        best.unwrap()
    }

    #[test]
    fn bell_numbers() {
        assert_eq!(all_partitions(3).len(), 5);
        assert_eq!(all_partitions(5).len(), 52);
    }

    #[test]
    fn complete_single_cell() {
        let g = Graph::complete(50).unwrap();
        let p = verify_equitable(&g, &[(0..50).collect()]).unwrap();
        assert_eq!(p.degree_matrix(), &[vec![49]]);
    }

    #[test]
    fn regular_single_cell() {
        let g = Graph::circulant_regular(50, 10).unwrap();
        let p = verify_equitable(&g, &[(0..50).collect()]).unwrap();
        assert_eq!(p.internal_degrees(), vec![10]);
        assert_eq!(coarsest_equitable_partition(&g).cell_count(), 1);
    }

    #[test]
    fn star_degree_matrix() {
        let p = verify_equitable(&star(), &[vec![0], vec![1, 2, 3]]).unwrap();
        assert_eq!(p.degree_matrix(), &[vec![0, 3], vec![1, 0]]);
        // edge-count symmetry d_ij k_i = d_ji k_j
        let d = p.degree_matrix();
        let k = p.cell_sizes();
        assert_eq!(d[0][1] * k[0], d[1][0] * k[1]);
    }

    #[test]
    fn witness_on_failure() {
        let err = verify_equitable(&path(3), &[vec![0, 1, 2]]).unwrap_err();
        assert_eq!(
            err,
            Error::NotEquitable {
                cell: 0,
                u: 0,
                v: 1,
                target: 0,
                count_u: 1,
                count_v: 2
            }
        );
    }

    #[test]
    fn malformed_cells() {
        let g = path(3);
        assert!(matches!(
            verify_equitable(&g, &[vec![0, 1]]),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            verify_equitable(&g, &[vec![0, 1], vec![1, 2]]),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            verify_equitable(&g, &[vec![0, 1, 2], vec![]]),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            verify_equitable(&g, &[vec![0, 1, 5]]),
            Err(Error::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn detector_on_star_and_path() {
        let p = coarsest_equitable_partition(&star());
        assert_eq!(p.cells(), &[vec![0], vec![1, 2, 3]]);
        let p = coarsest_equitable_partition(&path(3));
        // cells ordered by smallest node id
        assert_eq!(p.cells(), &[vec![0, 2], vec![1]]);
        assert_eq!(brute_coarsest(&path(3)).len(), 2);
    }

    #[test]
    fn detector_matches_brute_force() {
        let graphs = vec![
            path(3),
            path(4),
            path(5),
            path(6),
            star(),
            Graph::circulant_regular(6, 2).unwrap(),
            Graph::from_edges(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap(), // K_{2,3}
            Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap(),                 // paw
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (0, 3), (1, 4), (2, 5)]).unwrap(), // net
        ];
        for g in &graphs {
            let ours = coarsest_equitable_partition(g);
            let brute = brute_coarsest(g);
            assert_eq!(ours.cell_count(), brute.len());
            let mut a: Vec<_> = ours.cells().to_vec();
            let mut b = brute.clone();
            a.sort();
            b.iter_mut().for_each(|c| c.sort());
            b.sort();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn no_merge_stays_equitable() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (0, 3), (1, 4), (2, 5), (3, 4)])
            .unwrap();
        let p = coarsest_equitable_partition(&g);
        let cells = p.cells();
        for a in 0..cells.len() {
            for b in (a + 1)..cells.len() {
                let mut merged: Vec<Vec<usize>> = Vec::new();
                let mut joint = cells[a].clone();
                joint.extend(&cells[b]);
                merged.push(joint);
                merged.extend(
                    cells
                        .iter()
                        .enumerate()
                        .filter(|&(h, _)| h != a && h != b)
                        .map(|(_, c)| c.clone()),
                );
                assert!(verify_equitable(&g, &merged).is_err());
            }
        }
    }

    #[test]
    fn quotient_entries() {
        let g = Graph::circulant_regular(50, 10).unwrap();
        let q = quotient_matrix(&coarsest_equitable_partition(&g), 1.0, 0.5).unwrap();
        assert_eq!(q.rows(), vec![vec![10.0]]);

        let p = verify_equitable(&star(), &[vec![0], vec![1, 2, 3]]).unwrap();
        let q = quotient_matrix(&p, 1.0, 0.5).unwrap();
        assert_eq!(q.rows(), vec![vec![0.0, 1.5], vec![0.5, 0.0]]);

        let q = quotient_matrix(&p, 2.0, 1e-300).unwrap();
        assert_eq!(q.get(0, 0), 0.0);
        assert!(q.get(0, 1) < 1e-290);
        assert!(quotient_matrix(&p, 0.0, 0.5).is_err());
        assert!(quotient_matrix(&p, 1.0, 0.0).is_err());
    }

    #[test]
    fn quotient_radius_equals_weighted_radius() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (0, 3), (1, 4), (2, 5)]).unwrap();
        let p = coarsest_equitable_partition(&g);
        for eps in [0.1, 0.5, 1.0, 2.5] {
            let beta = 0.3;
            let q = quotient_matrix(&p, beta, eps).unwrap();
            let w = apply_epsilon_weights(&g, &p, eps).unwrap().scaled(beta);
            let a = spectral_radius(&q, 1e-12).unwrap().lambda1;
            let b = spectral_radius(&w, 1e-12).unwrap().lambda1;
            assert!((a - b).abs() < 1e-10, "eps {eps}: {a} vs {b}");
        }
    }

    #[test]
    fn partition_file_parsing() {
        let cells = parse_partition("# two cells\n1 3\n2\n").unwrap();
        assert_eq!(cells, vec![vec![0, 2], vec![1]]);
        assert!(parse_partition("1 x\n").is_err());
        assert!(parse_partition("0 1\n").is_err());
    }

    fn random_graph() -> impl Strategy<Value = Graph> {
        (3usize..10).prop_flat_map(|n| {
            let parents = proptest::collection::vec(any::<usize>(), n - 1);
            let extra = proptest::collection::vec((0..n, 0..n), 0..2 * n);
            (parents, extra).prop_map(move |(parents, extra)| {
                let mut edges: Vec<(usize, usize)> = parents
                    .iter()
                    .enumerate()
                    .map(|(k, r)| (k + 1, r % (k + 1)))
                    .collect();
                edges.extend(extra.into_iter().filter(|(u, v)| u != v));
                Graph::from_edges(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn detector_output_is_equitable_and_idempotent(g in random_graph()) {
            let p = coarsest_equitable_partition(&g);
            prop_assert!(verify_equitable(&g, p.cells()).is_ok());
            let again = refine_from(&g, p.cells()).unwrap();
            prop_assert_eq!(&again, &p);
            let total: usize = p.cell_sizes().iter().sum();
            prop_assert_eq!(total, g.node_count());
            let d = p.degree_matrix();
            let k = p.cell_sizes();
            for i in 0..p.cell_count() {
                for j in 0..p.cell_count() {
                    prop_assert_eq!(d[i][j] * k[i], d[j][i] * k[j]);
                }
            }
        }

        #[test]
        fn splitting_a_cell_refines(g in random_graph(), pick in any::<usize>()) {
            let p = coarsest_equitable_partition(&g);
            let cells = p.cells();
            let h = pick % cells.len();
            prop_assume!(cells[h].len() > 1);
            let mut split: Vec<Vec<usize>> = cells.to_vec();
            let moved = split[h].pop().unwrap();
            split.push(vec![moved]);
            let finer = refine_from(&g, &split).unwrap();
            prop_assert!(finer.cell_count() > p.cell_count());
            // every finer cell sits inside one coarse cell
            for c in finer.cells() {
                let owner = p.cell_of(c[0]);
                prop_assert!(c.iter().all(|&v| p.cell_of(v) == owner));
            }
        }
    }
}
