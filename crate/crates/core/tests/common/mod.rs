//! Small graphs shared by the integration tests.

#![allow(dead_code)]

use netsirs_core::Graph;

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

pub fn ring(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

pub fn star(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

/// Triangle with a pendant node.
pub fn paw() -> Graph {
    Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap()
}

/// Every connected test graph with 2 to `max_n` nodes used by the
/// exact-chain checks, with a label.
pub fn small_graphs(max_n: usize) -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        out.push((format!("path{n}"), path(n)));
        out.push((format!("complete{n}"), Graph::complete(n).unwrap()));
        if n >= 4 {
            out.push((format!("star{n}"), star(n)));
            out.push((format!("ring{n}"), ring(n)));
        }
    }
    if max_n >= 4 {
        out.push(("paw".into(), paw()));
    }
    out
}

pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| t_max * k as f64 / (points - 1) as f64)
        .collect()
}
