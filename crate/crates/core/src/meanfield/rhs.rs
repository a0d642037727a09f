use super::state::MeanFieldState;
use crate::graph::{NonNegativeOperator, WeightedAdjacency};
use crate::params::EpidemicParams;
use crate::partitions::QuotientMatrix;

/// Time derivative of a [`MeanFieldState`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDerivative {
    pub ds: Vec<f64>,
    pub di: Vec<f64>,
    pub dr: Vec<f64>,
}

/// Writes `[dS.., dI.., dR..]` for the flat state `[S.., I.., R..]` with
/// infection pressure `scale * M I`.
pub(crate) fn sirs_flat<M: NonNegativeOperator + ?Sized>(
    m: &M,
    scale: f64,
    p: &EpidemicParams,
    y: &[f64],
    dy: &mut [f64],
) {
    let n = m.dim();
    let (s, rest) = y.split_at(n);
    let (i, r) = rest.split_at(n);
    let (ds, rest) = dy.split_at_mut(n);
    let (di, dr) = rest.split_at_mut(n);
    // dI holds M I until overwritten below
    m.apply(i, di);
    for k in 0..n {
        let flow = s[k] * scale * di[k];
        let recover = p.delta * i[k];
        let lose = p.gamma * r[k];
        let vaccinate = p.sigma * s[k];
        ds[k] = -flow + lose - vaccinate;
        di[k] = flow - recover;
        dr[k] = recover - lose + vaccinate;
    }
}

/// `[dI.., dR..]` on the slice `S = 1 - I - R`.
pub(crate) fn ir_flat<M: NonNegativeOperator + ?Sized>(
    m: &M,
    scale: f64,
    p: &EpidemicParams,
    y: &[f64],
    dy: &mut [f64],
) {
    let n = m.dim();
    let (i, r) = y.split_at(n);
    let (di, dr) = dy.split_at_mut(n);
    m.apply(i, di);
    for k in 0..n {
        di[k] = (1.0 - i[k] - r[k]) * scale * di[k] - p.delta * i[k];
        dr[k] = (p.delta - p.sigma) * i[k] - (p.gamma + p.sigma) * r[k] + p.sigma;
    }
}

fn split3(dy: Vec<f64>, n: usize) -> FieldDerivative {
    FieldDerivative {
        ds: dy[..n].to_vec(),
        di: dy[n..2 * n].to_vec(),
        dr: dy[2 * n..].to_vec(),
    }
}

pub fn rhs_full(
    state: &MeanFieldState,
    w: &WeightedAdjacency,
    p: &EpidemicParams,
) -> FieldDerivative {
    let n = w.node_count();
    assert_eq!(state.len(), n, "state and adjacency sizes differ");
    let mut dy = vec![0.0; 3 * n];
    sirs_flat(w, p.beta, p, &state.to_flat(), &mut dy);
    split3(dy, n)
}

/// `(dI, dR)` with `S` eliminated.
pub fn rhs_reduced_ir(
    i: &[f64],
    r: &[f64],
    w: &WeightedAdjacency,
    p: &EpidemicParams,
) -> (Vec<f64>, Vec<f64>) {
    let n = w.node_count();
    assert!(
        i.len() == n && r.len() == n,
        "state and adjacency sizes differ"
    );
    let mut y = i.to_vec();
    y.extend_from_slice(r);
    let mut dy = vec![0.0; 2 * n];
    ir_flat(w, p.beta, p, &y, &mut dy);
    let dr = dy.split_off(n);
    (dy, dr)
}

/// Per-cell derivative; the quotient matrix already carries `β` and `ε`.
pub fn rhs_quotient(
    state: &MeanFieldState,
    q: &QuotientMatrix,
    p: &EpidemicParams,
) -> FieldDerivative {
    let n = q.dim();
    assert_eq!(state.len(), n, "state and quotient sizes differ");
    let mut dy = vec![0.0; 3 * n];
    sirs_flat(q, 1.0, p, &state.to_flat(), &mut dy);
    split3(dy, n)
}

/// Scalar `(dI, dR)` for a d-regular graph with every node equal.
pub fn rhs_regular2d(i: f64, r: f64, degree: f64, p: &EpidemicParams) -> (f64, f64) {
    let di = (1.0 - i - r) * p.beta * degree * i - p.delta * i;
    let dr = (p.delta - p.sigma) * i - (p.gamma + p.sigma) * r + p.sigma;
    (di, dr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::partitions::{coarsest_equitable_partition, quotient_matrix};
    use proptest::prelude::*;

    fn params() -> EpidemicParams {
        EpidemicParams::new(0.3, 0.4, 0.2, 0.45).unwrap()
    }

    #[test]
    fn disease_free_is_stationary() {
        let g = Graph::circulant_regular(10, 4).unwrap();
        let p = params();
        let d = rhs_full(
            &MeanFieldState::disease_free(10, &p),
            &WeightedAdjacency::unweighted(&g),
            &p,
        );
        for v in d.ds.iter().chain(&d.di).chain(&d.dr) {
            assert!(v.abs() < 1e-15);
        }
        let (di, dr) = rhs_reduced_ir(
            &[0.0; 10],
            &[p.dfe_recovered(); 10],
            &WeightedAdjacency::unweighted(&g),
            &p,
        );
        assert!(di.iter().chain(&dr).all(|v| v.abs() < 1e-15));
        let p0 = EpidemicParams::new(0.3, 0.4, 0.2, 0.0).unwrap();
        let (di, dr) = rhs_reduced_ir(
            &[0.0; 10],
            &[0.0; 10],
            &WeightedAdjacency::unweighted(&g),
            &p0,
        );
        assert!(di.iter().chain(&dr).all(|&v| v == 0.0));
    }

    #[test]
    fn isolated_node_only_vaccinates() {
        let g = Graph::from_edges_allow_disconnected(1, &[]).unwrap();
        let p = params();
        let d = rhs_full(
            &MeanFieldState::uniform(1, 1.0, 0.0, 0.0),
            &WeightedAdjacency::unweighted(&g),
            &p,
        );
        assert_eq!(d.dr[0], p.sigma);
        assert_eq!(d.ds[0], -p.sigma);
        assert_eq!(d.di[0], 0.0);
    }

    #[test]
    fn single_cell_quotient_is_regular2d() {
        let g = Graph::circulant_regular(12, 4).unwrap();
        let p = params();
        let part = coarsest_equitable_partition(&g);
        assert_eq!(part.cell_count(), 1);
        let q = quotient_matrix(&part, p.beta, 1.0).unwrap();
        let (i, r) = (0.23, 0.31);
        let d = rhs_quotient(&MeanFieldState::uniform(1, 1.0 - i - r, i, r), &q, &p);
        let (di, dr) = rhs_regular2d(i, r, 4.0, &p);
        assert!((d.di[0] - di).abs() < 1e-15);
        assert!((d.dr[0] - dr).abs() < 1e-15);
    }

    fn simplex_point(n: usize) -> impl Strategy<Value = MeanFieldState> {
        proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), n).prop_map(|v| {
            let (mut s, mut i, mut r) = (vec![], vec![], vec![]);
            for (a, b, c) in v {
                let t = a + b + c + 1e-12;
                s.push(a / t);
                i.push(b / t);
                r.push(1.0 - a / t - b / t);
            }
            MeanFieldState::new(s, i, r).unwrap()
        })
    }

    proptest! {
        #[test]
        fn derivative_conserves_mass(x in simplex_point(6), beta in 0.01f64..2.0, sigma in 0.0f64..1.0) {
            let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 3)]).unwrap();
            let p = EpidemicParams::new(beta, 0.4, 0.2, sigma).unwrap();
            let d = rhs_full(&x, &WeightedAdjacency::unweighted(&g), &p);
            for k in 0..6 {
                prop_assert!((d.ds[k] + d.di[k] + d.dr[k]).abs() < 1e-15);
            }
        }

        #[test]
        fn reduced_matches_full(x in simplex_point(5), beta in 0.01f64..2.0, sigma in 0.0f64..1.0) {
            let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
            let w = WeightedAdjacency::unweighted(&g);
            let p = EpidemicParams::new(beta, 0.4, 0.2, sigma).unwrap();
            // evaluate the full field at S = 1 - I - R exactly
            let y = MeanFieldState::from_ir(x.i.clone(), x.r.clone()).unwrap();
            let d = rhs_full(&y, &w, &p);
            let (di, dr) = rhs_reduced_ir(&x.i, &x.r, &w, &p);
            for k in 0..5 {
                prop_assert!((d.di[k] - di[k]).abs() <= 1e-12);
                prop_assert!((d.dr[k] - dr[k]).abs() <= 1e-12);
            }
        }
    }
}
