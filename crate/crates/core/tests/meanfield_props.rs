//! Mean-field properties that need whole trajectories: quotient
//! equivalence, invariance of cell-equal states and of the simplex region,
//! Lyapunov decrease and decay below threshold.

mod common;

use netsirs_core::exact::{
    build_generator, marginal_infection_probabilities, point_mass, solve_master_equation,
    NetworkConfiguration,
};
use netsirs_core::graph::{apply_epsilon_weights, spectral_radius};
use netsirs_core::meanfield::{
    endemic_equilibrium, endemic_equilibrium_quotient, integrate, lyapunov_derivative_closed_form,
    lyapunov_v, regular_equilibrium, threshold_report, IntegrationOptions, MeanFieldState,
    MeanFieldSystem, Regime,
};
use netsirs_core::partitions::{
    coarsest_equitable_partition, quotient_matrix, verify_equitable, EquitablePartition,
};
use netsirs_core::{EpidemicParams, Graph, WeightedAdjacency};
use proptest::prelude::*;

use common::{small_graphs, uniform_grid};

fn parity_partition(g: &Graph) -> EquitablePartition {
    let n = g.node_count();
    let cells = vec![(0..n).step_by(2).collect(), (1..n).step_by(2).collect()];
    verify_equitable(g, &cells).unwrap()
}

/// Largest gap between a full trajectory and its lifted quotient, and the
/// largest within-cell spread of I.
fn quotient_gaps(
    g: &Graph,
    part: &EquitablePartition,
    p: &EpidemicParams,
    cell_start: [&[f64]; 3],
) -> (f64, f64) {
    let n = g.node_count();
    let w = apply_epsilon_weights(g, part, p.epsilon).unwrap();
    let q = quotient_matrix(part, p.beta, p.epsilon).unwrap();
    let grid = uniform_grid(100.0, 201);
    let [s, i, r] = cell_start;
    let full0 = MeanFieldState::new(part.lift(s), part.lift(i), part.lift(r)).unwrap();
    let red0: Vec<f64> = [s, i, r].concat();
    let full = integrate(
        &MeanFieldSystem::Full {
            adjacency: &w,
            params: *p,
        },
        &full0.to_flat(),
        &grid,
        Default::default(),
    )
    .unwrap();
    let red = integrate(
        &MeanFieldSystem::Quotient {
            quotient: &q,
            params: *p,
        },
        &red0,
        &grid,
        Default::default(),
    )
    .unwrap();
    let k = part.cell_count();
    let (mut gap, mut spread) = (0.0f64, 0.0f64);
    for (yf, yr) in full.states.iter().zip(&red.states) {
        for comp in 0..3 {
            let lifted = part.lift(&yr[comp * k..(comp + 1) * k]);
            for v in 0..n {
                gap = gap.max((yf[comp * n + v] - lifted[v]).abs());
            }
        }
        for cell in part.cells() {
            let vals = cell.iter().map(|&v| yf[n + v]);
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
                (a.min(x), b.max(x))
            });
            spread = spread.max(hi - lo);
        }
    }
    (gap, spread)
}

#[test]
fn full_and_quotient_agree_on_parity_cells_with_epsilon() {
    let g = Graph::circulant_regular(50, 10).unwrap();
    let part = parity_partition(&g);
    let p = EpidemicParams::with_epsilon(0.25, 0.4, 0.2, 0.3, 0.6).unwrap();
    let (gap, spread) = quotient_gaps(&g, &part, &p, [&[0.9, 0.6], &[0.1, 0.05], &[0.0, 0.35]]);
    assert!(gap <= 1e-7, "trajectory gap {gap}");
    assert!(spread <= 1e-9, "cell spread {spread}");
}

#[test]
fn cell_equal_starts_stay_cell_equal_on_a_star() {
    let g = common::star(7);
    let part = coarsest_equitable_partition(&g);
    assert_eq!(part.cell_count(), 2);
    let p = EpidemicParams::with_epsilon(0.5, 0.4, 0.2, 0.1, 1.7).unwrap();
    let (gap, spread) = quotient_gaps(&g, &part, &p, [&[0.5, 0.8], &[0.5, 0.1], &[0.0, 0.1]]);
    assert!(gap <= 1e-7 && spread <= 1e-9, "{gap} {spread}");
}

#[test]
fn equilibria_from_both_routes_agree() {
    let g = Graph::circulant_regular(50, 10).unwrap();
    let part = parity_partition(&g);
    for eps in [0.6, 1.0, 1.4] {
        let p = EpidemicParams::with_epsilon(0.25, 0.4, 0.2, 0.3, eps).unwrap();
        let w = apply_epsilon_weights(&g, &part, eps).unwrap();
        let full = endemic_equilibrium(&w, &p, 1e-12).unwrap();
        let red =
            endemic_equilibrium_quotient(&quotient_matrix(&part, p.beta, eps).unwrap(), &p, 1e-12)
                .unwrap();
        let lifted = part.lift(&red.i);
        for (a, b) in full.i.iter().zip(&lifted) {
            assert!((a - b).abs() <= 1e-7);
        }
    }
}

#[test]
fn lyapunov_decreases_and_matches_finite_differences() {
    let g = Graph::circulant_regular(50, 10).unwrap();
    let d = 10.0;
    for (beta, sigma) in [(0.25, 0.3), (1.0, 0.1), (0.5, 0.0)] {
        let p = EpidemicParams::new(beta, 0.4, 0.2, sigma).unwrap();
        let eq = regular_equilibrium(d, &p).unwrap();
        assert_eq!(
            threshold_report(&p, spectral_radius(&g, 1e-12).unwrap().lambda1)
                .unwrap()
                .regime,
            Regime::Endemic
        );
        for (i0, r0) in [(0.01, 0.0), (0.6, 0.3), (0.2, 0.7)] {
            let grid = uniform_grid(60.0, 12001);
            let tr = integrate(
                &MeanFieldSystem::Regular2d {
                    degree: d,
                    params: p,
                },
                &[i0, r0],
                &grid,
                Default::default(),
            )
            .unwrap();
            let v: Vec<f64> = tr
                .states
                .iter()
                .map(|y| lyapunov_v(y[0], y[1], &eq, &p, d).unwrap())
                .collect();
            for k in 1..v.len() {
                assert!(v[k] <= v[k - 1] + 1e-12, "V rose at t={}", grid[k]);
            }
            let h = grid[1];
            for k in (1..v.len() - 1).step_by(500) {
                let fd = (v[k + 1] - v[k - 1]) / (2.0 * h);
                let exact =
                    lyapunov_derivative_closed_form(tr.states[k][0], tr.states[k][1], &eq, &p)
                        .unwrap();
                assert!(
                    (fd - exact).abs() <= 1e-4 * exact.abs().max(1e-3),
                    "{fd} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn below_threshold_decays_to_disease_free() {
    let g = Graph::complete(50).unwrap();
    let w = WeightedAdjacency::unweighted(&g);
    let p = EpidemicParams::new(0.005, 0.4, 0.2, 0.3).unwrap();
    assert_eq!(
        threshold_report(&p, 49.0).unwrap().regime,
        Regime::Extinction
    );
    let dfe = MeanFieldState::disease_free(50, &p).to_flat();
    let mut x0 = MeanFieldState::uniform(50, 0.5, 0.3, 0.2);
    x0.i[0] = 0.8;
    x0.s[0] = 0.0;
    let grid = uniform_grid(200.0, 401);
    let tr = integrate(
        &MeanFieldSystem::Full {
            adjacency: &w,
            params: p,
        },
        &x0.to_flat(),
        &grid,
        Default::default(),
    )
    .unwrap();
    let dist: Vec<f64> = tr
        .states
        .iter()
        .map(|y| {
            y.iter()
                .zip(&dfe)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .collect();
    assert!(*dist.last().unwrap() < 1e-6);
    let from = dist.iter().position(|&d| d < 0.1).unwrap();
    assert!(dist[from..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

fn ir_start(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), n).prop_map(|v| {
        let (mut i, mut r) = (Vec::new(), Vec::new());
        for (a, b, c) in v {
            let s = a + b + c + 1e-9;
            i.push(b / s);
            r.push(c / s);
        }
        i.extend(r);
        i
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn trajectories_stay_in_the_region(
        graph in 0usize..8,
        y0 in ir_start(5),
        beta in 0.05f64..2.0,
        sigma in 0.0f64..1.0,
    ) {
        let graphs: Vec<_> = small_graphs(5).into_iter().filter(|(_, g)| g.node_count() == 5).collect();
        let g = &graphs[graph % graphs.len()].1;
        let w = WeightedAdjacency::unweighted(g);
        let p = EpidemicParams::new(beta, 0.4, 0.2, sigma).unwrap();
        let grid = uniform_grid(50.0, 51);
        let tr = integrate(&MeanFieldSystem::Reduced { adjacency: &w, params: p }, &y0, &grid, IntegrationOptions::default()).unwrap();
        prop_assert!(tr.diagnostics.max_region_violation <= 1e-7);
        for y in &tr.states {
            for v in 0..5 {
                prop_assert!(y[v] >= -1e-7 && y[5 + v] >= -1e-7 && y[v] + y[5 + v] <= 1.0 + 1e-7);
            }
        }
    }
}

/// Mean-field I_i(t) against the exact marginal on small graphs. The
/// inequality is conjectured, so violations are printed, not asserted.
#[test]
fn correlation_inequality_is_reported() {
    let grid = uniform_grid(10.0, 21);
    let (mut checks, mut violations, mut worst) = (0, 0, 0.0f64);
    for (_, g) in small_graphs(5) {
        let n = g.node_count();
        let w = WeightedAdjacency::unweighted(&g);
        for p in [
            EpidemicParams::new(0.3, 0.4, 0.2, 0.0).unwrap(),
            EpidemicParams::new(0.3, 0.4, 0.2, 0.45).unwrap(),
        ] {
            let q = build_generator(&g, &p).unwrap();
            let x0 = NetworkConfiguration::one_infected(n, 0).unwrap();
            let vs = solve_master_equation(&q, &point_mass(q.dim(), x0.index().unwrap()), &grid)
                .unwrap();
            let mut y0 = vec![0.0; 2 * n];
            y0[0] = 1.0;
            let tr = integrate(
                &MeanFieldSystem::Reduced {
                    adjacency: &w,
                    params: p,
                },
                &y0,
                &grid,
                Default::default(),
            )
            .unwrap();
            for (v, y) in vs.iter().zip(&tr.states) {
                for (k, m) in marginal_infection_probabilities(v, n).iter().enumerate() {
                    checks += 1;
                    if y[k] < m - 1e-9 {
                        violations += 1;
                        worst = worst.max(m - y[k]);
                    }
                }
            }
        }
    }
    println!(
        "correlation inequality: {violations} of {checks} checks violated, worst gap {worst:e}"
    );
}
