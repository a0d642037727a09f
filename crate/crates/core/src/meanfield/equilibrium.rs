//! Equilibria of the mean-field system and the sufficient global-stability
//! condition on `λ₁`.
//!
//! The endemic point solves, with pressure `x_i = β Σ_j w_ij I_j`,
//!
//! ```text
//! S_i = γ / (x_i (1 + γ/δ) + γ + σ),   I_i = x_i S_i / δ,   R_i = 1 - S_i - I_i
//! ```
//!
//! and is found by damped iteration of the `I` map from a small uniform
//! guess. The map is increasing and concave, so above threshold the
//! iteration climbs to the unique positive fixed point.

use super::rhs::sirs_flat;
use super::state::MeanFieldState;
use super::threshold::{threshold_report, Regime};
use crate::error::{Error, Result};
use crate::graph::{spectral_radius, NonNegativeOperator, WeightedAdjacency};
use crate::params::EpidemicParams;
use crate::partitions::QuotientMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    DiseaseFree,
    Endemic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    pub kind: EquilibriumKind,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    /// `||f(S*, I*, R*)||_inf`.
    pub residual: f64,
    pub iterations: usize,
}

impl EquilibriumPoint {
    pub fn disease_free(n: usize, p: &EpidemicParams) -> Self {
        let x = MeanFieldState::disease_free(n, p);
        Self {
            kind: EquilibriumKind::DiseaseFree,
            s: x.s,
            i: x.i,
            r: x.r,
            residual: 0.0,
            iterations: 0,
        }
    }

    pub fn state(&self) -> MeanFieldState {
        MeanFieldState {
            s: self.s.clone(),
            i: self.i.clone(),
            r: self.r.clone(),
        }
    }

    pub fn mean_infected(&self) -> f64 {
        self.i.iter().sum::<f64>() / self.i.len() as f64
    }

    /// `key=value` lines.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let kind = match self.kind {
            EquilibriumKind::DiseaseFree => "disease_free",
            EquilibriumKind::Endemic => "endemic",
        };
        vec![
            ("kind".into(), kind.into()),
            (
                "mean_S".into(),
                (self.s.iter().sum::<f64>() / self.s.len() as f64).to_string(),
            ),
            ("mean_I".into(), self.mean_infected().to_string()),
            (
                "mean_R".into(),
                (self.r.iter().sum::<f64>() / self.r.len() as f64).to_string(),
            ),
            ("residual".into(), format!("{:e}", self.residual)),
            ("iterations".into(), self.iterations.to_string()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions {
    /// Stop when the largest update of `I` falls below this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Initial damping `ω` in `I <- (1-ω) I + ω map(I)`.
    pub omega: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iterations: 1_000_000,
            omega: 0.5,
        }
    }
}

pub fn endemic_equilibrium(
    w: &WeightedAdjacency,
    p: &EpidemicParams,
    tol: f64,
) -> Result<EquilibriumPoint> {
    endemic_equilibrium_with(
        w,
        p.beta,
        p,
        EquilibriumOptions {
            tol,
            ..EquilibriumOptions::default()
        },
    )
}

/// Per-cell equilibrium; the quotient matrix already carries `β`.
pub fn endemic_equilibrium_quotient(
    q: &QuotientMatrix,
    p: &EpidemicParams,
    tol: f64,
) -> Result<EquilibriumPoint> {
    endemic_equilibrium_with(
        q,
        1.0,
        p,
        EquilibriumOptions {
            tol,
            ..EquilibriumOptions::default()
        },
    )
}

/// Endemic point for infection pressure `scale * M I`.
pub fn endemic_equilibrium_with<M: NonNegativeOperator + ?Sized>(
    m: &M,
    scale: f64,
    p: &EpidemicParams,
    opts: EquilibriumOptions,
) -> Result<EquilibriumPoint> {
    p.validate()?;
    if !(opts.tol > 0.0) || !(opts.omega > 0.0 && opts.omega <= 1.0) {
        return Err(Error::InvalidParams(
            "tolerance must be > 0 and damping in (0, 1]".into(),
        ));
    }
    // threshold of the operator scale * M against beta
    let lambda1 = spectral_radius(m, 1e-13)?.lambda1 * scale / p.beta;
    let report = threshold_report(p, lambda1)?;
    if report.regime == Regime::Extinction {
        return Err(Error::BelowThreshold {
            tau: report.tau,
            tau_c: report.tau_c,
        });
    }

    let n = m.dim();
    let guess = (1.0 - p.dfe_recovered()).min(0.5) * 0.1;
    let mut infected = vec![guess; n];
    let mut pressure = vec![0.0; n];
    let mut omega = opts.omega;
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    loop {
        iterations += 1;
        m.apply(&infected, &mut pressure);
        let mut update: f64 = 0.0;
        for k in 0..n {
            let x = scale * pressure[k];
            let target = x * susceptible_at(x, p) / p.delta;
            let next = (1.0 - omega) * infected[k] + omega * target;
            update = update.max((next - infected[k]).abs());
            infected[k] = next;
        }
        if update < opts.tol {
            break;
        }
        if update > last_update {
            omega = (omega * 0.5).max(1.0 / 1024.0);
        }
        last_update = update;
        if iterations >= opts.max_iterations {
            return Err(Error::NotConverged {
                what: "endemic fixed-point iteration",
                iterations,
                residual: update,
            });
        }
    }

    m.apply(&infected, &mut pressure);
    let mut s = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    for k in 0..n {
        let sk = susceptible_at(scale * pressure[k], p);
        s.push(sk);
        r.push(1.0 - sk - infected[k]);
    }
    let mut y = s.clone();
    y.extend_from_slice(&infected);
    y.extend_from_slice(&r);
    let mut dy = vec![0.0; 3 * n];
    sirs_flat(m, scale, p, &y, &mut dy);
    let residual = dy.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if residual > 10.0 * opts.tol {
        return Err(Error::NotConverged {
            what: "endemic equilibrium residual",
            iterations,
            residual,
        });
    }
    if infected.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotConverged {
            what: "endemic equilibrium positivity",
            iterations,
            residual,
        });
    }
    Ok(EquilibriumPoint {
        kind: EquilibriumKind::Endemic,
        s,
        i: infected,
        r,
        residual,
        iterations,
    })
}

fn susceptible_at(x: f64, p: &EpidemicParams) -> f64 {
    p.gamma / (x * (1.0 + p.gamma / p.delta) + p.gamma + p.sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalConditionBranch {
    /// `δ > σ`: the spectral inequality decides.
    A,
    /// `δ = σ`: global stability holds without further checks.
    B,
    /// `δ < σ`: neither sufficient condition covers the parameters.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalConditionReport {
    pub branch: GlobalConditionBranch,
    /// `λ₁`.
    pub lhs: f64,
    /// `(1/β) min_i{δ I_i / S_i²} min_i{S_i / (1 - S_i)}`.
    pub rhs: f64,
    /// Whether the applicable sufficient condition is met.
    pub holds: bool,
}

pub fn check_global_condition_a(
    eq: &EquilibriumPoint,
    p: &EpidemicParams,
    lambda1: f64,
) -> Result<GlobalConditionReport> {
    if eq.kind != EquilibriumKind::Endemic {
        return Err(Error::InvalidConfiguration(
            "global condition needs the endemic equilibrium".into(),
        ));
    }
    let first =
        eq.i.iter()
            .zip(&eq.s)
            .map(|(&i, &s)| p.delta * i / (s * s))
            .fold(f64::INFINITY, f64::min);
    let second =
        eq.s.iter()
            .map(|&s| s / (1.0 - s))
            .fold(f64::INFINITY, f64::min);
    let rhs = first * second / p.beta;
    let (branch, holds) = if p.delta > p.sigma {
        (GlobalConditionBranch::A, lambda1 < rhs)
    } else if p.delta == p.sigma {
        (GlobalConditionBranch::B, true)
    } else {
        (GlobalConditionBranch::NotApplicable, false)
    };
    Ok(GlobalConditionReport {
        branch,
        lhs: lambda1,
        rhs,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::meanfield::rhs_full;

    #[test]
    fn regular_closed_form() {
        let g = Graph::circulant_regular(20, 10).unwrap();
        let p = EpidemicParams::new(1.0, 0.4, 0.2, 0.45).unwrap();
        let eq = endemic_equilibrium(&WeightedAdjacency::unweighted(&g), &p, 1e-13).unwrap();
        for k in 0..20 {
            assert!((eq.s[k] - 0.04).abs() < 1e-10);
            assert!((eq.i[k] - 0.29).abs() < 1e-10);
            assert!((eq.r[k] - 0.67).abs() < 1e-10);
        }
        assert!(eq.residual <= 1e-12);
    }

    #[test]
    fn no_vaccination_ratio() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)]).unwrap();
        let p = EpidemicParams::new(0.6, 0.4, 0.2, 0.0).unwrap();
        let eq = endemic_equilibrium(&WeightedAdjacency::unweighted(&g), &p, 1e-13).unwrap();
        for k in 0..5 {
            assert!((eq.r[k] - p.delta / p.gamma * eq.i[k]).abs() < 1e-9);
        }
        // heterogeneous graph: the residual check is a real fixed-point test
        let d = rhs_full(&eq.state(), &WeightedAdjacency::unweighted(&g), &p);
        assert!(d
            .di
            .iter()
            .chain(&d.dr)
            .chain(&d.ds)
            .all(|v| v.abs() < 1e-11));
    }

    #[test]
    fn below_threshold_is_refused() {
        let g = Graph::circulant_regular(50, 10).unwrap();
        let p = EpidemicParams::new(0.1, 0.4, 0.2, 0.45).unwrap();
        assert!(matches!(
            endemic_equilibrium(&WeightedAdjacency::unweighted(&g), &p, 1e-12),
            Err(Error::BelowThreshold { .. })
        ));
    }

    #[test]
    fn condition_a_branches() {
        let g = Graph::complete(50).unwrap();
        let w = WeightedAdjacency::unweighted(&g);
        let p = EpidemicParams::new(0.25, 0.4, 0.2, 0.45).unwrap();
        let eq = endemic_equilibrium(&w, &p, 1e-12).unwrap();
        let rep = check_global_condition_a(&eq, &p, 49.0).unwrap();
        assert_eq!(rep.branch, GlobalConditionBranch::NotApplicable);
        let p = EpidemicParams::new(0.25, 0.4, 0.2, 0.4).unwrap();
        let eq = endemic_equilibrium(&w, &p, 1e-12).unwrap();
        let rep = check_global_condition_a(&eq, &p, 49.0).unwrap();
        assert_eq!(rep.branch, GlobalConditionBranch::B);
        assert!(rep.holds);
        let p = EpidemicParams::new(0.25, 0.4, 0.2, 0.1).unwrap();
        let eq = endemic_equilibrium(&w, &p, 1e-12).unwrap();
        let rep = check_global_condition_a(&eq, &p, 49.0).unwrap();
        assert_eq!(rep.branch, GlobalConditionBranch::A);
        assert!(!rep.holds && rep.rhs < rep.lhs);
        assert!(check_global_condition_a(&EquilibriumPoint::disease_free(3, &p), &p, 2.0).is_err());
    }
}
