//! Volterra-type Lyapunov function for the two-variable regular-graph
//! system,
//!
//! ```text
//! V(I, R) = c (I - I* - I* ln(I/I*)) + (R - R*)² / 2,   c = (δ - σ)/(β d)
//! ```
//!
//! whose derivative along solutions is
//! `-(δ-σ)(I-I*)² - (γ+σ)(R-R*)²`.

use super::equilibrium::{EquilibriumKind, EquilibriumPoint};
use super::rhs::rhs_regular2d;
use crate::error::{Error, Result};
use crate::params::EpidemicParams;

/// Closed-form endemic point of a d-regular graph: `S* = δ/(βd)`,
/// `I* = (γ - S*(γ+σ))/(γ+δ)`, as a one-entry [`EquilibriumPoint`].
pub fn regular_equilibrium(degree: f64, p: &EpidemicParams) -> Result<EquilibriumPoint> {
    let s = p.delta / (p.beta * degree);
    let i = (p.gamma - s * (p.gamma + p.sigma)) / (p.gamma + p.delta);
    if !(i > 0.0) {
        return Err(Error::BelowThreshold {
            tau: p.tau(),
            tau_c: (p.gamma + p.sigma) / p.gamma / degree,
        });
    }
    let r = 1.0 - s - i;
    let (di, dr) = rhs_regular2d(i, r, degree, p);
    Ok(EquilibriumPoint {
        kind: EquilibriumKind::Endemic,
        s: vec![s],
        i: vec![i],
        r: vec![r],
        residual: di.abs().max(dr.abs()),
        iterations: 0,
    })
}

fn star(eq: &EquilibriumPoint, p: &EpidemicParams, i: f64) -> Result<(f64, f64)> {
    if !(p.delta > p.sigma) {
        return Err(Error::InvalidParams(format!(
            "the Lyapunov weight needs delta > sigma, got {} <= {}",
            p.delta, p.sigma
        )));
    }
    if !(i > 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "V is defined for I > 0, got {i}"
        )));
    }
    if eq.kind != EquilibriumKind::Endemic || eq.i.is_empty() {
        return Err(Error::InvalidConfiguration(
            "V is centred at the endemic equilibrium".into(),
        ));
    }
    Ok((eq.i[0], eq.r[0]))
}

pub fn lyapunov_v(
    i: f64,
    r: f64,
    eq: &EquilibriumPoint,
    p: &EpidemicParams,
    degree: f64,
) -> Result<f64> {
    let (is, rs) = star(eq, p, i)?;
    let c = (p.delta - p.sigma) / (p.beta * degree);
    Ok(c * (i - is - is * (i / is).ln()) + 0.5 * (r - rs).powi(2))
}

/// `dV/dt` by the chain rule through the vector field.
pub fn lyapunov_derivative(
    i: f64,
    r: f64,
    eq: &EquilibriumPoint,
    p: &EpidemicParams,
    degree: f64,
) -> Result<f64> {
    let (is, rs) = star(eq, p, i)?;
    let c = (p.delta - p.sigma) / (p.beta * degree);
    let (di, dr) = rhs_regular2d(i, r, degree, p);
    Ok(c * (1.0 - is / i) * di + (r - rs) * dr)
}

/// `-(δ-σ)(I-I*)² - (γ+σ)(R-R*)²`.
pub fn lyapunov_derivative_closed_form(
    i: f64,
    r: f64,
    eq: &EquilibriumPoint,
    p: &EpidemicParams,
) -> Result<f64> {
    let (is, rs) = star(eq, p, i)?;
    Ok(-(p.delta - p.sigma) * (i - is).powi(2) - (p.gamma + p.sigma) * (r - rs).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (EpidemicParams, EquilibriumPoint) {
        let p = EpidemicParams::new(0.25, 0.4, 0.2, 0.3).unwrap();
        let eq = regular_equilibrium(10.0, &p).unwrap();
        (p, eq)
    }

    #[test]
    fn zero_at_equilibrium_positive_elsewhere() {
        let (p, eq) = setup();
        assert!(lyapunov_v(eq.i[0], eq.r[0], &eq, &p, 10.0).unwrap().abs() < 1e-15);
        for (i, r) in [(0.01, 0.0), (0.5, 0.1), (0.2, 0.7), (eq.i[0], 0.0)] {
            assert!(lyapunov_v(i, r, &eq, &p, 10.0).unwrap() > 0.0);
        }
        assert!(eq.residual < 1e-15);
    }

    #[test]
    fn chain_rule_matches_closed_form() {
        let (p, eq) = setup();
        for (i, r) in [(0.01, 0.0), (0.5, 0.1), (0.2, 0.7), (0.3, 0.3)] {
            let a = lyapunov_derivative(i, r, &eq, &p, 10.0).unwrap();
            let b = lyapunov_derivative_closed_form(i, r, &eq, &p).unwrap();
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn domain_errors() {
        let (p, eq) = setup();
        assert!(lyapunov_v(0.0, 0.1, &eq, &p, 10.0).is_err());
        let q = EpidemicParams::new(0.25, 0.3, 0.2, 0.3).unwrap();
        assert!(lyapunov_v(0.1, 0.1, &eq, &q, 10.0).is_err());
        assert!(
            regular_equilibrium(10.0, &EpidemicParams::new(0.01, 0.4, 0.2, 0.45).unwrap()).is_err()
        );
    }
}
