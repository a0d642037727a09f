use crate::error::{Error, Result};
use crate::params::EpidemicParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Extinction,
    Endemic,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Extinction => "extinction",
            Self::Endemic => "endemic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub lambda1: f64,
    /// `β/δ`.
    pub tau: f64,
    /// `(γ+σ)/γ · 1/λ₁`.
    pub tau_c: f64,
    /// `βγ/(δ(γ+σ))`, compared against `1/λ₁`.
    pub rho: f64,
    pub regime: Regime,
}

impl ThresholdReport {
    /// Fast-extinction condition `τ < 1/λ₁` of the exact chain.
    pub fn fast_extinction(&self) -> bool {
        self.tau < 1.0 / self.lambda1
    }
}

/// Endemic exactly when `τ > τ_c`; the boundary counts as extinction.
pub fn threshold_report(p: &EpidemicParams, lambda1: f64) -> Result<ThresholdReport> {
    p.validate()?;
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "spectral radius must be > 0, got {lambda1}"
        )));
    }
    let tau = p.tau();
    let tau_c = (p.gamma + p.sigma) / p.gamma / lambda1;
    let rho = p.beta * p.gamma / (p.delta * (p.gamma + p.sigma));
    let regime = if tau > tau_c {
        Regime::Endemic
    } else {
        Regime::Extinction
    };
    Ok(ThresholdReport {
        lambda1,
        tau,
        tau_c,
        rho,
        regime,
    })
}
