//! Epidemic rate parameters.

use crate::error::{Error, Result};

/// Rates of the SIRS process with vaccination, all per unit time.
///
/// `beta` is the per-edge infection rate, `delta` the recovery rate,
/// `gamma` the immunity-loss rate, `sigma` the vaccination rate and
/// `epsilon` the dimensionless weight on inter-community edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicParams {
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

impl EpidemicParams {
    pub fn new(beta: f64, delta: f64, gamma: f64, sigma: f64) -> Result<Self> {
        Self::with_epsilon(beta, delta, gamma, sigma, 1.0)
    }

    pub fn with_epsilon(
        beta: f64,
        delta: f64,
        gamma: f64,
        sigma: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let p = Self {
            beta,
            delta,
            gamma,
            sigma,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta", self.beta),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Effective infection rate beta / delta.
    pub fn tau(&self) -> f64 {
        self.beta / self.delta
    }

    /// Per-node probability of R at the disease-free equilibrium.
    pub fn dfe_recovered(&self) -> f64 {
        self.sigma / (self.gamma + self.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_rates() {
        assert!(EpidemicParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(EpidemicParams::new(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(EpidemicParams::new(1.0, 1.0, 1.0, -0.1).is_err());
        assert!(EpidemicParams::with_epsilon(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(EpidemicParams::new(1.0, 1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn tau_is_ratio() {
        let p = EpidemicParams::new(0.25, 0.4, 0.2, 0.45).unwrap();
        assert!((p.tau() - 0.625).abs() < 1e-15);
        assert!((p.dfe_recovered() - 0.45 / 0.65).abs() < 1e-15);
    }
}
