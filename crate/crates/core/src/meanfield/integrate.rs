//! Dormand-Prince 5(4) integration of the mean-field systems.
//!
//! Steps are truncated to land exactly on every requested output time.
//! After each accepted step, components in `[-1e-12, 0)` are set to zero and
//! counted; anything more negative is left alone and reported as a region
//! violation instead.

use super::rhs::{ir_flat, sirs_flat};
use crate::error::{Error, Result};
use crate::exact::check_grid;
use crate::graph::WeightedAdjacency;
use crate::params::EpidemicParams;
use crate::partitions::QuotientMatrix;

/// Negative values down to this size are rounding and get clamped.
const CLAMP_FLOOR: f64 = -1e-12;

/// Which equations to integrate, with the layout of the flat state vector.
#[derive(Debug, Clone, Copy)]
pub enum MeanFieldSystem<'a> {
    /// `[S.., I.., R..]` per node.
    Full {
        adjacency: &'a WeightedAdjacency,
        params: EpidemicParams,
    },
    /// `[I.., R..]` per node, `S = 1 - I - R`.
    Reduced {
        adjacency: &'a WeightedAdjacency,
        params: EpidemicParams,
    },
    /// `[S.., I.., R..]` per cell.
    Quotient {
        quotient: &'a QuotientMatrix,
        params: EpidemicParams,
    },
    /// `[I, R]` for a d-regular graph with every node equal.
    Regular2d { degree: f64, params: EpidemicParams },
}

impl MeanFieldSystem<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Full { adjacency, .. } => 3 * adjacency.node_count(),
            Self::Reduced { adjacency, .. } => 2 * adjacency.node_count(),
            Self::Quotient { quotient, .. } => 3 * quotient.dim(),
            Self::Regular2d { .. } => 2,
        }
    }

    pub fn params(&self) -> &EpidemicParams {
        match self {
            Self::Full { params, .. }
            | Self::Reduced { params, .. }
            | Self::Quotient { params, .. }
            | Self::Regular2d { params, .. } => params,
        }
    }

    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        match *self {
            Self::Full {
                adjacency,
                ref params,
            } => sirs_flat(adjacency, params.beta, params, y, dy),
            Self::Reduced {
                adjacency,
                ref params,
            } => ir_flat(adjacency, params.beta, params, y, dy),
            Self::Quotient {
                quotient,
                ref params,
            } => sirs_flat(quotient, 1.0, params, y, dy),
            Self::Regular2d { degree, ref params } => {
                let (di, dr) = super::rhs::rhs_regular2d(y[0], y[1], degree, params);
                dy[0] = di;
                dy[1] = dr;
            }
        }
    }

    /// Largest violation of the invariant region: negative components and
    /// `S + I + R = 1` (three-compartment layouts) or `I + R <= 1`.
    pub fn region_violation(&self, y: &[f64]) -> f64 {
        let mut worst = y.iter().fold(0.0f64, |w, &v| w.max(-v));
        match self {
            Self::Full { .. } | Self::Quotient { .. } => {
                let n = y.len() / 3;
                for k in 0..n {
                    worst = worst.max((y[k] + y[n + k] + y[2 * n + k] - 1.0).abs());
                }
            }
            Self::Reduced { .. } | Self::Regular2d { .. } => {
                let n = y.len() / 2;
                for k in 0..n {
                    worst = worst.max(y[k] + y[n + k] - 1.0);
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Stop once `||f||_inf` drops below this; later grid points repeat the
    /// final state. `None` integrates to the last grid time. Near a stable
    /// point the residual levels off around `atol * ||J||`, so this must sit
    /// above that.
    pub stationary_tol: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-9,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
            stationary_tol: None,
        }
    }
}

impl IntegrationOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            atol: tol,
            rtol: tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryDiagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Components clamped from `[-1e-12, 0)` to zero.
    pub clamped: usize,
    /// Largest region violation seen after clamping.
    pub max_region_violation: f64,
    /// Time at which the stationarity test fired.
    pub stationary_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Flat state at every output time.
    pub states: Vec<Vec<f64>>,
    pub diagnostics: TrajectoryDiagnostics,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least one point")
    }
}

// Dormand-Prince tableau; the systems are autonomous so the nodes c_i are unused
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `system` from `y0` at `t = 0`, reporting the state at every
/// time in `t_grid` (non-decreasing, starting at or after 0).
pub fn integrate(
    system: &MeanFieldSystem<'_>,
    y0: &[f64],
    t_grid: &[f64],
    opts: IntegrationOptions,
) -> Result<Trajectory> {
    let dim = system.dim();
    if y0.len() != dim {
        return Err(Error::SizeMismatch {
            expected: dim,
            found: y0.len(),
        });
    }
    check_grid(t_grid)?;
    if !(opts.atol > 0.0 && opts.rtol >= 0.0) {
        return Err(Error::InvalidParams(
            "integration tolerances must be positive".into(),
        ));
    }

    let mut diag = TrajectoryDiagnostics::default();
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    system.rhs(&y, &mut k[0]);
    diag.rhs_evaluations += 1;
    diag.max_region_violation = system.region_violation(&y);

    let mut t = 0.0;
    let mut h = initial_step(system, &y, &k[0], &opts, &mut diag);
    let mut states = Vec::with_capacity(t_grid.len());
    let mut steps = 0usize;

    for &target in t_grid {
        while t < target && diag.stationary_at.is_none() {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NotConverged {
                    what: "mean-field integration step budget",
                    iterations: steps,
                    residual: target - t,
                });
            }
            let remaining = target - t;
            let truncated = h >= remaining;
            let step = h.min(remaining).min(opts.max_step);
            if step < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }

            macro_rules! stage {
                ($out:expr, $($c:expr => $j:expr),+) => {{
                    for m in 0..dim {
                        tmp[m] = y[m] + step * (0.0 $(+ $c * k[$j][m])+);
                    }
                    let (_, rest) = k.split_at_mut($out);
                    system.rhs(&tmp, &mut rest[0]);
                }};
            }
            stage!(1, A21 => 0);
            stage!(2, A31 => 0, A32 => 1);
            stage!(3, A41 => 0, A42 => 1, A43 => 2);
            stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
            stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
            for m in 0..dim {
                y_new[m] = y[m]
                    + step
                        * (A71 * k[0][m]
                            + A73 * k[2][m]
                            + A74 * k[3][m]
                            + A75 * k[4][m]
                            + A76 * k[5][m]);
            }
            {
                let (_, rest) = k.split_at_mut(6);
                system.rhs(&y_new, &mut rest[0]);
            }
            diag.rhs_evaluations += 6;
            for m in 0..dim {
                err[m] = step
                    * (E1 * k[0][m]
                        + E3 * k[2][m]
                        + E4 * k[3][m]
                        + E5 * k[4][m]
                        + E6 * k[5][m]
                        + E7 * k[6][m]);
            }
            let e = error_norm(&err, &y, &y_new, &opts);

            if e <= 1.0 {
                diag.accepted_steps += 1;
                t = if truncated && step == remaining {
                    target
                } else {
                    t + step
                };
                std::mem::swap(&mut y, &mut y_new);
                let mut clamped = false;
                for v in y.iter_mut() {
                    if *v < 0.0 && *v >= CLAMP_FLOOR {
                        *v = 0.0;
                        diag.clamped += 1;
                        clamped = true;
                    }
                }
                // first-same-as-last, unless clamping moved the state
                if clamped {
                    system.rhs(&y, &mut k[0]);
                    diag.rhs_evaluations += 1;
                } else {
                    k.swap(0, 6);
                }
                diag.max_region_violation =
                    diag.max_region_violation.max(system.region_violation(&y));
                let factor = if e == 0.0 {
                    5.0
                } else {
                    (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
                };
                let proposed = step * factor;
                // a step shortened to hit the grid says nothing against h
                h = if truncated { proposed.max(h) } else { proposed };
                if let Some(tol) = opts.stationary_tol {
                    if k[0].iter().all(|v| v.abs() < tol) {
                        diag.stationary_at = Some(t);
                    }
                }
            } else {
                diag.rejected_steps += 1;
                h = step * (0.9 * e.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        states.push(y.clone());
    }
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        diagnostics: diag,
    })
}

fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], opts: &IntegrationOptions) -> f64 {
    let mut acc = 0.0;
    for m in 0..err.len() {
        let sc = opts.atol + opts.rtol * y[m].abs().max(y_new[m].abs());
        acc += (err[m] / sc).powi(2);
    }
    (acc / err.len() as f64).sqrt()
}

/// Starting step from the size of `y` and `f(y)` and one explicit Euler
/// probe of the second derivative.
fn initial_step(
    system: &MeanFieldSystem<'_>,
    y: &[f64],
    f0: &[f64],
    opts: &IntegrationOptions,
    diag: &mut TrajectoryDiagnostics,
) -> f64 {
    let dim = y.len();
    let norm = |v: &[f64]| {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(a, b)| (a / (opts.atol + opts.rtol * b.abs())).powi(2))
            .sum();
        (s / dim as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let probe: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; dim];
    system.rhs(&probe, &mut f1);
    diag.rhs_evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}
