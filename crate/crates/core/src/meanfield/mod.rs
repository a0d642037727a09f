//! First-order mean-field dynamics.
//!
//! Node `i` carries probabilities `(S_i, I_i, R_i)` evolving by
//!
//! ```text
//! dS_i = -S_i β Σ_j w_ij I_j + γ R_i - σ S_i
//! dI_i =  S_i β Σ_j w_ij I_j - δ I_i
//! dR_i =  δ I_i - γ R_i + σ S_i
//! ```
//!
//! with `w` the (possibly epsilon-weighted) adjacency. The same equations
//! are available on the `(I, R)` slice `S = 1 - I - R`, on the cells of an
//! equitable partition (through its quotient matrix) and, for a d-regular
//! graph started from node-equal values, as a two-variable system.

mod equilibrium;
mod integrate;
mod lyapunov;
mod rhs;
mod state;
mod threshold;

pub use equilibrium::{
    check_global_condition_a, endemic_equilibrium, endemic_equilibrium_quotient,
    endemic_equilibrium_with, EquilibriumKind, EquilibriumOptions, EquilibriumPoint,
    GlobalConditionBranch, GlobalConditionReport,
};
pub use integrate::{
    integrate, IntegrationOptions, MeanFieldSystem, Trajectory, TrajectoryDiagnostics,
};
pub use lyapunov::{
    lyapunov_derivative, lyapunov_derivative_closed_form, lyapunov_v, regular_equilibrium,
};
pub use rhs::{rhs_full, rhs_quotient, rhs_reduced_ir, rhs_regular2d, FieldDerivative};
pub use state::MeanFieldState;
pub use threshold::{threshold_report, Regime, ThresholdReport};
