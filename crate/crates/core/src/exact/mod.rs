//! The exact continuous-time Markov chain on all 3^N network configurations.
//!
//! Node `i` contributes digit `X_i` (S = 0, I = 1, R = 2) at weight 3^i, so
//! configuration `k = Σ X_i 3^i`. The generator is stored row-to-column
//! (rate from the row configuration to the column one) and probability
//! vectors evolve by its transposed action.

mod bounds;
mod generator;
mod hitting;
mod master;
mod state;

pub use bounds::{
    bound_mean_extinction_time, bound_no_absorption, bound_not_in_final_set, BlockMatrixAbar,
    SPECTRUM_COLLISION_MARGIN,
};
pub use generator::{
    build_generator, build_generator_with_cap, memory_estimate, GeneratorMatrix, DEFAULT_STATE_CAP,
};
pub use hitting::{expected_hitting_time_final_set, hitting_times_final_set};
pub(crate) use master::check_grid;
pub use master::{
    marginal_infection_probabilities, marginals, point_mass, prob_not_absorbed,
    prob_not_in_final_set, solve_master_equation, solve_master_equation_with,
    UniformizationOptions,
};
pub use state::{decode, encode, state_count, try_encode, NetworkConfiguration, NodeState};
