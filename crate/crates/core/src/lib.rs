//! Exact, stochastic and mean-field dynamics of the SIRS epidemic with
//! vaccination on undirected networks.
//!
//! * [`graph`]: contact graphs, epsilon-weighted adjacency, Perron roots.
//! * [`partitions`]: equitable partitions and quotient matrices.
//! * [`exact`]: the 3^N-state Markov chain, its master equation, hitting
//!   times and analytic extinction bounds.
//! * [`sim`]: event-driven Monte Carlo of the same chain for any N.
//! * [`meanfield`]: the first-order mean-field ODEs, thresholds, equilibria
//!   and Lyapunov diagnostics.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod graph;
pub mod meanfield;
pub mod params;
pub mod partitions;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{Graph, GraphKind, WeightedAdjacency};
pub use params::EpidemicParams;
