//! Deep Optimisation: restart hill climbing whose variation operator is
//! redefined, layer by layer, by a tied-weight autoencoder trained on the
//! hill climber's own locally optimal solutions.
//!
//! - [`ae`]: the stacked autoencoder.
//! - [`engine`]: solution and model optimisation cycles, transitions.
//! - [`binary`]: HTOP and MC_parity with brute-force oracles.
//! - [`tsp`]: TSPLIB parsing, connection-matrix encoding, baselines.

pub mod ae;
pub mod binary;
pub mod engine;
pub mod error;
pub mod problem;
pub mod tsp;

pub use ae::{Activation, Autoencoder, LayerSpec};
pub use engine::{accept_rule, run, Decision, Engine, Mode, RunConfig, RunLog, SearchState};
pub use error::{Error, Result};
pub use problem::Problem;
