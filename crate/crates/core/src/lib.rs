//! Replica-exchange Langevin dynamics for nonconvex minimization.
//!
//! Two Langevin particles run at a low and a high temperature and exchange
//! temperatures at a rate that preserves the product Gibbs law. The crate
//! provides the objectives, the discretized dynamics, grid diagnostics for
//! convergence in χ², an experiment harness, and the acceptance checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod langevin;
pub mod objective;
pub mod replica;
pub mod rng;
pub mod trace;

pub use diagnostics::{GridMeasure, Interval};
pub use error::{Error, Result};
pub use harness::{Algorithm, InitSpec, RunSummary, SimConfig};
pub use langevin::{langevin_step, run_chain, ChainState};
pub use objective::{GaussianMixtureSpec, Objective, ObjectiveSpec};
pub use replica::{
    low_temperature_position, position_swap_step, replica_step, swap_rate, Formulation,
    ReplicaState, ReplicaStreams, SwapPolicy,
};
pub use rng::{Purpose, RngStream};
pub use trace::{Trace, TraceRecord};

/// Root seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;
