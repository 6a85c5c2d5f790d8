//! Simulation and exact-inference toolkit for joint community detection
//! and group synchronization on networks with group-labeled edges.
//!
//! The crate generates networks from the two-community model with per-edge
//! group transformations, solves the exact maximum-likelihood program at
//! small scale, evaluates closed-form recovery thresholds, and runs seeded
//! Monte Carlo experiments over all of it.

pub mod baseline;
pub mod consistency;
pub mod error;
pub mod experiments;
pub mod group;
pub mod metrics;
pub mod mle;
pub mod model;
pub mod theory;

pub use error::{Error, Result};
pub use group::{FiniteGroup, GroupElement};
pub use model::{Community, Hypothesis, ModelParams, ObservedNetwork};
