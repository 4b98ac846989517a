//! Simulator for one-bit distributed learning in sensor networks.
//!
//! A network of `n` sensors each holds one labeled training example. When the
//! fusion center broadcasts a query point, every sensor answers with a single
//! bit or (in the abstention models) stays silent, and the fusion center turns
//! those answers into a prediction. This crate provides:
//!
//! - [`scenario`]: synthetic distributions with closed-form Bayes oracles.
//! - [`protocol`]: the five sensor decision rules, their fusion rules and the
//!   bandwidth schedules that drive them.
//! - [`oracle`]: centralized naive kernel rules and the exact Poisson-binomial
//!   law of the vote count.
//! - [`network`] and [`harness`]: training, risk estimation and sweeps.
//! - [`verify`]: the built-in self-check suites.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod network;
pub mod oracle;
pub mod protocol;
pub mod quadrature;
pub mod scenario;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{BallIndex, Point, Region};
pub use harness::{ExperimentConfig, RiskReport};
pub use network::NetworkState;
pub use protocol::{
    CoinMode, Fused, Label, Protocol, Schedule, SensorResponse, SensorState, Verdict, VoteTally,
};
pub use scenario::{Example, Scenario, Task};
