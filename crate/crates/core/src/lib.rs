//! Return-based deep Q-learning.
//!
//! The crate combines a DQN-style learner with multi-step return targets. A
//! single target formula covers Watkins's Q(λ), Peng & Williams's Q(λ),
//! General Q(λ), importance sampling, tree backup, Q^π(λ), Retrace(λ) and the
//! QM(λ) strategy, which switches between the Retrace and tree-backup trace
//! coefficients depending on whether a transition is classified as near
//! on-policy or near off-policy.
//!
//! Module map:
//!
//! * [`policy`]: ε-greedy distributions and the β / η discrepancy measurements.
//! * [`returns`]: trace coefficients, bootstrap values, TD errors and the
//!   multi-step target.
//! * [`qfunc`]: tabular and MLP action-value functions plus the online/target pair.
//! * [`replay`]: replay memory that stores behavior distributions and samples
//!   sequential segments.
//! * [`envs`]: CartPole, Mountain Car and Cliff Walking.
//! * [`agent`]: the training loop.
//! * [`experiment`]: config parsing, multi-seed runs and CSV reports.
//! * [`verify`]: brute-force oracles and exhaustive checks.

pub mod agent;
pub mod envs;
pub mod error;
pub mod experiment;
pub mod policy;
pub mod qfunc;
pub mod replay;
pub mod returns;
pub mod rng;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use state::State;
