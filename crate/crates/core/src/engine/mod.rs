//! The adaptive loop: sample a direction, measure the gradient, rotate by
//! `theta = -gamma * gradient`, record, repeat.

mod config;
mod direction;
mod gradient;
mod runner;
mod trace;

pub use config::{Gamma, GradientMode, RandomizationStrategy, RunConfig, StopRule, StrategyKind};
pub use direction::Direction;
pub use gradient::{
    gradient_exact, gradient_finite_difference, gradient_hilbert_schmidt, gradient_shot_estimate,
};
pub use runner::{initial_state, run, run_observed, step, step_with_direction, RunSummary};
pub use trace::{CircuitEntry, RunTrace, StepRecord};

/// Substream tag for the initial state of a trial.
pub const INIT_STREAM: u64 = 0;
/// Substream tag for direction sampling (and shot noise) of a trial.
pub const DIRECTION_STREAM: u64 = 1;
