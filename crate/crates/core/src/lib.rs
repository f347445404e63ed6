//! Reinforcement-learning synthesis of distillation sequences.
//!
//! A soft actor-critic agent designs one column at a time against a
//! tray-by-tray column model, costed with annualized capital and utility
//! correlations.

// `!(x > 0.0)` is used on purpose so NaN lands on the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod column;
pub mod economics;
pub mod env;
pub mod neural;
pub mod runner;
pub mod sac;
pub mod stream;
pub mod thermo;
pub mod training;
pub mod tridiag;

pub use column::{solve_column, ColumnSolution, ColumnSpec, SolveStatus, SolverOptions};
pub use env::{EnvConfig, FlowsheetEnv, StepRecord, StepResult};
pub use runner::{ConvergenceStats, RunConfig, RunError};
pub use sac::{SacAgent, SacConfig};
pub use stream::Stream;
pub use thermo::ComponentBank;
pub use training::{EpisodeMetrics, Trainer};
