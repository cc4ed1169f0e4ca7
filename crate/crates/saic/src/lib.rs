//! Task-based compression of agent observations for rate-limited cooperation.
//!
//! Two agents on an `N x N` grid must enter a goal cell simultaneously while
//! exchanging at most `R` bits per step. This crate implements the full
//! pipeline: centralized tabular Q-learning, value-based aggregation of the
//! observation space into `2^R` message classes (exact 1-D k-median), and
//! distributed Q-learning against the frozen communication policy — together
//! with the baseline schemes (spatial Lloyd quantization, jointly learned
//! communication, scripted heuristics, a hybrid compressed controller) and an
//! experiment harness that sweeps schemes, rates and seeds into CSV reports.

pub mod aggregation;
mod error;
pub mod gridworld;
pub mod harness;
pub mod qcore;
pub mod schemes;

pub use error::{Error, Result};
