//! Discrete sparse-reward gridworlds and the analytic quadratic testbed.

mod grid;
pub mod maps;
mod quadratic;
mod rollout;

#[cfg(test)]
mod tests;

pub use grid::{load_grid, step, Action, GridError, GridSpec, GridState, Shaping};
pub use quadratic::{quad_eval, QuadraticObjective};
pub use rollout::{rollout, IntrinsicEval, NoIntrinsic, PolicyLogits, Trajectory, Transition};
