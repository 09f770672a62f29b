//! Comparison agents and ablation variants sharing the same stack.

pub mod blend;
pub mod hrl;
pub mod is_grad;
pub mod reward_sum;
pub mod vanilla;
