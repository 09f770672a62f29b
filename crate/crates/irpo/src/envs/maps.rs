//! Shipped maze layouts with their per-environment defaults.
//!
//! The layouts are figure-faithful approximations: the canonical 13x13
//! four-rooms grid, and two serpentine mazes with increasing corridor count.

use super::grid::{load_grid, GridError, GridSpec};

pub const FOURROOMS: &str = include_str!("../../maps/fourrooms.txt");
pub const MAZE_V1: &str = include_str!("../../maps/maze_v1.txt");
pub const MAZE_V2: &str = include_str!("../../maps/maze_v2.txt");

/// Per-environment defaults: map text, horizon, discount, and the number of
/// intrinsic rewards (subpolicies) used with it.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinEnv {
    pub name: &'static str,
    pub map_text: &'static str,
    pub horizon: usize,
    pub gamma: f64,
    pub num_intrinsic: usize,
}

pub const BUILTINS: [BuiltinEnv; 3] = [
    BuiltinEnv {
        name: "fourrooms",
        map_text: FOURROOMS,
        horizon: 100,
        gamma: 0.99,
        num_intrinsic: 4,
    },
    BuiltinEnv {
        name: "maze-v1",
        map_text: MAZE_V1,
        horizon: 300,
        gamma: 0.99,
        num_intrinsic: 6,
    },
    BuiltinEnv {
        name: "maze-v2",
        map_text: MAZE_V2,
        horizon: 300,
        gamma: 0.99,
        num_intrinsic: 6,
    },
];

pub fn builtin(name: &str) -> Option<BuiltinEnv> {
    BUILTINS.iter().copied().find(|b| b.name == name)
}

/// Loads a builtin environment with its default horizon and discount.
pub fn load_builtin(name: &str) -> Result<GridSpec, GridError> {
    let env = builtin(name).ok_or_else(|| {
        GridError::BadParams(format!(
            "unknown builtin environment '{name}' (expected one of fourrooms, maze-v1, maze-v2)"
        ))
    })?;
    load_grid(env.map_text, env.horizon, env.gamma)
}
