//! Intrinsic reward construction.
//!
//! Two sources, both normalized to `[-1, +1]` over the free cells:
//!
//! - Graph-Laplacian eigenvector rewards: the combinatorial Laplacian
//!   `L = D - A` of the free-cell adjacency graph is decomposed exactly, and
//!   eigenvectors 2..K+1 (ascending eigenvalue, skipping the constant one)
//!   become state-value maps. Low-frequency eigenvectors vary smoothly and
//!   peak in regions that are far from the start in diffusion distance, so
//!   climbing them drives exploration.
//! - Random-network rewards: a frozen randomly-initialized MLP maps the
//!   observation to K channels, each rescaled to `[-1, +1]`. Used by the
//!   reward-robustness ablation.
//!
//! Reward maps are state functions. Per-transition signals are emitted in
//! potential-difference form, `value(next) - value(current)`, so a step that
//! climbs the map is rewarded and parking on a peak yields nothing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::envs::{GridSpec, IntrinsicEval};
use crate::numerics::{sym_eig, MlpSpec, NumericsError, ParamVector};

#[derive(Debug, Error)]
pub enum IntrinsicError {
    #[error("requested {requested} rewards but the grid has only {free} free cells (need K <= free - 1)")]
    TooManyRewards { requested: usize, free: usize },
    #[error("free-cell graph is disconnected: {0}")]
    Disconnected(String),
    #[error("constant reward channel {0}: rescaling to [-1, 1] is undefined")]
    ConstantRewardChannel(usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// How a reward set was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Laplacian,
    RandomNetwork,
}

/// K state-value reward maps over a grid, each bounded in `[-1, +1]`.
#[derive(Debug, Clone)]
pub struct IntrinsicRewardSet {
    k: usize,
    provenance: Provenance,
    width: usize,
    height: usize,
    /// Per-channel value tables over all cells (walls hold 0 and are never read).
    tables: Vec<Vec<f64>>,
    /// Ascending Laplacian eigenvalues matching the channels, when applicable.
    eigenvalues: Option<Vec<f64>>,
}

impl IntrinsicRewardSet {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }

    pub fn value_at_cell(&self, k: usize, x: usize, y: usize) -> f64 {
        self.tables[k][y * self.width + x]
    }

    /// Reward map evaluated at a (normalized) observation.
    pub fn state_value(&self, k: usize, obs: &[f64]) -> f64 {
        let nx = (self.width - 1).max(1) as f64;
        let ny = (self.height - 1).max(1) as f64;
        let x = (obs[0] * nx).round() as usize;
        let y = (obs[1] * ny).round() as usize;
        self.value_at_cell(k, x, y)
    }
}

impl IntrinsicEval for IntrinsicRewardSet {
    fn k(&self) -> usize {
        self.k
    }

    fn transition_rewards(&self, obs: &[f64], next_obs: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|k| self.state_value(k, next_obs) - self.state_value(k, obs))
            .collect()
    }
}

/// Builds K Laplacian-eigenvector reward maps for a grid.
///
/// Takes eigenvectors 2..K+1 in ascending eigenvalue order (the constant
/// eigenvector carries no signal and is skipped by construction), rescales
/// each so `max |value| = 1`, and fixes the sign so the start cell's value
/// is `<= 0`, pushing exploration away from the start.
pub fn build_laplacian_rewards(
    spec: &GridSpec,
    k: usize,
) -> Result<IntrinsicRewardSet, IntrinsicError> {
    let free = spec.free_cells();
    let n = free.len();
    if k + 1 > n {
        return Err(IntrinsicError::TooManyRewards {
            requested: k,
            free: n,
        });
    }
    let mut index = vec![usize::MAX; spec.width * spec.height];
    for (i, &(x, y)) in free.iter().enumerate() {
        index[y * spec.width + x] = i;
    }

    check_connected(spec, &free, &index)?;

    // Combinatorial Laplacian L = D - A over 4-connectivity.
    let mut lap = vec![vec![0.0; n]; n];
    for (i, &(x, y)) in free.iter().enumerate() {
        let mut degree = 0.0;
        for (dx, dy) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx < 0 || ny < 0 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if spec.is_free(nx, ny) {
                let j = index[ny * spec.width + nx];
                lap[i][j] = -1.0;
                degree += 1.0;
            }
        }
        lap[i][i] = degree;
    }

    let eig = sym_eig(&lap)?;
    let start_idx = index[spec.start.1 * spec.width + spec.start.0];

    let mut tables = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for channel in 0..k {
        // Skip the constant eigenvector at position 0.
        let mut v = eig.eigenvector(channel + 1);
        eigenvalues.push(eig.values[channel + 1]);
        if v[start_idx] > 0.0 || (v[start_idx] == 0.0 && first_nonzero_negative(&v)) {
            for x in &mut v {
                *x = -*x;
            }
        }
        let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        debug_assert!(max_abs > 0.0, "eigenvector cannot be all-zero");
        let mut table = vec![0.0; spec.width * spec.height];
        for (i, &(x, y)) in free.iter().enumerate() {
            table[y * spec.width + x] = v[i] / max_abs;
        }
        tables.push(table);
    }

    Ok(IntrinsicRewardSet {
        k,
        provenance: Provenance::Laplacian,
        width: spec.width,
        height: spec.height,
        tables,
        eigenvalues: Some(eigenvalues),
    })
}

fn first_nonzero_negative(v: &[f64]) -> bool {
    v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0)
}

fn check_connected(
    spec: &GridSpec,
    free: &[(usize, usize)],
    index: &[usize],
) -> Result<(), IntrinsicError> {
    let n = free.len();
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for root in 0..n {
        if component[root] != usize::MAX {
            continue;
        }
        let id = n_components;
        n_components += 1;
        let mut stack = vec![root];
        component[root] = id;
        while let Some(i) = stack.pop() {
            let (x, y) = free[i];
            for (dx, dy) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx < 0 || ny < 0 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if spec.is_free(nx, ny) {
                    let j = index[ny * spec.width + nx];
                    if component[j] == usize::MAX {
                        component[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
    }
    if n_components <= 1 {
        return Ok(());
    }
    let mut descriptions = Vec::new();
    for id in 0..n_components {
        let members: Vec<usize> = (0..n).filter(|&i| component[i] == id).collect();
        let (x, y) = free[members[0]];
        descriptions.push(format!(
            "component {} ({} cells, e.g. ({x}, {y}))",
            id + 1,
            members.len()
        ));
    }
    Err(IntrinsicError::Disconnected(descriptions.join(", ")))
}

/// Architecture of the frozen random reward network.
fn random_net_spec(k: usize) -> MlpSpec {
    MlpSpec::new(4, &[64, 64], k)
}

/// Builds K reward maps from a frozen randomly-initialized network.
pub fn build_random_rewards(
    spec: &GridSpec,
    k: usize,
    seed: u64,
) -> Result<IntrinsicRewardSet, IntrinsicError> {
    let net = random_net_spec(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = net.init_params(&mut rng, 1.0);
    build_random_rewards_with(spec, k, &params)
}

/// Same as [`build_random_rewards`] but with explicit network parameters.
///
/// Each output channel is rescaled affinely over the free cells to exactly
/// `[-1, +1]`; a channel that is constant over the free cells cannot be
/// rescaled and is reported as an error.
pub fn build_random_rewards_with(
    spec: &GridSpec,
    k: usize,
    params: &ParamVector,
) -> Result<IntrinsicRewardSet, IntrinsicError> {
    let net = random_net_spec(k);
    net.check_params(params)?;
    let free = spec.free_cells();
    let mut raw = vec![vec![0.0; spec.width * spec.height]; k];
    for &(x, y) in &free {
        let state = crate::envs::GridState {
            agent: (x, y),
            goal: spec.goal,
            t: 0,
        };
        let obs = spec.observe(&state);
        let out = net.eval(params, &obs)?;
        for (channel, value) in out.into_iter().enumerate() {
            raw[channel][y * spec.width + x] = value;
        }
    }
    let mut tables = Vec::with_capacity(k);
    for (channel, table) in raw.into_iter().enumerate() {
        let values: Vec<f64> = free.iter().map(|&(x, y)| table[y * spec.width + x]).collect();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max - min <= 1e-12 {
            return Err(IntrinsicError::ConstantRewardChannel(channel));
        }
        let mut rescaled = vec![0.0; spec.width * spec.height];
        for &(x, y) in &free {
            let v = table[y * spec.width + x];
            rescaled[y * spec.width + x] = 2.0 * (v - min) / (max - min) - 1.0;
        }
        tables.push(rescaled);
    }
    Ok(IntrinsicRewardSet {
        k,
        provenance: Provenance::RandomNetwork,
        width: spec.width,
        height: spec.height,
        tables,
        eigenvalues: None,
    })
}

/// Dumps every (free cell, channel) reward value as CSV with header
/// `x,y,k,value` — the data source for reward-map visualizations.
pub fn dump_reward_maps(set: &IntrinsicRewardSet, spec: &GridSpec) -> String {
    let mut out = String::from("x,y,k,value\n");
    for (x, y) in spec.free_cells() {
        for k in 0..set.k() {
            out.push_str(&format!("{x},{y},{k},{}\n", set.value_at_cell(k, x, y)));
        }
    }
    out
}
