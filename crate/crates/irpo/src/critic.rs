//! State-value learning and TD-residual advantages.
//!
//! Targets come from the lambda-bootstrapped backward recursion
//! `target[t] = r[t] + gamma * ((1 - lambda) * V(s[t+1]) + lambda * target[t+1])`,
//! and each critic takes plain gradient steps on the mean squared error
//! against those (fixed) targets. Advantages are one-step TD residuals,
//! normalized per batch before use.
//!
//! Episode boundaries: a goal-terminated episode bootstraps with 0 beyond the
//! end; a horizon-truncated one bootstraps with the critic's value of the
//! final next-state.

use rand::Rng;
use thiserror::Error;

use crate::envs::{Trajectory, Transition};
use crate::numerics::{GradTape, MlpSpec, NumericsError, ParamVector};

#[derive(Debug, Error)]
pub enum CriticError {
    #[error("invalid critic parameter: {0}")]
    BadParams(String),
    #[error("non-finite critic loss ({loss}); {detail}")]
    NonFinite { loss: f64, detail: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which reward signal a critic tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardChannel {
    Extrinsic,
    /// Index into `Transition::intrinsic_rewards`.
    Intrinsic(usize),
}

impl RewardChannel {
    pub fn reward(&self, t: &Transition) -> f64 {
        match self {
            RewardChannel::Extrinsic => t.extrinsic_reward,
            RewardChannel::Intrinsic(k) => t.intrinsic_rewards[*k],
        }
    }
}

/// The critic architecture used throughout: hidden (128, 128), tanh, scalar.
pub fn critic_spec(obs_dim: usize) -> MlpSpec {
    MlpSpec::new(obs_dim, &[128, 128], 1)
}

/// One intrinsic critic and one extrinsic critic with a shared architecture;
/// the parameter vectors evolve independently.
#[derive(Debug, Clone)]
pub struct CriticPair {
    pub spec: MlpSpec,
    pub intrinsic: ParamVector,
    pub extrinsic: ParamVector,
}

impl CriticPair {
    pub fn new(obs_dim: usize, rng: &mut impl Rng) -> Self {
        let spec = critic_spec(obs_dim);
        let intrinsic = spec.init_params(rng, 0.01);
        let extrinsic = spec.init_params(rng, 0.01);
        Self {
            spec,
            intrinsic,
            extrinsic,
        }
    }
}

/// Evaluates a scalar critic.
pub fn critic_value(spec: &MlpSpec, params: &ParamVector, obs: &[f64]) -> f64 {
    spec.eval(params, obs).expect("critic shape matches")[0]
}

/// Backward lambda-return recursion with an arbitrary per-transition reward.
pub fn lambda_returns_by(
    traj: &Trajectory,
    values: &[f64],
    gamma: f64,
    lambda: f64,
    reward: impl Fn(&Transition) -> f64,
) -> Result<Vec<f64>, CriticError> {
    lambda_returns_impl(traj, values, gamma, lambda, reward)
}

/// Backward lambda-return recursion over one episode.
///
/// `values` holds `V(s_0) .. V(s_L)` — one entry per visited state plus the
/// boundary value for the state after the final transition (0 for a
/// goal-terminated episode, the critic's estimate for a truncated one).
pub fn lambda_returns(
    traj: &Trajectory,
    values: &[f64],
    gamma: f64,
    lambda: f64,
    channel: RewardChannel,
) -> Result<Vec<f64>, CriticError> {
    lambda_returns_impl(traj, values, gamma, lambda, |t| channel.reward(t))
}

fn lambda_returns_impl(
    traj: &Trajectory,
    values: &[f64],
    gamma: f64,
    lambda: f64,
    reward: impl Fn(&Transition) -> f64,
) -> Result<Vec<f64>, CriticError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(CriticError::BadParams(format!(
            "gamma must be in [0, 1), got {gamma}"
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(CriticError::BadParams(format!(
            "lambda must be in [0, 1], got {lambda}"
        )));
    }
    let len = traj.len();
    if values.len() != len + 1 {
        return Err(CriticError::BadParams(format!(
            "need {} values (states + boundary), got {}",
            len + 1,
            values.len()
        )));
    }
    let mut targets = vec![0.0; len];
    let mut next_target = values[len];
    for t in (0..len).rev() {
        let r = reward(&traj.transitions[t]);
        let target = r + gamma * ((1.0 - lambda) * values[t + 1] + lambda * next_target);
        targets[t] = target;
        next_target = target;
    }
    Ok(targets)
}

/// Critic values for every state of an episode plus the boundary value.
pub fn episode_values(spec: &MlpSpec, params: &ParamVector, traj: &Trajectory) -> Vec<f64> {
    let mut values: Vec<f64> = traj
        .transitions
        .iter()
        .map(|t| critic_value(spec, params, &t.obs))
        .collect();
    let boundary = match traj.transitions.last() {
        Some(last) if last.reached_goal() => 0.0,
        Some(last) => critic_value(spec, params, &last.next_obs),
        None => 0.0,
    };
    values.push(boundary);
    values
}

/// Lambda-return targets for a batch of episodes, flattened in episode order.
pub fn lambda_targets(
    spec: &MlpSpec,
    params: &ParamVector,
    batch: &[Trajectory],
    gamma: f64,
    lambda: f64,
    channel: RewardChannel,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), CriticError> {
    lambda_targets_by(spec, params, batch, gamma, lambda, |t| channel.reward(t))
}

/// As [`lambda_targets`] with an arbitrary per-transition reward.
pub fn lambda_targets_by(
    spec: &MlpSpec,
    params: &ParamVector,
    batch: &[Trajectory],
    gamma: f64,
    lambda: f64,
    reward: impl Fn(&Transition) -> f64 + Copy,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), CriticError> {
    let mut observations = Vec::new();
    let mut targets = Vec::new();
    for traj in batch {
        let values = episode_values(spec, params, traj);
        let ep_targets = lambda_returns_by(traj, &values, gamma, lambda, reward)?;
        for (t, target) in traj.transitions.iter().zip(ep_targets) {
            observations.push(t.obs.clone());
            targets.push(target);
        }
    }
    Ok((observations, targets))
}

/// One gradient step on the mean squared error between critic predictions and
/// fixed targets. Targets are constants: no gradient flows through them.
pub fn critic_update(
    spec: &MlpSpec,
    params: &ParamVector,
    observations: &[Vec<f64>],
    targets: &[f64],
    lr: f64,
) -> Result<ParamVector, CriticError> {
    if lr <= 0.0 {
        return Err(CriticError::BadParams(format!("lr must be > 0, got {lr}")));
    }
    if observations.len() != targets.len() {
        return Err(CriticError::BadParams(format!(
            "{} observations vs {} targets",
            observations.len(),
            targets.len()
        )));
    }
    if observations.is_empty() {
        return Ok(params.clone());
    }
    let m = observations.len() as f64;
    let mut tape = GradTape::new(params);
    let mut terms = Vec::with_capacity(observations.len());
    for (obs, &target) in observations.iter().zip(targets.iter()) {
        let out = tape.mlp(spec, obs);
        let err = tape.add_const(out, vec![-target]);
        let sq = tape.squared_norm(err);
        terms.push((1.0 / m, sq));
    }
    let loss = tape.weighted_sum(terms);
    tape.set_output(loss);

    let loss_value = tape.output_value()[0];
    if !loss_value.is_finite() {
        return Err(CriticError::NonFinite {
            loss: loss_value,
            detail: format!(
                "batch of {} targets in [{:?}, {:?}]",
                targets.len(),
                targets.iter().cloned().fold(f64::INFINITY, f64::min),
                targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            ),
        });
    }
    let grad = tape.grad_scalar()?;
    let mut next = params.clone();
    next.axpy(-lr, &grad);
    if !next.is_finite() {
        return Err(CriticError::NonFinite {
            loss: loss_value,
            detail: "parameters became non-finite after the update".into(),
        });
    }
    Ok(next)
}

/// Raw TD-residual advantages `r + gamma * V(s') - V(s)` with an arbitrary
/// value function; the boundary follows the episode-end convention above.
pub fn td_advantages_with(
    values: impl Fn(&[f64]) -> f64,
    traj: &Trajectory,
    gamma: f64,
    channel: RewardChannel,
) -> Vec<f64> {
    td_advantages_by(values, |t| channel.reward(t), traj, gamma)
}

/// As [`td_advantages_with`] with an arbitrary per-transition reward.
pub fn td_advantages_by(
    values: impl Fn(&[f64]) -> f64,
    reward: impl Fn(&Transition) -> f64,
    traj: &Trajectory,
    gamma: f64,
) -> Vec<f64> {
    traj.transitions
        .iter()
        .map(|t| {
            // Goal termination bootstraps 0; horizon truncation (and every
            // non-terminal step) bootstraps the value of the next state.
            let next_value = if t.reached_goal() {
                0.0
            } else {
                values(&t.next_obs)
            };
            reward(t) + gamma * next_value - values(&t.obs)
        })
        .collect()
}

/// Raw TD-residual advantages under a critic.
pub fn td_advantages(
    spec: &MlpSpec,
    params: &ParamVector,
    traj: &Trajectory,
    gamma: f64,
    channel: RewardChannel,
) -> Vec<f64> {
    td_advantages_with(|obs| critic_value(spec, params, obs), traj, gamma, channel)
}

/// Normalizes advantages in place to zero mean and unit variance. The
/// positive affine map preserves the argmax transition.
pub fn normalize_advantages(advantages: &mut [f64]) {
    if advantages.is_empty() {
        return;
    }
    let n = advantages.len() as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in advantages.iter_mut() {
        *a = (*a - mean) / (std + 1e-8);
    }
}
