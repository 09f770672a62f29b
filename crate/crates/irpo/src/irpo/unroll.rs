//! Exploratory policy updates and reverse accumulation through them.
//!
//! Each exploratory ascent step `theta' = theta + eta * grad J(theta)` keeps
//! its objective tape. The Jacobian of the step map is `I + eta * H` with `H`
//! the objective Hessian at the pre-update parameters, so applying the
//! transposed Jacobian to a vector is one Hessian-vector product:
//! `v + eta * H v`. Backpropagating an extrinsic gradient through all N steps
//! is N such products in reverse step order; the m x m Jacobians are never
//! materialized.

use rayon::prelude::*;

use crate::critic::{
    critic_update, lambda_targets, normalize_advantages, td_advantages, CriticPair, RewardChannel,
};
use crate::envs::{rollout, GridSpec, Trajectory};
use crate::harness::seeding::{self, tags};
use crate::intrinsic::IntrinsicRewardSet;
use crate::numerics::policy::CategoricalPolicy;
use crate::numerics::{GradTape, MlpSpec, ParamVector};

use super::IrpoError;

/// One recorded exploratory update: the objective tape at the pre-update
/// parameters and the step size that was applied.
#[derive(Debug, Clone)]
pub struct TapeStep {
    pub tape: GradTape,
    pub eta: f64,
}

impl TapeStep {
    /// Jacobian-transpose-vector product of this step's update map:
    /// `(I + eta H)^T v = v + eta * (H v)`.
    ///
    /// At `eta = 0` the map is the identity and is applied exactly (no
    /// Hessian product is evaluated).
    pub fn jacobian_tvp(&self, v: &ParamVector) -> Result<ParamVector, IrpoError> {
        if self.eta == 0.0 {
            return Ok(v.clone());
        }
        let hv = self.tape.hvp(v)?;
        let mut out = v.clone();
        out.axpy(self.eta, &hv);
        Ok(out)
    }
}

/// The recorded chain of N exploratory updates.
#[derive(Debug, Clone, Default)]
pub struct UpdateTape {
    pub steps: Vec<TapeStep>,
}

impl UpdateTape {
    /// Applies the transposed Jacobian chain in reverse step order.
    pub fn backprop(&self, gradient: &ParamVector) -> Result<ParamVector, IrpoError> {
        let mut v = gradient.clone();
        for step in self.steps.iter().rev() {
            v = step.jacobian_tvp(&v)?;
        }
        Ok(v)
    }
}

/// Records the policy-gradient surrogate objective
/// `(1/M) sum_t w_t * log pi(a_t | s_t)` over a batch of trajectories.
///
/// `weights` holds the (already normalized) advantages, flattened in batch
/// order; the division by `M` is folded into the reduction coefficients.
pub fn policy_objective_tape(
    spec: &MlpSpec,
    params: &ParamVector,
    batch: &[Trajectory],
    weights: &[f64],
) -> GradTape {
    let samples: Vec<(&[f64], usize)> = batch
        .iter()
        .flat_map(|traj| traj.transitions.iter().map(|t| (t.obs.as_slice(), t.action)))
        .collect();
    policy_objective_from_samples(spec, params, &samples, weights)
}

/// Sample-level form of [`policy_objective_tape`]: `(observation, action)`
/// pairs with one weight each.
pub fn policy_objective_from_samples(
    spec: &MlpSpec,
    params: &ParamVector,
    samples: &[(&[f64], usize)],
    weights: &[f64],
) -> GradTape {
    assert_eq!(samples.len(), weights.len(), "one weight per sample");
    let m = samples.len().max(1) as f64;
    let mut tape = GradTape::new(params);
    let mut terms = Vec::with_capacity(samples.len());
    for (&(obs, action), &w) in samples.iter().zip(weights.iter()) {
        let out = tape.mlp(spec, obs);
        let lp = tape.log_softmax(out);
        let picked = tape.index(lp, action);
        terms.push((w / m, picked));
    }
    let obj = tape.weighted_sum(terms);
    tape.set_output(obj);
    tape
}

/// Plain policy-gradient estimate on fixed trajectories and advantages.
pub fn policy_gradient(
    spec: &MlpSpec,
    params: &ParamVector,
    batch: &[Trajectory],
    weights: &[f64],
) -> Result<ParamVector, IrpoError> {
    Ok(policy_objective_tape(spec, params, batch, weights).grad_scalar()?)
}

/// One gradient-ascent step on a recorded scalar objective, returning the new
/// parameters and the recorded step for later reverse accumulation.
pub fn ascent_step(
    params: &ParamVector,
    objective: GradTape,
    eta: f64,
) -> Result<(ParamVector, TapeStep), IrpoError> {
    let grad = objective.grad_scalar()?;
    if !grad.is_finite() {
        return Err(IrpoError::NonFiniteGradient { k: 0, j: 0 });
    }
    let mut next = params.clone();
    next.axpy(eta, &grad);
    Ok((next, TapeStep {
        tape: objective,
        eta,
    }))
}

/// One exploratory update (Algorithm line: ascend the intrinsic-advantage
/// policy gradient) with the computation recorded against the given batch.
pub fn exploratory_update(
    spec: &MlpSpec,
    params: &ParamVector,
    batch: &[Trajectory],
    critic: &CriticPair,
    gamma: f64,
    eta: f64,
    intrinsic_index: usize,
) -> Result<(ParamVector, TapeStep), IrpoError> {
    let mut advantages = Vec::new();
    for traj in batch {
        advantages.extend(td_advantages(
            &critic.spec,
            &critic.intrinsic,
            traj,
            gamma,
            RewardChannel::Intrinsic(intrinsic_index),
        ));
    }
    normalize_advantages(&mut advantages);
    let tape = policy_objective_tape(spec, params, batch, &advantages);
    ascent_step(params, tape, eta)
}

/// Settings for one exploratory phase.
#[derive(Debug, Clone)]
pub struct ExplorationSettings {
    /// N, the number of exploratory updates per intrinsic reward.
    pub n_updates: usize,
    /// Exploratory ascent step size.
    pub eta: f64,
    pub episodes_per_update: usize,
    /// Episodes for the final extrinsic-gradient estimate.
    pub final_episodes: usize,
    pub critic_lr: f64,
    pub critic_epochs: usize,
    pub lambda: f64,
}

/// Everything produced by one exploratory run k.
#[derive(Debug, Clone)]
pub struct ExploratoryRun {
    pub k: usize,
    /// Parameters before and after every update: `theta^(1) .. theta^(N+1)`;
    /// `theta^(1)` is bit-identical to the base parameters.
    pub params_per_step: Vec<ParamVector>,
    pub tape: UpdateTape,
    /// Mean discounted extrinsic return of the final rollouts (the
    /// performance estimate entering the softmax weights).
    pub perf_estimate: f64,
    /// Extrinsic policy gradient at `theta^(N+1)` on fresh rollouts.
    pub extrinsic_grad: ParamVector,
    /// The fresh rollouts behind the gradient estimate; reused for Fisher
    /// state sampling and evaluation bookkeeping.
    pub final_trajectories: Vec<Trajectory>,
    /// Environment samples consumed by this run.
    pub samples: u64,
}

impl ExploratoryRun {
    pub fn final_params(&self) -> &ParamVector {
        self.params_per_step.last().expect("at least theta^(1)")
    }
}

fn collect_batch(
    env: &GridSpec,
    spec: &MlpSpec,
    params: &ParamVector,
    intrinsic: &IntrinsicRewardSet,
    episodes: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    samples: &mut u64,
) -> Result<Vec<Trajectory>, IrpoError> {
    let policy = CategoricalPolicy::new(spec, params);
    let mut batch = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        batch.push(rollout(env, &policy, intrinsic, rng, samples)?);
    }
    Ok(batch)
}

fn update_critic_channel(
    critic_spec: &MlpSpec,
    params: &ParamVector,
    batch: &[Trajectory],
    gamma: f64,
    settings: &ExplorationSettings,
    channel: RewardChannel,
) -> Result<ParamVector, IrpoError> {
    let mut current = params.clone();
    for _ in 0..settings.critic_epochs {
        let (obs, targets) =
            lambda_targets(critic_spec, &current, batch, gamma, settings.lambda, channel)?;
        current = critic_update(critic_spec, &current, &obs, &targets, settings.critic_lr)?;
    }
    Ok(current)
}

/// Runs one exploratory phase: for every intrinsic reward k, N recorded
/// updates with fresh rollouts and critic refreshes per update, then fresh
/// rollouts under the final parameters for the extrinsic-gradient estimate
/// and the performance score.
///
/// Runs execute in parallel over k; all randomness is derived from
/// `(seed, iteration, k)` so results do not depend on scheduling.
pub fn run_exploratory_phase(
    spec: &MlpSpec,
    base_params: &ParamVector,
    env: &GridSpec,
    intrinsic: &IntrinsicRewardSet,
    critics: &mut [CriticPair],
    settings: &ExplorationSettings,
    seed: u64,
    iteration: u64,
) -> Result<Vec<ExploratoryRun>, IrpoError> {
    assert_eq!(critics.len(), intrinsic.k(), "one critic pair per reward");
    let runs: Vec<Result<ExploratoryRun, IrpoError>> = critics
        .par_iter_mut()
        .enumerate()
        .map(|(k, critic)| {
            run_single(
                spec, base_params, env, intrinsic, critic, settings, seed, iteration, k,
            )
        })
        .collect();
    runs.into_iter().collect()
}

#[allow(clippy::too_many_arguments)]
fn run_single(
    spec: &MlpSpec,
    base_params: &ParamVector,
    env: &GridSpec,
    intrinsic: &IntrinsicRewardSet,
    critic: &mut CriticPair,
    settings: &ExplorationSettings,
    seed: u64,
    iteration: u64,
    k: usize,
) -> Result<ExploratoryRun, IrpoError> {
    let mut rng = seeding::derive_rng(seed, &[tags::EXPLORE, iteration, k as u64]);
    let mut samples = 0u64;
    let mut params = base_params.clone();
    let mut params_per_step = vec![params.clone()];
    let mut tape = UpdateTape::default();

    for j in 0..settings.n_updates {
        let batch = collect_batch(
            env,
            spec,
            &params,
            intrinsic,
            settings.episodes_per_update,
            &mut rng,
            &mut samples,
        )?;
        critic.intrinsic = update_critic_channel(
            &critic.spec,
            &critic.intrinsic,
            &batch,
            env.gamma,
            settings,
            RewardChannel::Intrinsic(k),
        )?;
        critic.extrinsic = update_critic_channel(
            &critic.spec,
            &critic.extrinsic,
            &batch,
            env.gamma,
            settings,
            RewardChannel::Extrinsic,
        )?;
        let (next, step) =
            exploratory_update(spec, &params, &batch, critic, env.gamma, settings.eta, k)
                .map_err(|e| e.with_indices(k, j + 1))?;
        params = next;
        params_per_step.push(params.clone());
        tape.steps.push(step);
    }

    // Fresh rollouts under theta^(N+1) for the extrinsic gradient and the
    // performance estimate; the final extrinsic critic is used as-is.
    let mut final_rng = seeding::derive_rng(seed, &[tags::FINAL_ROLLOUTS, iteration, k as u64]);
    let final_trajectories = collect_batch(
        env,
        spec,
        &params,
        intrinsic,
        settings.final_episodes,
        &mut final_rng,
        &mut samples,
    )?;
    let perf_estimate = final_trajectories
        .iter()
        .map(|t| t.discounted_return(env.gamma))
        .sum::<f64>()
        / final_trajectories.len().max(1) as f64;

    let mut advantages = Vec::new();
    for traj in &final_trajectories {
        advantages.extend(td_advantages(
            &critic.spec,
            &critic.extrinsic,
            traj,
            env.gamma,
            RewardChannel::Extrinsic,
        ));
    }
    normalize_advantages(&mut advantages);
    let extrinsic_grad = policy_gradient(spec, &params, &final_trajectories, &advantages)
        .map_err(|e| e.with_indices(k, settings.n_updates + 1))?;
    if !extrinsic_grad.is_finite() {
        return Err(IrpoError::NonFiniteGradient {
            k,
            j: settings.n_updates + 1,
        });
    }

    Ok(ExploratoryRun {
        k,
        params_per_step,
        tape,
        perf_estimate,
        extrinsic_grad,
        final_trajectories,
        samples,
    })
}

/// Backpropagates a run's extrinsic gradient through its update chain.
pub fn backprop_through_updates(run: &ExploratoryRun) -> Result<ParamVector, IrpoError> {
    run.tape.backprop(&run.extrinsic_grad)
}
