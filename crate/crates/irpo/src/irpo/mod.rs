//! The bi-level optimizer: exploratory unrolls on intrinsic rewards, reverse
//! accumulation of the extrinsic gradients through the update chain, softmax
//! aggregation, and the KL-constrained base-policy update.

mod trust_region;
mod unroll;
mod weights;


pub use trust_region::{trust_region_step, FisherEstimator, TrustRegionOutcome};
pub use unroll::{
    ascent_step, backprop_through_updates, exploratory_update, policy_gradient,
    policy_objective_tape, run_exploratory_phase, ExplorationSettings, ExploratoryRun, TapeStep,
    UpdateTape,
};
pub use weights::{anneal_tau, irpo_gradient, softmax_weights, IrpoGradient};

use std::time::Instant;

use thiserror::Error;

use crate::critic::{CriticError, CriticPair};
use crate::envs::{GridError, GridSpec};
use crate::harness::evaluate::evaluate;
use crate::harness::metrics::MetricsRow;
use crate::harness::seeding::{self, tags};
use crate::intrinsic::IntrinsicRewardSet;
use crate::numerics::{MlpSpec, NumericsError, ParamVector};

#[derive(Debug, Error)]
pub enum IrpoError {
    #[error("non-finite gradient in exploratory run k={k}, update j={j}")]
    NonFiniteGradient { k: usize, j: usize },
    #[error("no exploratory runs to aggregate")]
    NoRuns,
    #[error("temperature {0} outside (0, 1]")]
    BadTemperature(f64),
    #[error("non-finite performance estimate")]
    NonFinitePerformance,
    #[error("delta_kl must be positive, got {0}")]
    BadDeltaKl(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Critic(#[from] CriticError),
    #[error(transparent)]
    Env(#[from] GridError),
}

impl IrpoError {
    /// Attaches run/update indices to gradient failures raised lower down.
    fn with_indices(self, k: usize, j: usize) -> Self {
        match self {
            IrpoError::NonFiniteGradient { .. } => IrpoError::NonFiniteGradient { k, j },
            other => other,
        }
    }
}

/// Algorithm hyperparameters with the experiment defaults baked in.
#[derive(Debug, Clone)]
pub struct IrpoConfig {
    /// N, exploratory updates per intrinsic reward.
    pub n_updates: usize,
    /// Exploratory learning rate.
    pub eta: f64,
    /// Trust-region KL threshold for the base update.
    pub delta_kl: f64,
    /// Temperature floor for the annealing schedule.
    pub tau_floor: f64,
    pub episodes_per_update: usize,
    pub final_episodes: usize,
    pub critic_lr: f64,
    pub critic_epochs: usize,
    /// Lambda for the critic's bootstrapped targets.
    pub lambda: f64,
    pub cg_iters: usize,
    pub cg_damping: f64,
    /// Cap on the state batch used for Fisher estimation.
    pub fisher_max_states: usize,
}

impl Default for IrpoConfig {
    fn default() -> Self {
        Self {
            n_updates: 5,
            eta: 1e-2,
            delta_kl: 1e-3,
            tau_floor: 0.05,
            episodes_per_update: 8,
            final_episodes: 16,
            critic_lr: 1e-3,
            critic_epochs: 3,
            lambda: 0.95,
            cg_iters: 10,
            cg_damping: 1e-2,
            fisher_max_states: 1024,
        }
    }
}

impl IrpoConfig {
    pub fn exploration_settings(&self) -> ExplorationSettings {
        ExplorationSettings {
            n_updates: self.n_updates,
            eta: self.eta,
            episodes_per_update: self.episodes_per_update,
            final_episodes: self.final_episodes,
            critic_lr: self.critic_lr,
            critic_epochs: self.critic_epochs,
            lambda: self.lambda,
        }
    }
}

/// Environment, budget, and bookkeeping for one training run.
pub struct TrainContext<'a> {
    pub env: &'a GridSpec,
    pub intrinsic: &'a IntrinsicRewardSet,
    pub policy_spec: &'a MlpSpec,
    /// Total environment-sample budget; every training transition counts.
    pub budget: u64,
    pub eval_episodes: usize,
    /// Evaluate when this many samples have passed since the last evaluation
    /// (0 = every iteration). Rows between evaluations carry the last values.
    pub eval_interval: u64,
    pub seed: u64,
}

/// Hook invoked once per iteration after the surrogate gradient is formed;
/// the gradient-blending baseline uses it to mix in the true gradient.
pub trait BaseGradientHook {
    #[allow(clippy::too_many_arguments)]
    fn adjust(
        &mut self,
        iteration: u64,
        saw_positive_reward: bool,
        gradient: ParamVector,
        env: &GridSpec,
        policy_spec: &MlpSpec,
        base_params: &ParamVector,
        samples_used: &mut u64,
        seed: u64,
    ) -> Result<ParamVector, IrpoError>;
}

/// Outcome of a full training run.
pub struct TrainResult {
    pub rows: Vec<MetricsRow>,
    /// Final base-policy parameters.
    pub base_params: ParamVector,
    /// The output artifact: final parameters of the best exploratory run of
    /// the last iteration (the policy that evaluation reports).
    pub output_params: ParamVector,
    pub samples_used: u64,
    pub iterations: u64,
}

/// Index of the best run by performance estimate (ties resolve to lowest k).
pub fn best_run_index(runs: &[ExploratoryRun]) -> usize {
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.perf_estimate > runs[best].perf_estimate {
            best = i;
        }
    }
    best
}

/// Gathers Fisher states from the final rollouts of all runs in k-order,
/// stride-subsampled down to at most `cap` states.
fn fisher_states(runs: &[ExploratoryRun], cap: usize) -> Vec<Vec<f64>> {
    let mut all = Vec::new();
    for run in runs {
        for traj in &run.final_trajectories {
            for t in &traj.transitions {
                all.push(t.obs.clone());
            }
        }
    }
    if all.len() <= cap || cap == 0 {
        return all;
    }
    let stride = all.len().div_ceil(cap);
    all.into_iter().step_by(stride).collect()
}

/// Runs the full training loop until the sample budget is exhausted.
pub fn train(
    ctx: &TrainContext,
    cfg: &IrpoConfig,
    mut hook: Option<&mut dyn BaseGradientHook>,
    mut sink: Option<&mut dyn FnMut(&MetricsRow)>,
) -> Result<TrainResult, IrpoError> {
    let start = Instant::now();
    let k = ctx.intrinsic.k();
    let mut init_rng = seeding::derive_rng(ctx.seed, &[tags::POLICY_INIT]);
    let mut base = ctx.policy_spec.init_params(&mut init_rng, 0.01);
    let mut critics: Vec<CriticPair> = (0..k)
        .map(|i| {
            let mut rng = seeding::derive_rng(ctx.seed, &[tags::CRITIC_INIT, i as u64]);
            CriticPair::new(ctx.env.observe(&ctx.env.initial_state()).len(), &mut rng)
        })
        .collect();

    let mut rows = Vec::new();
    let mut samples_used: u64 = 0;
    let mut iteration: u64 = 0;
    let mut output_params = base.clone();
    let mut last_eval: Option<(f64, f64)> = None;
    let mut next_eval_mark = 0u64;

    while samples_used < ctx.budget {
        iteration += 1;
        let tau = anneal_tau(samples_used, ctx.budget, cfg.tau_floor);

        let runs = run_exploratory_phase(
            ctx.policy_spec,
            &base,
            ctx.env,
            ctx.intrinsic,
            &mut critics,
            &cfg.exploration_settings(),
            ctx.seed,
            iteration,
        )?;
        for run in &runs {
            samples_used += run.samples;
        }

        let gradient = irpo_gradient(&runs, tau)?;
        let omega = gradient.weights.clone();

        let saw_reward = runs
            .iter()
            .flat_map(|r| r.final_trajectories.iter())
            .any(|t| t.reached_goal());
        let vector = match hook.as_deref_mut() {
            Some(h) => h.adjust(
                iteration,
                saw_reward,
                gradient.vector,
                ctx.env,
                ctx.policy_spec,
                &base,
                &mut samples_used,
                ctx.seed,
            )?,
            None => gradient.vector,
        };

        let states = fisher_states(&runs, cfg.fisher_max_states);
        let fisher = FisherEstimator::new(ctx.policy_spec, &base, states);
        let outcome = trust_region_step(
            &base,
            &vector,
            cfg.delta_kl,
            |v| fisher.fvp(v),
            |candidate| fisher.mean_kl(candidate),
            cfg.cg_iters,
            cfg.cg_damping,
        )?;
        base = outcome.params;

        let best = best_run_index(&runs);
        output_params = runs[best].final_params().clone();

        if ctx.eval_interval == 0 || samples_used >= next_eval_mark {
            let eval = evaluate(ctx.policy_spec, &output_params, ctx.env, ctx.eval_episodes);
            last_eval = Some((eval.mean_return, eval.success_rate));
            next_eval_mark = samples_used + ctx.eval_interval;
        }
        let (eval_return, success) = last_eval.unwrap_or((0.0, 0.0));

        let row = MetricsRow {
            samples: samples_used,
            iteration,
            eval_return,
            success,
            kl_step: outcome.measured_kl,
            tau,
            omega,
            wall_s: start.elapsed().as_secs_f64(),
        };
        if let Some(s) = sink.as_deref_mut() {
            s(&row);
        }
        rows.push(row);
    }

    if samples_used > ctx.budget {
        log::info!(
            "budget overshoot: {} samples used vs {} budgeted (one in-flight iteration)",
            samples_used,
            ctx.budget
        );
    }

    Ok(TrainResult {
        rows,
        base_params: base,
        output_params,
        samples_used,
        iterations: iteration,
    })
}
