//! Episode collection under a stochastic policy.

use rand::Rng;

use crate::numerics::kernels;
use crate::numerics::policy::CategoricalPolicy;

use super::grid::{step, Action, GridError, GridSpec};

/// Anything that maps an observation to action logits (length 4 here).
pub trait PolicyLogits {
    fn logits(&self, obs: &[f64]) -> Vec<f64>;
}

impl PolicyLogits for CategoricalPolicy<'_> {
    fn logits(&self, obs: &[f64]) -> Vec<f64> {
        CategoricalPolicy::logits(self, obs).expect("policy shape matches observation")
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> PolicyLogits for F {
    fn logits(&self, obs: &[f64]) -> Vec<f64> {
        self(obs)
    }
}

/// Evaluates the K intrinsic reward signals on a transition.
pub trait IntrinsicEval {
    fn k(&self) -> usize;
    fn transition_rewards(&self, obs: &[f64], next_obs: &[f64]) -> Vec<f64>;
}

/// The empty intrinsic set (K = 0).
pub struct NoIntrinsic;

impl IntrinsicEval for NoIntrinsic {
    fn k(&self) -> usize {
        0
    }
    fn transition_rewards(&self, _obs: &[f64], _next_obs: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// One environment transition as recorded during a rollout.
#[derive(Debug, Clone)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub extrinsic_reward: f64,
    /// Length-K vector of per-transition intrinsic signals.
    pub intrinsic_rewards: Vec<f64>,
    pub log_prob: f64,
    pub terminal: bool,
    pub next_obs: Vec<f64>,
}

impl Transition {
    /// Whether this transition entered the goal (the only positive extrinsic
    /// reward in unshaped environments).
    pub fn reached_goal(&self) -> bool {
        self.extrinsic_reward > 0.0
    }
}

/// A single episode.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn reached_goal(&self) -> bool {
        self.transitions.iter().any(|t| t.reached_goal())
    }

    /// Discounted extrinsic return from the initial state.
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        let mut acc = 0.0;
        let mut d = 1.0;
        for t in &self.transitions {
            acc += d * t.extrinsic_reward;
            d *= gamma;
        }
        acc
    }
}

/// Samples an index from a categorical given log-probabilities, consuming
/// exactly one uniform draw.
pub(crate) fn sample_from_log_probs(log_probs: &[f64], rng: &mut impl Rng) -> (usize, f64) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut action = log_probs.len() - 1;
    for (a, &l) in log_probs.iter().enumerate() {
        acc += l.exp();
        if u < acc {
            action = a;
            break;
        }
    }
    (action, log_probs[action])
}

/// Runs one episode, at most `spec.horizon` transitions. Every transition
/// carries all K intrinsic rewards evaluated on it, and `samples` is advanced
/// by the trajectory length.
pub fn rollout(
    spec: &GridSpec,
    policy: &impl PolicyLogits,
    intrinsic: &dyn IntrinsicEval,
    rng: &mut impl Rng,
    samples: &mut u64,
) -> Result<Trajectory, GridError> {
    let mut state = spec.initial_state();
    let mut traj = Trajectory::default();
    loop {
        let obs = spec.observe(&state);
        let logits = policy.logits(&obs);
        debug_assert_eq!(logits.len(), 4, "policy must emit 4 action logits");
        let mut log_probs = vec![0.0; logits.len()];
        kernels::log_softmax(&logits, &mut log_probs);
        let (action, log_prob) = sample_from_log_probs(&log_probs, rng);
        let (next, reward, terminal) = step(spec, &state, Action::from_index(action))?;
        let next_obs = spec.observe(&next);
        let intrinsic_rewards = intrinsic.transition_rewards(&obs, &next_obs);
        traj.transitions.push(Transition {
            obs,
            action,
            extrinsic_reward: reward,
            intrinsic_rewards,
            log_prob,
            terminal,
            next_obs,
        });
        *samples += 1;
        if terminal {
            break;
        }
        state = next;
    }
    Ok(traj)
}
