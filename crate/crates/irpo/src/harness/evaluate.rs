//! Evaluation protocol: greedy-mode episodes, separate from training noise.

use crate::envs::{step, Action, GridSpec};
use crate::numerics::policy::CategoricalPolicy;
use crate::numerics::{MlpSpec, ParamVector};

/// Result of an evaluation pass.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub mean_return: f64,
    pub success_rate: f64,
}

/// Runs `episodes` greedy (argmax-action) episodes and reports the mean
/// discounted return and the fraction that reach the goal within the horizon.
pub fn evaluate(
    spec: &MlpSpec,
    params: &ParamVector,
    env: &GridSpec,
    episodes: usize,
) -> Evaluation {
    let policy = CategoricalPolicy::new(spec, params);
    let mut total_return = 0.0;
    let mut successes = 0usize;
    for _ in 0..episodes.max(1) {
        let mut state = env.initial_state();
        let mut ep_return = 0.0;
        let mut discount = 1.0;
        loop {
            let obs = env.observe(&state);
            let action = policy.argmax(&obs).expect("policy shape matches env");
            let (next, reward, terminal) =
                step(env, &state, Action::from_index(action)).expect("non-terminal state");
            ep_return += discount * reward;
            discount *= env.gamma;
            if reward > 0.0 {
                successes += 1;
            }
            if terminal {
                break;
            }
            state = next;
        }
        total_return += ep_return;
    }
    let n = episodes.max(1) as f64;
    Evaluation {
        mean_return: total_return / n,
        success_rate: successes as f64 / n,
    }
}
