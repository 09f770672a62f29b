//! Categorical policy head over MLP logits.

use rand::Rng;

use super::{kernels, MlpSpec, NumericsError, ParamVector};

/// A stochastic discrete-action policy: MLP logits followed by softmax.
///
/// Borrowing wrapper; the parameters stay owned by the training loop.
#[derive(Debug, Clone, Copy)]
pub struct CategoricalPolicy<'a> {
    pub spec: &'a MlpSpec,
    pub params: &'a ParamVector,
}

impl<'a> CategoricalPolicy<'a> {
    pub fn new(spec: &'a MlpSpec, params: &'a ParamVector) -> Self {
        Self { spec, params }
    }

    pub fn logits(&self, obs: &[f64]) -> Result<Vec<f64>, NumericsError> {
        self.spec.eval(self.params, obs)
    }

    pub fn log_probs(&self, obs: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let logits = self.logits(obs)?;
        let mut lp = vec![0.0; logits.len()];
        kernels::log_softmax(&logits, &mut lp);
        Ok(lp)
    }

    /// Samples an action by inverse CDF, consuming exactly one uniform draw.
    pub fn sample(
        &self,
        obs: &[f64],
        rng: &mut impl Rng,
    ) -> Result<(usize, f64), NumericsError> {
        let lp = self.log_probs(obs)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut action = lp.len() - 1;
        for (a, &l) in lp.iter().enumerate() {
            acc += l.exp();
            if u < acc {
                action = a;
                break;
            }
        }
        Ok((action, lp[action]))
    }

    /// Greedy action (highest logit; ties resolve to the lowest index).
    pub fn argmax(&self, obs: &[f64]) -> Result<usize, NumericsError> {
        let logits = self.logits(obs)?;
        let mut best = 0;
        for (a, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = a;
            }
        }
        Ok(best)
    }
}

/// Exact KL divergence `KL(p_old || p_new)` between two categorical
/// distributions given as log-probability vectors.
pub fn categorical_kl(old_log_probs: &[f64], new_log_probs: &[f64]) -> f64 {
    old_log_probs
        .iter()
        .zip(new_log_probs.iter())
        .map(|(&lo, &ln)| {
            let p = lo.exp();
            if p > 0.0 {
                p * (lo - ln)
            } else {
                0.0
            }
        })
        .sum()
}
