//! Temperature-weighted aggregation of the backpropagated gradients.

use crate::numerics::ParamVector;

use super::unroll::{backprop_through_updates, ExploratoryRun};
use super::IrpoError;

/// The aggregated surrogate gradient with its softmax weights.
#[derive(Debug, Clone)]
pub struct IrpoGradient {
    pub vector: ParamVector,
    pub weights: Vec<f64>,
    pub tau: f64,
}

/// Softmax of `scores / tau`, computed with max-subtraction so large scores
/// cannot overflow. Weights are strictly positive and sum to one.
pub fn softmax_weights(scores: &[f64], tau: f64) -> Vec<f64> {
    assert!(tau > 0.0, "temperature must be positive");
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| ((s - max) / tau).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Aggregates the K backpropagated gradients with weights
/// `softmax(perf_estimate / tau)`.
pub fn irpo_gradient(runs: &[ExploratoryRun], tau: f64) -> Result<IrpoGradient, IrpoError> {
    if runs.is_empty() {
        return Err(IrpoError::NoRuns);
    }
    if !(0.0 < tau && tau <= 1.0) {
        return Err(IrpoError::BadTemperature(tau));
    }
    let scores: Vec<f64> = runs.iter().map(|r| r.perf_estimate).collect();
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(IrpoError::NonFinitePerformance);
    }
    let weights = softmax_weights(&scores, tau);
    let m = runs[0].extrinsic_grad.len();
    let mut vector = ParamVector::zeros(m);
    for (run, &w) in runs.iter().zip(weights.iter()) {
        let back = backprop_through_updates(run)?;
        vector.axpy(w, &back);
    }
    Ok(IrpoGradient {
        vector,
        weights,
        tau,
    })
}

/// Linear temperature annealing: 1.0 at step 0 down to `floor` at 10% of the
/// total budget, constant afterwards. The floor keeps the softmax defined
/// while acting as an argmax in practice.
pub fn anneal_tau(step: u64, total_steps: u64, floor: f64) -> f64 {
    assert!(total_steps > 0, "total_steps must be positive");
    let frac = step as f64 / (0.1 * total_steps as f64);
    if frac >= 1.0 {
        floor
    } else {
        1.0 - frac * (1.0 - floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_examples() {
        // Two scores one unit apart at tau = 1.
        let w = softmax_weights(&[1.0, 0.0], 1.0);
        assert!((w[0] - 0.731_058_578_630_0049).abs() <= 1e-12);
        assert!((w[1] - 0.268_941_421_369_9951).abs() <= 1e-12);

        // Equal scores split evenly.
        let w = softmax_weights(&[0.3, 0.3, 0.3, 0.3], 0.7);
        for x in &w {
            assert!((x - 0.25).abs() <= 1e-15);
        }

        // Max-subtraction keeps huge scores finite.
        let w = softmax_weights(&[5000.0, 4990.0], 1.0);
        assert!(w.iter().all(|x| x.is_finite()));
        assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sharpening_is_monotone_in_tau() {
        let scores = [0.9, 0.4, 0.1];
        let mut prev = 0.0;
        for tau in [1.0, 0.7, 0.4, 0.2, 0.1, 0.05] {
            let w = softmax_weights(&scores, tau);
            assert!(w[0] >= prev, "w_max must not decrease as tau shrinks");
            prev = w[0];
        }
        // Gap of 0.5 at tau = 0.05 exceeds 10 * tau: argmax weight >= 0.99.
        let w = softmax_weights(&scores, 0.05);
        assert!(w[0] >= 0.99);
    }

    #[test]
    fn anneal_examples() {
        assert_eq!(anneal_tau(0, 1000, 0.05), 1.0);
        assert!((anneal_tau(50, 1000, 0.05) - 0.525).abs() <= 1e-12);
        assert_eq!(anneal_tau(100, 1000, 0.05), 0.05);
        assert_eq!(anneal_tau(900, 1000, 0.05), 0.05);
    }
}
