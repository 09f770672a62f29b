//! KL-constrained trust-region update for the base policy.
//!
//! The step direction solves `F d = g` by conjugate gradients on
//! Fisher-vector products; the Fisher is the Hessian of the mean KL between
//! the frozen pre-update policy and itself, recorded on a tape over a batch
//! of sampled states, so `F v` is one Hessian-vector product. The step is
//! scaled to the trust-region boundary and backtracked (halving, at most 10
//! times) until the measured mean KL is within the threshold.

use log::warn;

use crate::numerics::policy::{categorical_kl, CategoricalPolicy};
use crate::numerics::{conjugate_gradient, GradTape, MlpSpec, NumericsError, ParamVector};

use super::IrpoError;

const MAX_BACKTRACKS: usize = 10;

/// Mean-KL tape and reference distributions over a state batch.
pub struct FisherEstimator<'a> {
    spec: &'a MlpSpec,
    states: Vec<Vec<f64>>,
    ref_log_probs: Vec<Vec<f64>>,
    kl_tape: GradTape,
}

impl<'a> FisherEstimator<'a> {
    /// Records `mean_s KL(pi_ref(s) || pi_theta(s))` at `theta = ref`, whose
    /// Hessian in `theta` is exactly the Fisher information matrix.
    pub fn new(spec: &'a MlpSpec, params: &ParamVector, states: Vec<Vec<f64>>) -> Self {
        assert!(!states.is_empty(), "Fisher estimation needs states");
        let mut tape = GradTape::new(params);
        let mut ref_log_probs = Vec::with_capacity(states.len());
        let mut terms = Vec::with_capacity(states.len());
        let coeff = 1.0 / states.len() as f64;
        for obs in &states {
            let out = tape.mlp(spec, obs);
            let lp = tape.log_softmax(out);
            let lp_values = tape.value(lp).to_vec();
            let probs: Vec<f64> = lp_values.iter().map(|l| l.exp()).collect();
            let kl = tape.kl_from_ref(lp, probs);
            terms.push((coeff, kl));
            ref_log_probs.push(lp_values);
        }
        let obj = tape.weighted_sum(terms);
        tape.set_output(obj);
        Self {
            spec,
            states,
            ref_log_probs,
            kl_tape: tape,
        }
    }

    /// Fisher-vector product `F v`.
    pub fn fvp(&self, v: &ParamVector) -> Result<ParamVector, NumericsError> {
        self.kl_tape.hvp(v)
    }

    /// Exact empirical mean KL from the reference policy to `params`.
    pub fn mean_kl(&self, params: &ParamVector) -> f64 {
        let policy = CategoricalPolicy::new(self.spec, params);
        let mut acc = 0.0;
        for (obs, ref_lp) in self.states.iter().zip(self.ref_log_probs.iter()) {
            let new_lp = policy.log_probs(obs).expect("policy shape matches");
            acc += categorical_kl(ref_lp, &new_lp);
        }
        acc / self.states.len() as f64
    }
}

/// Outcome of one trust-region update.
#[derive(Debug, Clone)]
pub struct TrustRegionOutcome {
    pub params: ParamVector,
    /// Measured mean KL of the accepted step (0 when no step was taken).
    pub measured_kl: f64,
    pub accepted: bool,
    pub backtracks: usize,
    /// True when conjugate gradients failed and the raw gradient direction
    /// was used instead.
    pub used_fallback: bool,
}

/// Takes a natural-gradient step of at most `delta_kl` measured KL.
///
/// `fvp` applies the Fisher; `measure_kl` reports the empirical mean KL
/// between the current policy and a candidate. A zero gradient returns the
/// parameters unchanged. If every backtrack exceeds the threshold the
/// parameters are returned unchanged with a warning.
pub fn trust_region_step(
    params: &ParamVector,
    gradient: &ParamVector,
    delta_kl: f64,
    mut fvp: impl FnMut(&ParamVector) -> Result<ParamVector, NumericsError>,
    measure_kl: impl Fn(&ParamVector) -> f64,
    cg_iters: usize,
    damping: f64,
) -> Result<TrustRegionOutcome, IrpoError> {
    if delta_kl <= 0.0 {
        return Err(IrpoError::BadDeltaKl(delta_kl));
    }
    let unchanged = |used_fallback: bool, backtracks: usize| TrustRegionOutcome {
        params: params.clone(),
        measured_kl: 0.0,
        accepted: false,
        backtracks,
        used_fallback,
    };
    if gradient.norm() == 0.0 {
        return Ok(unchanged(false, 0));
    }

    let (mut direction, mut used_fallback) =
        match conjugate_gradient(|v| {
            // A non-finite iterate or operator failure surfaces as NaN so the
            // solver reports a numerical failure instead of panicking.
            match ParamVector::new(v.to_vec()) {
                Ok(pv) => fvp(&pv)
                    .map(|x| x.into_vec())
                    .unwrap_or_else(|_| vec![f64::NAN; v.len()]),
                Err(_) => vec![f64::NAN; v.len()],
            }
        }, gradient, cg_iters, damping)
        {
            Ok(sol) => (sol.x, false),
            Err(err) => {
                warn!("conjugate gradient failed ({err}); falling back to the raw gradient direction");
                (gradient.clone(), true)
            }
        };

    // Curvature along the chosen direction, under the damped operator.
    let mut curvature = match fvp(&direction) {
        Ok(fd) => direction.dot(&fd) + damping * direction.dot(&direction),
        Err(_) => f64::NAN,
    };
    if !curvature.is_finite() || curvature <= 0.0 {
        if used_fallback {
            warn!("non-positive curvature along the fallback direction; skipping the update");
            return Ok(unchanged(true, 0));
        }
        warn!("non-positive curvature along the CG direction; falling back to the raw gradient");
        direction = gradient.clone();
        used_fallback = true;
        curvature = match fvp(&direction) {
            Ok(fd) => direction.dot(&fd) + damping * direction.dot(&direction),
            Err(_) => f64::NAN,
        };
        if !curvature.is_finite() || curvature <= 0.0 {
            return Ok(unchanged(true, 0));
        }
    }

    let scale = (2.0 * delta_kl / curvature).sqrt();
    let mut step = 1.0;
    for backtrack in 0..=MAX_BACKTRACKS {
        let mut candidate = params.clone();
        candidate.axpy(scale * step, &direction);
        if candidate.is_finite() {
            let kl = measure_kl(&candidate);
            if kl.is_finite() && kl <= delta_kl {
                return Ok(TrustRegionOutcome {
                    params: candidate,
                    measured_kl: kl,
                    accepted: true,
                    backtracks: backtrack,
                    used_fallback,
                });
            }
        }
        step *= 0.5;
    }
    warn!("trust-region backtracking exhausted; keeping the current policy");
    Ok(unchanged(used_fallback, MAX_BACKTRACKS))
}
