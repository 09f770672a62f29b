//! Analytic testbed: strictly concave quadratic objectives `J(theta) =
//! -||theta - c||^2` whose gradients and Hessians are available in closed
//! form, so the optimizer can be exercised without any sampling.

use crate::numerics::{GradTape, NumericsError, ParamVector};

/// `J(theta) = -||theta - center||^2`: unique maximizer at `center`,
/// gradient `-2 (theta - center)`, Hessian `-2 I`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    pub center: Vec<f64>,
}

impl QuadraticObjective {
    pub fn new(center: Vec<f64>) -> Self {
        Self { center }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Records the objective on a tape, for the unrolled-update machinery.
    pub fn tape(&self, theta: &ParamVector) -> Result<GradTape, NumericsError> {
        if theta.len() != self.dim() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
                context: "quadratic objective dimension",
            });
        }
        let mut tape = GradTape::new(theta);
        let view = tape.param_view(0, theta.len());
        let shifted = tape.add_const(view, self.center.iter().map(|c| -c).collect());
        let sq = tape.squared_norm(shifted);
        let obj = tape.scale(sq, -1.0);
        tape.set_output(obj);
        Ok(tape)
    }
}

/// Closed-form value and gradient of a quadratic objective.
pub fn quad_eval(
    obj: &QuadraticObjective,
    theta: &[f64],
) -> Result<(f64, Vec<f64>), NumericsError> {
    if theta.len() != obj.dim() {
        return Err(NumericsError::DimensionMismatch {
            expected: obj.dim(),
            got: theta.len(),
            context: "quad_eval dimension",
        });
    }
    let mut value = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let d = theta[i] - obj.center[i];
        value -= d * d;
        grad[i] = -2.0 * d;
    }
    Ok((value, grad))
}
