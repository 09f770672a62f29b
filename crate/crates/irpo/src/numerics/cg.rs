//! Conjugate-gradient solver for damped symmetric positive semi-definite
//! systems, used for the trust-region subproblem.

use super::{NumericsError, ParamVector};

/// Solution of `(A + damping * I) x = b`.
#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: ParamVector,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Solves `(A + damping * I) x = b` where `apply_a` computes `A v`.
///
/// Terminates when the residual drops below `1e-8 * ||b||` or after `iters`
/// iterations, whichever comes first. Any non-finite intermediate aborts with
/// a numerical-failure error so callers can fall back to the raw gradient
/// direction.
pub fn conjugate_gradient(
    mut apply_a: impl FnMut(&[f64]) -> Vec<f64>,
    b: &ParamVector,
    iters: usize,
    damping: f64,
) -> Result<CgSolution, NumericsError> {
    let n = b.len();
    let apply = |v: &[f64], apply_a: &mut dyn FnMut(&[f64]) -> Vec<f64>| -> Vec<f64> {
        let mut av = apply_a(v);
        assert_eq!(av.len(), n, "operator changed dimension");
        for (a, vi) in av.iter_mut().zip(v.iter()) {
            *a += damping * vi;
        }
        av
    };

    let b_norm = b.norm();
    let tol = 1e-8 * b_norm;
    let mut x = vec![0.0; n];
    let mut r = b.as_slice().to_vec();
    let mut p = r.clone();
    let mut rs_old: f64 = r.iter().map(|v| v * v).sum();
    let mut iterations = 0;

    if rs_old.sqrt() <= tol {
        return Ok(CgSolution {
            x: ParamVector::zeros(n),
            residual_norm: rs_old.sqrt(),
            iterations: 0,
        });
    }

    for _ in 0..iters {
        let ap = apply(&p, &mut apply_a);
        let p_ap: f64 = p.iter().zip(ap.iter()).map(|(a, b)| a * b).sum();
        if !p_ap.is_finite() || p_ap <= 0.0 {
            // Not SPD after damping (or overflow); report as numerical failure.
            return Err(NumericsError::NonFinite("conjugate_gradient curvature"));
        }
        let alpha = rs_old / p_ap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        if !rs_new.is_finite() {
            return Err(NumericsError::NonFinite("conjugate_gradient residual"));
        }
        iterations += 1;
        if rs_new.sqrt() <= tol {
            rs_old = rs_new;
            break;
        }
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }

    Ok(CgSolution {
        x: ParamVector::new(x)?,
        residual_norm: rs_old.sqrt(),
        iterations,
    })
}
