//! Shared arithmetic kernels.
//!
//! The tape, the plain MLP evaluator, and the policy head all route through
//! these functions so that recorded and unrecorded evaluation of the same
//! computation produce bit-identical results.

/// `y = W x + b`; `w` is row-major with `y.len()` rows of `x.len()`.
pub(crate) fn affine(w: &[f64], b: &[f64], x: &[f64], y: &mut [f64]) {
    let in_dim = x.len();
    debug_assert_eq!(w.len(), in_dim * y.len());
    debug_assert_eq!(b.len(), y.len());
    for (o, yo) in y.iter_mut().enumerate() {
        let row = &w[o * in_dim..(o + 1) * in_dim];
        let mut acc = 0.0;
        for (wi, xi) in row.iter().zip(x.iter()) {
            acc += wi * xi;
        }
        *yo = acc + b[o];
    }
}

/// Tangent of `affine`: `ydot = W xdot + Wdot x + bdot`.
pub(crate) fn affine_tangent(
    w: &[f64],
    wdot: &[f64],
    bdot: &[f64],
    x: &[f64],
    xdot: &[f64],
    ydot: &mut [f64],
) {
    let in_dim = x.len();
    for (o, yo) in ydot.iter_mut().enumerate() {
        let row = &w[o * in_dim..(o + 1) * in_dim];
        let rowdot = &wdot[o * in_dim..(o + 1) * in_dim];
        let mut acc = 0.0;
        for i in 0..in_dim {
            acc += row[i] * xdot[i] + rowdot[i] * x[i];
        }
        *yo = acc + bdot[o];
    }
}

/// Reverse of `affine`: accumulates `xbar += W^T ybar`, `wbar += ybar x^T`,
/// `bbar += ybar`.
pub(crate) fn affine_backward(
    w: &[f64],
    x: &[f64],
    ybar: &[f64],
    xbar: &mut [f64],
    wbar: &mut [f64],
    bbar: &mut [f64],
) {
    let in_dim = x.len();
    for (o, &yb) in ybar.iter().enumerate() {
        if yb == 0.0 {
            continue;
        }
        let row = &w[o * in_dim..(o + 1) * in_dim];
        let wrow = &mut wbar[o * in_dim..(o + 1) * in_dim];
        for i in 0..in_dim {
            xbar[i] += row[i] * yb;
            wrow[i] += yb * x[i];
        }
        bbar[o] += yb;
    }
}

pub(crate) fn tanh_inplace(x: &mut [f64]) {
    for v in x {
        *v = v.tanh();
    }
}

/// `out = log_softmax(x)`, max-subtracted for overflow safety.
pub(crate) fn log_softmax(x: &[f64], out: &mut [f64]) {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (&xi, o) in x.iter().zip(out.iter_mut()) {
        *o = xi - max;
        sum += o.exp();
    }
    let lse = sum.ln();
    for o in out.iter_mut() {
        *o -= lse;
    }
}
