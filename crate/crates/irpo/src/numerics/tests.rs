use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::policy::{categorical_kl, CategoricalPolicy};
use super::*;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / (scale + 1e-12)
}

fn random_params(spec: &MlpSpec, rng: &mut ChaCha8Rng, scale: f64) -> ParamVector {
    let v: Vec<f64> = (0..spec.param_count())
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    ParamVector::new(v).unwrap()
}

// ---------------------------------------------------------------- mlp_forward

#[test]
fn zero_params_give_zero_output() {
    let spec = MlpSpec::new(3, &[4], 2);
    let params = ParamVector::zeros(spec.param_count());
    let (out, _) = mlp_forward(&spec, &params, &[0.3, -0.7, 1.1]).unwrap();
    assert_eq!(out, vec![0.0, 0.0]);
}

#[test]
fn identity_linear_layer_passes_input_through() {
    let spec = MlpSpec::new(2, &[], 2);
    // W = I, b = 0 in row-major layout.
    let params = ParamVector::new(vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
    let (out, _) = mlp_forward(&spec, &params, &[0.25, -3.5]).unwrap();
    assert_eq!(out, vec![0.25, -3.5]);
}

/// Independent straight-line re-evaluation of the layer formulas, written
/// without the shared kernels.
fn straight_line_mlp(spec: &MlpSpec, params: &[f64], input: &[f64]) -> Vec<f64> {
    let mut dims = vec![spec.input_dim];
    dims.extend_from_slice(&spec.hidden_dims);
    dims.push(spec.output_dim);
    let mut x = input.to_vec();
    let mut off = 0;
    for l in 0..dims.len() - 1 {
        let (ind, outd) = (dims[l], dims[l + 1]);
        let mut y = vec![0.0; outd];
        for o in 0..outd {
            let mut s = 0.0;
            for i in 0..ind {
                s += params[off + o * ind + i] * x[i];
            }
            y[o] = s + params[off + ind * outd + o];
        }
        off += (ind + 1) * outd;
        if l < dims.len() - 2 {
            for v in &mut y {
                *v = v.tanh();
            }
        }
        x = y;
    }
    x
}

#[test]
fn forward_matches_straight_line_reimplementation() {
    let spec = MlpSpec::new(3, &[5, 4], 2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = random_params(&spec, &mut rng, 0.8);
    let input = [0.2, -0.4, 0.9];
    let (out, _) = mlp_forward(&spec, &params, &input).unwrap();
    let oracle = straight_line_mlp(&spec, params.as_slice(), &input);
    for (a, b) in out.iter().zip(oracle.iter()) {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn forward_rejects_dimension_mismatch() {
    let spec = MlpSpec::new(3, &[4], 2);
    let params = ParamVector::zeros(spec.param_count());
    assert!(matches!(
        mlp_forward(&spec, &params, &[1.0, 2.0]),
        Err(NumericsError::DimensionMismatch { .. })
    ));
    let bad = ParamVector::zeros(spec.param_count() + 1);
    assert!(mlp_forward(&spec, &bad, &[1.0, 2.0, 3.0]).is_err());
}

// ----------------------------------------------------------------------- grad

#[test]
fn constant_output_has_zero_upstream_gradient() {
    // Zero final-layer weights make the output constant in the first layer.
    let spec = MlpSpec::new(2, &[3], 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut params = random_params(&spec, &mut rng, 0.5);
    let final_layer = spec.layers().last().unwrap();
    for i in final_layer.w_offset..final_layer.b_offset + final_layer.out_dim {
        params[i] = 0.0;
    }
    let (_, tape) = mlp_forward(&spec, &params, &[0.4, -0.2]).unwrap();
    let g = tape.grad(&[1.0]).unwrap();
    let first = spec.layers().next().unwrap();
    for i in first.w_offset..first.b_offset + first.out_dim {
        assert_eq!(g[i], 0.0);
    }
}

#[test]
fn quadratic_gradient_is_two_theta() {
    let theta = ParamVector::new(vec![0.5, -1.25, 2.0]).unwrap();
    let mut tape = GradTape::new(&theta);
    let view = tape.param_view(0, 3);
    let sq = tape.squared_norm(view);
    tape.set_output(sq);
    let g = tape.grad_scalar().unwrap();
    assert_eq!(g.as_slice(), &[1.0, -2.5, 4.0]);
}

/// Central finite differences over a scalar objective built by `build`.
fn fd_gradient(
    build: &dyn Fn(&ParamVector) -> GradTape,
    theta: &ParamVector,
    step: f64,
) -> Vec<f64> {
    let mut g = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let mut plus = theta.clone();
        plus[i] += step;
        let mut minus = theta.clone();
        minus[i] -= step;
        let fp = build(&plus).output_value()[0];
        let fm = build(&minus).output_value()[0];
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}

#[test]
fn log_softmax_head_gradient_matches_finite_differences() {
    let spec = MlpSpec::new(3, &[6, 5], 4);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..100 {
        let params = random_params(&spec, &mut rng, 0.7);
        let obs: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let action = rng.random_range(0..4usize);
        let weight = rng.random_range(-2.0..2.0);
        let build = |p: &ParamVector| {
            let mut tape = GradTape::new(p);
            let out = tape.mlp(&spec, &obs);
            let lp = tape.log_softmax(out);
            let picked = tape.index(lp, action);
            let obj = tape.weighted_sum(vec![(weight, picked)]);
            tape.set_output(obj);
            tape
        };
        let g = build(&params).grad_scalar().unwrap();
        let fd = fd_gradient(&build, &params, 1e-5);
        assert!(
            rel_err(g.as_slice(), &fd) <= 1e-4,
            "trial {trial}: rel err {}",
            rel_err(g.as_slice(), &fd)
        );
    }
}

#[test]
fn gaussian_head_gradient_matches_finite_differences() {
    // MLP outputs [mean, log_std] for a 2-d diagonal Gaussian.
    let spec = MlpSpec::new(2, &[5], 4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let params = random_params(&spec, &mut rng, 0.6);
        let obs: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let action: Vec<f64> = (0..2).map(|_| rng.random_range(-1.5..1.5)).collect();
        let build = |p: &ParamVector| {
            let mut tape = GradTape::new(p);
            let out = tape.mlp(&spec, &obs);
            let lp = tape.gaussian_log_prob(out, &action);
            tape.set_output(lp);
            tape
        };
        let g = build(&params).grad_scalar().unwrap();
        let fd = fd_gradient(&build, &params, 1e-5);
        assert!(
            rel_err(g.as_slice(), &fd) <= 1e-4,
            "trial {trial}: rel err {}",
            rel_err(g.as_slice(), &fd)
        );
    }
}

#[test]
fn grad_rejects_bad_seed_length() {
    let spec = MlpSpec::new(2, &[], 2);
    let params = ParamVector::zeros(spec.param_count());
    let (_, tape) = mlp_forward(&spec, &params, &[1.0, 1.0]).unwrap();
    assert!(matches!(
        tape.grad(&[1.0]),
        Err(NumericsError::DimensionMismatch { .. })
    ));
}

// ------------------------------------------------------------------------ hvp

fn neg_sq_dist_tape(theta: &ParamVector, center: &[f64]) -> GradTape {
    let mut tape = GradTape::new(theta);
    let view = tape.param_view(0, theta.len());
    let shifted = tape.add_const(view, center.iter().map(|c| -c).collect());
    let sq = tape.squared_norm(shifted);
    let obj = tape.scale(sq, -1.0);
    tape.set_output(obj);
    tape
}

#[test]
fn hvp_of_negative_norm_is_minus_two_v() {
    let theta = ParamVector::new(vec![0.7, -0.3]).unwrap();
    let tape = neg_sq_dist_tape(&theta, &[0.0, 0.0]);
    let v = ParamVector::new(vec![1.5, -2.0]).unwrap();
    let hv = tape.hvp(&v).unwrap();
    assert_eq!(hv.as_slice(), &[-3.0, 4.0]);
}

#[test]
fn hvp_of_shifted_quadratic_is_center_independent() {
    let theta = ParamVector::new(vec![0.0, 0.0]).unwrap();
    let tape = neg_sq_dist_tape(&theta, &[0.0, -2.0]);
    let v = ParamVector::new(vec![0.25, 4.0]).unwrap();
    let hv = tape.hvp(&v).unwrap();
    assert_eq!(hv.as_slice(), &[-0.5, -8.0]);
}

fn log_prob_objective<'a>(
    spec: &'a MlpSpec,
    obs: &'a [Vec<f64>],
    actions: &'a [usize],
    weights: &'a [f64],
) -> impl Fn(&ParamVector) -> GradTape + 'a {
    move |p: &ParamVector| {
        let mut tape = GradTape::new(p);
        let mut terms = Vec::new();
        for ((o, &a), &w) in obs.iter().zip(actions.iter()).zip(weights.iter()) {
            let out = tape.mlp(spec, o);
            let lp = tape.log_softmax(out);
            let picked = tape.index(lp, a);
            terms.push((w, picked));
        }
        let obj = tape.weighted_sum(terms);
        tape.set_output(obj);
        tape
    }
}

#[test]
fn hvp_matches_finite_difference_of_gradient() {
    let spec = MlpSpec::new(2, &[4, 3], 3);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let obs: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let actions: Vec<usize> = (0..5).map(|_| rng.random_range(0..3usize)).collect();
    let weights: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let build = log_prob_objective(&spec, &obs, &actions, &weights);

    for trial in 0..20 {
        let params = random_params(&spec, &mut rng, 0.6);
        let v = random_params(&spec, &mut rng, 1.0);
        let hv = build(&params).hvp(&v).unwrap();

        let eps = 1e-4;
        let mut plus = params.clone();
        plus.axpy(eps, &v);
        let mut minus = params.clone();
        minus.axpy(-eps, &v);
        let gp = build(&plus).grad_scalar().unwrap();
        let gm = build(&minus).grad_scalar().unwrap();
        let fd: Vec<f64> = gp
            .as_slice()
            .iter()
            .zip(gm.as_slice())
            .map(|(a, b)| (a - b) / (2.0 * eps))
            .collect();
        assert!(
            rel_err(hv.as_slice(), &fd) <= 1e-3,
            "trial {trial}: rel err {}",
            rel_err(hv.as_slice(), &fd)
        );
    }
}

#[test]
fn hvp_is_bilinear() {
    let spec = MlpSpec::new(2, &[4], 3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let obs = vec![vec![0.3, -0.8]];
    let actions = vec![1];
    let weights = vec![1.0];
    let build = log_prob_objective(&spec, &obs, &actions, &weights);
    let params = random_params(&spec, &mut rng, 0.5);
    let tape = build(&params);
    let v = random_params(&spec, &mut rng, 1.0);
    let w = random_params(&spec, &mut rng, 1.0);
    let (alpha, beta) = (0.7, -1.3);

    let mut combo = ParamVector::zeros(v.len());
    combo.axpy(alpha, &v);
    combo.axpy(beta, &w);
    let lhs = tape.hvp(&combo).unwrap();
    let hv = tape.hvp(&v).unwrap();
    let hw = tape.hvp(&w).unwrap();
    let mut rhs = ParamVector::zeros(v.len());
    rhs.axpy(alpha, &hv);
    rhs.axpy(beta, &hw);
    assert!(rel_err(lhs.as_slice(), rhs.as_slice()) <= 1e-10);
}

#[test]
fn hvp_is_symmetric_as_a_bilinear_form() {
    let spec = MlpSpec::new(3, &[5], 4);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let obs: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let actions = vec![0, 2, 3];
    let weights = vec![0.5, -1.0, 0.8];
    let build = log_prob_objective(&spec, &obs, &actions, &weights);
    for _ in 0..10 {
        let params = random_params(&spec, &mut rng, 0.5);
        let tape = build(&params);
        let v = random_params(&spec, &mut rng, 1.0);
        let w = random_params(&spec, &mut rng, 1.0);
        let whv = w.dot(&tape.hvp(&v).unwrap());
        let vhw = v.dot(&tape.hvp(&w).unwrap());
        let scale = whv.abs().max(vhw.abs()).max(1e-12);
        assert!((whv - vhw).abs() / scale <= 1e-8, "{whv} vs {vhw}");
    }
}

#[test]
fn hvp_rejects_non_scalar_objective() {
    let spec = MlpSpec::new(2, &[], 2);
    let params = ParamVector::zeros(spec.param_count());
    let (_, tape) = mlp_forward(&spec, &params, &[1.0, 1.0]).unwrap();
    let v = ParamVector::zeros(spec.param_count());
    assert!(matches!(
        tape.hvp(&v),
        Err(NumericsError::NonScalarObjective(2))
    ));
}

// ------------------------------------------------------------------------- cg

#[test]
fn cg_identity_operator() {
    let b = ParamVector::new(vec![3.0, -1.0, 0.5]).unwrap();
    let sol = conjugate_gradient(|v| v.to_vec(), &b, 50, 0.25).unwrap();
    for (x, bv) in sol.x.as_slice().iter().zip(b.as_slice()) {
        assert!((x - bv / 1.25).abs() <= 1e-10);
    }
}

#[test]
fn cg_diagonal_solve() {
    let b = ParamVector::new(vec![1.0, 1.0, 1.0]).unwrap();
    let diag = [1.0, 2.0, 4.0];
    let sol = conjugate_gradient(
        |v| v.iter().zip(diag.iter()).map(|(x, d)| x * d).collect(),
        &b,
        50,
        0.0,
    )
    .unwrap();
    let expect = [1.0, 0.5, 0.25];
    for (x, e) in sol.x.as_slice().iter().zip(expect.iter()) {
        assert!((x - e).abs() <= 1e-10);
    }
    assert!(sol.residual_norm <= 1e-8 * b.norm());
}

/// Dense Gaussian-elimination solve, the independent oracle for CG.
fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    x
}

#[test]
fn cg_matches_dense_solver_on_random_spd_system() {
    let n = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    // A = M^T M + I is SPD.
    let m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in 0..n {
                s += m[k][i] * m[k][j];
            }
            a[i][j] = s;
        }
    }
    let b_vec: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b = ParamVector::new(b_vec.clone()).unwrap();
    let sol = conjugate_gradient(
        |v| {
            (0..n)
                .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum())
                .collect()
        },
        &b,
        200,
        0.0,
    )
    .unwrap();
    let oracle = dense_solve(&a, &b_vec);
    assert!(rel_err(sol.x.as_slice(), &oracle) <= 1e-6);
}

#[test]
fn cg_reports_non_finite_failure() {
    let b = ParamVector::new(vec![1.0, 1.0]).unwrap();
    let res = conjugate_gradient(|_| vec![f64::NAN, f64::NAN], &b, 10, 0.0);
    assert!(matches!(res, Err(NumericsError::NonFinite(_))));
}

// -------------------------------------------------------------------- sym_eig

#[test]
fn eig_identity() {
    let a = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let eig = sym_eig(&a).unwrap();
    for v in &eig.values {
        assert!((v - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn eig_path_graph_laplacian() {
    let a = vec![
        vec![1.0, -1.0, 0.0],
        vec![-1.0, 2.0, -1.0],
        vec![0.0, -1.0, 1.0],
    ];
    let eig = sym_eig(&a).unwrap();
    let expect = [0.0, 1.0, 3.0];
    for (v, e) in eig.values.iter().zip(expect.iter()) {
        assert!((v - e).abs() <= 1e-8, "{v} vs {e}");
        // Characteristic-polynomial oracle: det(A - lambda I) = 0.
        let l = *e;
        let det = (1.0 - l) * ((2.0 - l) * (1.0 - l) - 1.0) - (-1.0) * (-(1.0 - l));
        assert!(det.abs() <= 1e-9, "det at {l} = {det}");
    }
}

#[test]
fn eig_two_by_two_textbook() {
    let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
    let eig = sym_eig(&a).unwrap();
    assert!((eig.values[0] - 1.0).abs() <= 1e-10);
    assert!((eig.values[1] - 3.0).abs() <= 1e-10);
    let v0 = eig.eigenvector(0);
    let v1 = eig.eigenvector(1);
    // v0 proportional to (1, -1), v1 to (1, 1).
    assert!((v0[0] + v0[1]).abs() <= 1e-8);
    assert!((v1[0] - v1[1]).abs() <= 1e-8);
}

#[test]
fn eig_reconstructs_random_symmetric_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in [4usize, 9, 16] {
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let x = rng.random_range(-2.0..2.0);
                a[i][j] = x;
                a[j][i] = x;
            }
        }
        let eig = sym_eig(&a).unwrap();
        let vs: Vec<Vec<f64>> = (0..n).map(|i| eig.eigenvector(i)).collect();
        // Orthonormality.
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = vs[i].iter().zip(vs[j].iter()).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((dot - target).abs() <= 1e-8);
            }
        }
        // Frobenius reconstruction and eigenvalue equations.
        let mut recon_err = 0.0;
        let mut norm = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for (k, v) in vs.iter().enumerate() {
                    s += eig.values[k] * v[i] * v[j];
                }
                recon_err += (a[i][j] - s) * (a[i][j] - s);
                norm += a[i][j] * a[i][j];
            }
        }
        assert!(recon_err.sqrt() <= 1e-7 * norm.sqrt());
        for (k, v) in vs.iter().enumerate() {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i][j] * v[j]).sum();
                assert!((av - eig.values[k] * v[i]).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn eig_rejects_asymmetric_input() {
    let a = vec![vec![1.0, 2.0], vec![0.5, 1.0]];
    assert!(matches!(
        sym_eig(&a),
        Err(NumericsError::NotSymmetric { .. })
    ));
}

// ---------------------------------------------------------------- determinism

#[test]
fn tape_replay_and_reruns_are_bit_identical() {
    let spec = MlpSpec::new(3, &[6, 5], 4);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let params = random_params(&spec, &mut rng, 0.9);
    let obs = [0.1, -0.6, 0.8];

    let build = || {
        let mut tape = GradTape::new(&params);
        let out = tape.mlp(&spec, &obs);
        let lp = tape.log_softmax(out);
        let picked = tape.index(lp, 2);
        let obj = tape.weighted_sum(vec![(1.7, picked)]);
        tape.set_output(obj);
        tape
    };
    let t1 = build();
    let t2 = build();
    assert_eq!(t1.output_value(), t2.output_value());
    assert_eq!(t1.replay(), t2.replay());

    let g1 = t1.grad_scalar().unwrap();
    let g2 = t2.grad_scalar().unwrap();
    assert_eq!(g1.as_slice(), g2.as_slice());

    let v = random_params(&spec, &mut rng, 1.0);
    assert_eq!(t1.hvp(&v).unwrap().as_slice(), t2.hvp(&v).unwrap().as_slice());
}

#[test]
fn policy_head_matches_tape_log_probs() {
    let spec = MlpSpec::new(2, &[4], 3);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = random_params(&spec, &mut rng, 0.7);
    let policy = CategoricalPolicy::new(&spec, &params);
    let obs = [0.5, -0.5];

    let fast = policy.log_probs(&obs).unwrap();
    let mut tape = GradTape::new(&params);
    let out = tape.mlp(&spec, &obs);
    let lp = tape.log_softmax(out);
    assert_eq!(fast.as_slice(), tape.value(lp));

    // Probabilities normalize and KL of a distribution with itself is zero.
    let total: f64 = fast.iter().map(|l| l.exp()).sum();
    assert!((total - 1.0).abs() <= 1e-12);
    assert!(categorical_kl(&fast, &fast).abs() <= 1e-15);
}

#[test]
fn kl_fisher_tape_has_zero_gradient_at_reference() {
    // KL(p_theta0 || p_theta) recorded at theta = theta0: value 0, grad 0,
    // curvature = Fisher (checked positive semi-definite along random v).
    let spec = MlpSpec::new(2, &[4], 3);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let params = random_params(&spec, &mut rng, 0.7);
    let obs = [0.3, 0.9];

    let mut tape = GradTape::new(&params);
    let out = tape.mlp(&spec, &obs);
    let lp = tape.log_softmax(out);
    let ref_probs: Vec<f64> = tape.value(lp).iter().map(|l| l.exp()).collect();
    let kl = tape.kl_from_ref(lp, ref_probs);
    tape.set_output(kl);

    assert!(tape.output_value()[0].abs() <= 1e-14);
    let g = tape.grad_scalar().unwrap();
    assert!(g.norm() <= 1e-12);
    for _ in 0..5 {
        let v = random_params(&spec, &mut rng, 1.0);
        let fv = tape.hvp(&v).unwrap();
        assert!(v.dot(&fv) >= -1e-10, "Fisher quadratic form must be >= 0");
    }
}
