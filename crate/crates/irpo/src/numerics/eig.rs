//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Sized for grid-scale matrices (a few thousand rows at most). Jacobi is
//! simple and delivers orthonormal eigenvectors by construction, which the
//! Laplacian-reward pipeline relies on.

use super::NumericsError;

/// Eigendecomposition `A = V diag(values) V^T`, eigenvalues ascending,
/// `eigenvector(i)` matching `values[i]`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `i` is the eigenvector for `values[i]`.
    vectors: Vec<f64>,
    n: usize,
}

impl SymEig {
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.vectors[r * self.n + i]).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

const SYMMETRY_TOL: f64 = 1e-10;

/// Decomposes a dense symmetric matrix given as `n` rows of length `n`.
pub fn sym_eig(matrix: &[Vec<f64>]) -> Result<SymEig, NumericsError> {
    let n = matrix.len();
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(NumericsError::DimensionMismatch {
                expected: n,
                got: row.len(),
                context: "sym_eig row length",
            });
        }
        for j in 0..i {
            let delta = (matrix[i][j] - matrix[j][i]).abs();
            if delta > SYMMETRY_TOL * (1.0 + matrix[i][j].abs()) {
                return Err(NumericsError::NotSymmetric { i, j, delta });
            }
        }
    }

    // Work on a copy; symmetrize to kill round-off asymmetry.
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (matrix[i][j] + matrix[j][i]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(1.0);
    const MAX_SWEEPS: usize = 64;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Classic Jacobi rotation angle.
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    // Sort ascending, permuting eigenvector columns alongside.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }

    Ok(SymEig { values, vectors, n })
}
