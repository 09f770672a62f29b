//! Differentiable-computation core.
//!
//! Everything here operates on flat parameter vectors: multilayer perceptrons
//! are evaluated from a single [`ParamVector`] through computed layer views,
//! and the [`GradTape`] records layer-granular primitives so that gradients
//! (reverse mode) and Hessian-vector products (forward-over-reverse) are both
//! available after the fact. Conjugate gradients and a cyclic-Jacobi
//! eigensolver round out the numerical toolkit.

mod cg;
mod eig;
pub(crate) mod kernels;
mod mlp;
pub mod policy;
mod tape;

#[cfg(test)]
mod tests;

pub use cg::{conjugate_gradient, CgSolution};
pub use eig::{sym_eig, SymEig};
pub use mlp::{Activation, LayerRef, MlpSpec};
pub use tape::{mlp_forward, GradTape, NodeId};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not symmetric (|a[{i}][{j}] - a[{j}][{i}]| = {delta:e})")]
    NotSymmetric { i: usize, j: usize, delta: f64 },
    #[error("tape output is not a scalar (length {0})")]
    NonScalarObjective(usize),
    #[error("invalid network shape: {0}")]
    BadShape(String),
}

/// A flat vector of real parameters — the `theta` every optimizer here works on.
///
/// Invariant: entries are always finite. All constructors that accept outside
/// data validate; arithmetic helpers preserve finiteness checks at the call
/// sites that can realistically produce NaN/Inf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    /// Wraps a vector, rejecting NaN/Inf entries.
    pub fn new(values: Vec<f64>) -> Result<Self, NumericsError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite("ParamVector::new"));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `self += alpha * other`, in place.
    pub fn axpy(&mut self, alpha: f64, other: &ParamVector) {
        assert_eq!(self.len(), other.len(), "axpy length mismatch");
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.0 {
            *a *= alpha;
        }
    }

    pub fn dot(&self, other: &ParamVector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot length mismatch");
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for ParamVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(p: ParamVector) -> Vec<f64> {
        p.0
    }
}
