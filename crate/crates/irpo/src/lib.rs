//! Intrinsic reward policy optimization (IRPO).
//!
//! IRPO is a bi-level policy-gradient method for sparse-reward problems. From
//! the current base policy it spawns K exploratory policies, updates each for
//! N steps on its own intrinsic reward, estimates every exploratory policy's
//! extrinsic-reward gradient, and backpropagates those gradients through the
//! unrolled update chain (one Jacobian-transpose-vector product per step) to
//! obtain a surrogate gradient for the base policy. The base policy then takes
//! a KL-constrained trust-region step on a softmax-weighted combination of the
//! K backpropagated gradients.
//!
//! The crate is organized as a library with a thin CLI on top:
//!
//! - [`numerics`] — flat-parameter MLPs, a record-and-replay gradient tape
//!   with second-order (Hessian-vector product) support, conjugate gradients,
//!   and a dense symmetric eigensolver.
//! - [`envs`] — discrete sparse-reward gridworlds plus an analytic quadratic
//!   testbed where policy "parameters" are optimized against closed-form
//!   objectives.
//! - [`intrinsic`] — graph-Laplacian eigenvector rewards and random-network
//!   rewards, normalized to `[-1, 1]`.
//! - [`critic`] — state-value learning with lambda-bootstrapped targets and
//!   TD-residual advantages.
//! - [`irpo`] — the algorithm itself: exploratory unrolls, backpropagation
//!   through updates, temperature-weighted gradient aggregation, and the
//!   trust-region base update.
//! - [`baselines`] — vanilla trust-region actor-critic, importance-sampling
//!   and gradient-blending variants, reward-sum augmentation, and an
//!   option-based hierarchical agent.
//! - [`harness`] — run configs, metrics CSV output, evaluation, seed streams,
//!   the analytic-testbed runner, and curve aggregation.
//!
//! Runnable demonstrations of each capability live in `examples/`; see the
//! README for an index.

pub mod baselines;
pub mod critic;
pub mod envs;
pub mod harness;
pub mod intrinsic;
pub mod irpo;
pub mod numerics;

pub use crate::numerics::{MlpSpec, ParamVector};
