//! Analytic quadratic testbed: the optimizer run with exact gradients and no
//! sampling, so every update-mechanism claim can be checked in closed form.
//!
//! "Policy parameters" here are a bare 2-vector optimized directly against
//! `J(theta) = -||theta - c||^2` objectives. Exploratory updates, the
//! recorded update chain, reverse accumulation, and the softmax weighting are
//! the same code paths the sampled algorithm uses.

use crate::envs::{quad_eval, QuadraticObjective};
use crate::irpo::{ascent_step, softmax_weights, IrpoError, TapeStep, UpdateTape};
use crate::numerics::ParamVector;

/// Temperature handling for the analytic runner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauSchedule {
    Fixed(f64),
    /// Linear from 1.0 to the floor over the first 10% of iterations.
    Anneal { floor: f64 },
}

impl TauSchedule {
    fn at(&self, iteration: usize, total: usize) -> f64 {
        match *self {
            TauSchedule::Fixed(tau) => tau,
            TauSchedule::Anneal { floor } => {
                crate::irpo::anneal_tau(iteration as u64, total.max(1) as u64, floor)
            }
        }
    }
}

/// The four intrinsic centers used across the analytic experiments.
pub fn canonical_intrinsics(k: usize) -> Vec<QuadraticObjective> {
    let centers: [[f64; 2]; 4] = [[0.0, -2.0], [-2.0, 2.0], [2.0, 2.0], [-2.0, -2.0]];
    centers
        .iter()
        .take(k)
        .map(|c| QuadraticObjective::new(c.to_vec()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct AnalyticConfig {
    pub extrinsic: QuadraticObjective,
    pub intrinsics: Vec<QuadraticObjective>,
    pub n_updates: usize,
    /// Exploratory ascent step size.
    pub eta: f64,
    /// Base ascent step size (the testbed uses plain gradient ascent).
    pub base_lr: f64,
    pub iterations: usize,
    pub tau: TauSchedule,
    pub init: Vec<f64>,
}

impl Default for AnalyticConfig {
    fn default() -> Self {
        Self {
            extrinsic: QuadraticObjective::new(vec![0.0, 0.0]),
            intrinsics: canonical_intrinsics(1),
            n_updates: 5,
            eta: 0.1,
            base_lr: 0.2,
            iterations: 500,
            tau: TauSchedule::Anneal { floor: 0.05 },
            init: vec![0.0, 0.0],
        }
    }
}

/// Who a trajectory row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Base,
    Exploratory,
}

impl Entity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Entity::Base => "base",
            Entity::Exploratory => "exploratory",
        }
    }
}

/// One row of the parameter-path table: position plus extrinsic value.
#[derive(Debug, Clone)]
pub struct AnalyticRow {
    pub iter: usize,
    pub entity: Entity,
    pub k: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct AnalyticResult {
    pub rows: Vec<AnalyticRow>,
    pub final_base: Vec<f64>,
    /// Softmax weights of the last iteration.
    pub final_weights: Vec<f64>,
    /// Final exploratory parameters `theta^(N+1)_k` of the last iteration.
    pub final_runs: Vec<Vec<f64>>,
    /// `(iteration, weights)` history.
    pub omega_history: Vec<(usize, Vec<f64>)>,
}

/// Runs the optimizer on quadratic objectives with exact gradients.
pub fn analytic_run(cfg: &AnalyticConfig) -> Result<AnalyticResult, IrpoError> {
    assert!(!cfg.intrinsics.is_empty(), "need at least one intrinsic objective");
    let dim = cfg.extrinsic.dim();
    let mut base = ParamVector::new(cfg.init.clone())?;
    let mut rows = Vec::new();
    let mut omega_history = Vec::new();
    let mut final_weights = vec![1.0 / cfg.intrinsics.len() as f64; cfg.intrinsics.len()];
    let mut final_runs: Vec<Vec<f64>> = vec![cfg.init.clone(); cfg.intrinsics.len()];

    for iter in 0..cfg.iterations {
        let tau = cfg.tau.at(iter, cfg.iterations);
        let base_value = quad_eval(&cfg.extrinsic, base.as_slice())?.0;
        rows.push(AnalyticRow {
            iter,
            entity: Entity::Base,
            k: 0,
            j: 0,
            x: base[0],
            y: if dim > 1 { base[1] } else { 0.0 },
            value: base_value,
        });

        let mut backpropagated = Vec::with_capacity(cfg.intrinsics.len());
        let mut perf = Vec::with_capacity(cfg.intrinsics.len());
        for (k, intrinsic) in cfg.intrinsics.iter().enumerate() {
            let mut params = base.clone();
            let mut tape = UpdateTape::default();
            let push_row = |j: usize, p: &ParamVector, rows: &mut Vec<AnalyticRow>| {
                let value = quad_eval(&cfg.extrinsic, p.as_slice()).expect("dims match").0;
                rows.push(AnalyticRow {
                    iter,
                    entity: Entity::Exploratory,
                    k,
                    j,
                    x: p[0],
                    y: if dim > 1 { p[1] } else { 0.0 },
                    value,
                });
            };
            push_row(1, &params, &mut rows);
            for j in 0..cfg.n_updates {
                let objective = intrinsic.tape(&params)?;
                let (next, step): (ParamVector, TapeStep) =
                    ascent_step(&params, objective, cfg.eta)?;
                params = next;
                tape.steps.push(step);
                push_row(j + 2, &params, &mut rows);
            }
            let (value, gradient) = quad_eval(&cfg.extrinsic, params.as_slice())?;
            perf.push(value);
            let g = ParamVector::new(gradient)?;
            backpropagated.push(tape.backprop(&g)?);
            final_runs[k] = params.as_slice().to_vec();
        }

        let weights = softmax_weights(&perf, tau);
        let mut update = ParamVector::zeros(dim);
        for (b, &w) in backpropagated.iter().zip(weights.iter()) {
            update.axpy(w, b);
        }
        base.axpy(cfg.base_lr, &update);
        omega_history.push((iter, weights.clone()));
        final_weights = weights;
    }

    Ok(AnalyticResult {
        rows,
        final_base: base.as_slice().to_vec(),
        final_weights,
        final_runs,
        omega_history,
    })
}

/// Serializes rows as the trajectory CSV (`iter,entity,k,j,x,y,value`).
pub fn rows_to_csv(rows: &[AnalyticRow]) -> String {
    let mut out = String::from("iter,entity,k,j,x,y,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.iter,
            r.entity.as_str(),
            r.k,
            r.j,
            r.x,
            r.y,
            r.value
        ));
    }
    out
}

/// Serializes the weight history (`iter,k,omega`).
pub fn omegas_to_csv(history: &[(usize, Vec<f64>)]) -> String {
    let mut out = String::from("iter,k,omega\n");
    for (iter, weights) in history {
        for (k, w) in weights.iter().enumerate() {
            out.push_str(&format!("{iter},{k},{w}\n"));
        }
    }
    out
}
