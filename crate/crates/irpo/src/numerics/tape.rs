//! Record-and-replay gradient tape.
//!
//! The tape records layer-granular primitives (affine maps, activations,
//! probability heads, reductions) against a snapshot of the flat parameter
//! vector. After recording, two passes are available:
//!
//! - [`GradTape::grad`]: reverse accumulation of `d(seed . output)/d(params)`.
//! - [`GradTape::hvp`]: forward-over-reverse Hessian-vector products for a
//!   recorded scalar objective — one tangent sweep carrying the direction
//!   through the forward primitives, then one backward sweep that propagates
//!   adjoints and their tangents together. Memory and time stay linear in the
//!   tape length; the full Hessian is never materialized.

use super::kernels;
use super::mlp::{LayerRef, MlpSpec};
use super::{NumericsError, ParamVector};

/// Handle to a recorded tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum OpKind {
    /// External constant vector (no parameter dependence).
    Input,
    /// Contiguous view of the parameter vector.
    ParamView { offset: usize },
    /// `y = W x + b` with weights taken from the parameter snapshot.
    Affine { layer: LayerRef, input: usize },
    Tanh { input: usize },
    LogSoftmax { input: usize },
    /// Scalar: one component of a vector node.
    Index { input: usize, index: usize },
    /// Scalar: fixed-coefficient combination of scalar nodes.
    WeightedSum { terms: Vec<(f64, usize)> },
    AddConst { input: usize, constants: Vec<f64> },
    /// Scalar: squared Euclidean norm.
    SquaredNorm { input: usize },
    Scale { input: usize, factor: f64 },
    /// Scalar: `KL(ref || softmax)` where the node holds new log-probs.
    KlFromRef { input: usize, ref_probs: Vec<f64> },
    /// Scalar: diagonal-Gaussian log density of `action`; the node holds
    /// `[mean, log_std]` concatenated.
    GaussianLogProb { input: usize, action: Vec<f64> },
}

#[derive(Debug, Clone)]
struct Node {
    kind: OpKind,
    offset: usize,
    len: usize,
}

/// A recorded computation over one parameter snapshot.
#[derive(Debug, Clone)]
pub struct GradTape {
    params: Vec<f64>,
    nodes: Vec<Node>,
    values: Vec<f64>,
    output: Option<usize>,
}

impl GradTape {
    pub fn new(params: &ParamVector) -> Self {
        Self {
            params: params.as_slice().to_vec(),
            nodes: Vec::new(),
            values: Vec::new(),
            output: None,
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn node_len(&self, id: NodeId) -> usize {
        self.nodes[id.0].len
    }

    /// Value of a node as computed at record time.
    pub fn value(&self, id: NodeId) -> &[f64] {
        let n = &self.nodes[id.0];
        &self.values[n.offset..n.offset + n.len]
    }

    pub fn set_output(&mut self, id: NodeId) {
        self.output = Some(id.0);
    }

    pub fn output_value(&self) -> &[f64] {
        let out = self.output.expect("tape output not set");
        self.value(NodeId(out))
    }

    fn push(&mut self, kind: OpKind, len: usize) -> NodeId {
        let offset = self.values.len();
        self.values.resize(offset + len, 0.0);
        let id = self.nodes.len();
        self.nodes.push(Node { kind, offset, len });
        self.eval_node(id);
        NodeId(id)
    }

    pub fn input(&mut self, values: &[f64]) -> NodeId {
        let id = self.push(OpKind::Input, values.len());
        let n = &self.nodes[id.0];
        self.values[n.offset..n.offset + n.len].copy_from_slice(values);
        id
    }

    pub fn param_view(&mut self, offset: usize, len: usize) -> NodeId {
        assert!(offset + len <= self.params.len(), "param view out of range");
        self.push(OpKind::ParamView { offset }, len)
    }

    pub fn affine(&mut self, layer: LayerRef, input: NodeId) -> NodeId {
        assert_eq!(self.node_len(input), layer.in_dim, "affine input length");
        self.push(
            OpKind::Affine {
                layer,
                input: input.0,
            },
            layer.out_dim,
        )
    }

    pub fn tanh(&mut self, input: NodeId) -> NodeId {
        let len = self.node_len(input);
        self.push(OpKind::Tanh { input: input.0 }, len)
    }

    pub fn log_softmax(&mut self, input: NodeId) -> NodeId {
        let len = self.node_len(input);
        self.push(OpKind::LogSoftmax { input: input.0 }, len)
    }

    pub fn index(&mut self, input: NodeId, index: usize) -> NodeId {
        assert!(index < self.node_len(input), "index out of range");
        self.push(
            OpKind::Index {
                input: input.0,
                index,
            },
            1,
        )
    }

    pub fn weighted_sum(&mut self, terms: Vec<(f64, NodeId)>) -> NodeId {
        for &(_, id) in &terms {
            assert_eq!(self.node_len(id), 1, "weighted_sum expects scalar terms");
        }
        let terms = terms.into_iter().map(|(w, id)| (w, id.0)).collect();
        self.push(OpKind::WeightedSum { terms }, 1)
    }

    pub fn add_const(&mut self, input: NodeId, constants: Vec<f64>) -> NodeId {
        assert_eq!(self.node_len(input), constants.len(), "add_const length");
        let len = constants.len();
        self.push(
            OpKind::AddConst {
                input: input.0,
                constants,
            },
            len,
        )
    }

    pub fn squared_norm(&mut self, input: NodeId) -> NodeId {
        self.push(OpKind::SquaredNorm { input: input.0 }, 1)
    }

    pub fn scale(&mut self, input: NodeId, factor: f64) -> NodeId {
        let len = self.node_len(input);
        self.push(
            OpKind::Scale {
                input: input.0,
                factor,
            },
            len,
        )
    }

    pub fn kl_from_ref(&mut self, log_probs: NodeId, ref_probs: Vec<f64>) -> NodeId {
        assert_eq!(self.node_len(log_probs), ref_probs.len(), "kl length");
        self.push(
            OpKind::KlFromRef {
                input: log_probs.0,
                ref_probs,
            },
            1,
        )
    }

    pub fn gaussian_log_prob(&mut self, mean_and_log_std: NodeId, action: &[f64]) -> NodeId {
        assert_eq!(
            self.node_len(mean_and_log_std),
            2 * action.len(),
            "gaussian head expects [mean, log_std]"
        );
        self.push(
            OpKind::GaussianLogProb {
                input: mean_and_log_std.0,
                action: action.to_vec(),
            },
            1,
        )
    }

    /// Records a full MLP forward pass and returns the output node.
    pub fn mlp(&mut self, spec: &MlpSpec, input: &[f64]) -> NodeId {
        let n_layers = spec.hidden_dims.len() + 1;
        let mut cur = self.input(input);
        for (i, layer) in spec.layers().collect::<Vec<_>>().into_iter().enumerate() {
            cur = self.affine(layer, cur);
            if i + 1 < n_layers {
                cur = self.tanh(cur);
            }
        }
        cur
    }

    /// Computes a node's value into the arena from its inputs' recorded values.
    fn eval_node(&mut self, id: usize) {
        let node = self.nodes[id].clone();
        let out_range = node.offset..node.offset + node.len;
        match node.kind {
            OpKind::Input => {}
            OpKind::ParamView { offset } => {
                let src = self.params[offset..offset + node.len].to_vec();
                self.values[out_range].copy_from_slice(&src);
            }
            OpKind::Affine { layer, input } => {
                let x = self.node_values(input).to_vec();
                let w = &self.params[layer.w_offset..layer.w_offset + layer.in_dim * layer.out_dim];
                let b = &self.params[layer.b_offset..layer.b_offset + layer.out_dim];
                let mut y = vec![0.0; layer.out_dim];
                kernels::affine(w, b, &x, &mut y);
                self.values[out_range].copy_from_slice(&y);
            }
            OpKind::Tanh { input } => {
                let x = self.node_values(input).to_vec();
                for (o, xi) in self.values[out_range].iter_mut().zip(x.iter()) {
                    *o = xi.tanh();
                }
            }
            OpKind::LogSoftmax { input } => {
                let x = self.node_values(input).to_vec();
                let mut y = vec![0.0; x.len()];
                kernels::log_softmax(&x, &mut y);
                self.values[out_range].copy_from_slice(&y);
            }
            OpKind::Index { input, index } => {
                self.values[node.offset] = self.node_values(input)[index];
            }
            OpKind::WeightedSum { ref terms } => {
                let mut acc = 0.0;
                for &(w, id) in terms {
                    acc += w * self.values[self.nodes[id].offset];
                }
                self.values[node.offset] = acc;
            }
            OpKind::AddConst {
                input,
                ref constants,
            } => {
                let x = self.node_values(input).to_vec();
                for ((o, xi), c) in self.values[out_range].iter_mut().zip(&x).zip(constants) {
                    *o = xi + c;
                }
            }
            OpKind::SquaredNorm { input } => {
                let x = self.node_values(input);
                self.values[node.offset] = x.iter().map(|v| v * v).sum();
            }
            OpKind::Scale { input, factor } => {
                let x = self.node_values(input).to_vec();
                for (o, xi) in self.values[out_range].iter_mut().zip(x.iter()) {
                    *o = factor * xi;
                }
            }
            OpKind::KlFromRef {
                input,
                ref ref_probs,
            } => {
                let lp = self.node_values(input);
                let mut acc = 0.0;
                for (&q, &l) in ref_probs.iter().zip(lp.iter()) {
                    if q > 0.0 {
                        acc += q * (q.ln() - l);
                    }
                }
                self.values[node.offset] = acc;
            }
            OpKind::GaussianLogProb { input, ref action } => {
                let x = self.node_values(input);
                let d = action.len();
                let (mean, log_std) = x.split_at(d);
                let mut acc = -(d as f64) * 0.5 * (2.0 * std::f64::consts::PI).ln();
                for i in 0..d {
                    let u = action[i] - mean[i];
                    let e = (-2.0 * log_std[i]).exp();
                    acc += -0.5 * u * u * e - log_std[i];
                }
                self.values[node.offset] = acc;
            }
        }
    }

    fn node_values(&self, id: usize) -> &[f64] {
        let n = &self.nodes[id];
        &self.values[n.offset..n.offset + n.len]
    }

    /// Re-executes the whole tape from scratch and returns the recomputed
    /// value arena. Used to verify record/replay determinism.
    pub fn replay(&self) -> Vec<f64> {
        let mut copy = GradTape {
            params: self.params.clone(),
            nodes: self.nodes.clone(),
            values: self.values.clone(),
            output: self.output,
        };
        for id in 0..copy.nodes.len() {
            // Inputs keep their recorded values; everything else recomputes.
            if !matches!(copy.nodes[id].kind, OpKind::Input) {
                copy.eval_node(id);
            }
        }
        copy.values
    }

    /// Reverse pass: `d(seed . output)/d(params)`.
    pub fn grad(&self, seed: &[f64]) -> Result<ParamVector, NumericsError> {
        let out = self.output.ok_or(NumericsError::NonScalarObjective(0))?;
        if seed.len() != self.nodes[out].len {
            return Err(NumericsError::DimensionMismatch {
                expected: self.nodes[out].len,
                got: seed.len(),
                context: "grad seed vs output",
            });
        }
        let mut abar = vec![0.0; self.values.len()];
        let n = &self.nodes[out];
        abar[n.offset..n.offset + n.len].copy_from_slice(seed);
        let mut g = vec![0.0; self.params.len()];
        self.backward(&mut abar, &mut g);
        ParamVector::new(g)
    }

    /// Reverse pass for a scalar output with seed 1.
    pub fn grad_scalar(&self) -> Result<ParamVector, NumericsError> {
        let out = self.output.ok_or(NumericsError::NonScalarObjective(0))?;
        if self.nodes[out].len != 1 {
            return Err(NumericsError::NonScalarObjective(self.nodes[out].len));
        }
        self.grad(&[1.0])
    }

    fn backward(&self, abar: &mut [f64], g: &mut [f64]) {
        for id in (0..self.nodes.len()).rev() {
            let node = &self.nodes[id];
            let (lo, hi) = (node.offset, node.offset + node.len);
            match node.kind {
                OpKind::Input => {}
                OpKind::ParamView { offset } => {
                    for i in 0..node.len {
                        g[offset + i] += abar[lo + i];
                    }
                }
                OpKind::Affine { layer, input } => {
                    let inode = &self.nodes[input];
                    let w = &self.params
                        [layer.w_offset..layer.w_offset + layer.in_dim * layer.out_dim];
                    let x = &self.values[inode.offset..inode.offset + inode.len];
                    let (head, tail) = abar.split_at_mut(lo);
                    let ybar = &tail[..node.len];
                    let xbar = &mut head[inode.offset..inode.offset + inode.len];
                    let (gw, gb) = {
                        let (a, b) = g.split_at_mut(layer.b_offset);
                        (
                            &mut a[layer.w_offset..],
                            &mut b[..layer.out_dim],
                        )
                    };
                    kernels::affine_backward(w, x, ybar, xbar, gw, gb);
                }
                OpKind::Tanh { input } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        let y = self.values[lo + i];
                        abar[inode.offset + i] += (1.0 - y * y) * abar[lo + i];
                    }
                }
                OpKind::LogSoftmax { input } => {
                    let inode = &self.nodes[input];
                    let s: f64 = abar[lo..hi].iter().sum();
                    for i in 0..node.len {
                        let p = self.values[lo + i].exp();
                        abar[inode.offset + i] += abar[lo + i] - p * s;
                    }
                }
                OpKind::Index { input, index } => {
                    let inode = &self.nodes[input];
                    abar[inode.offset + index] += abar[lo];
                }
                OpKind::WeightedSum { ref terms } => {
                    let yb = abar[lo];
                    if yb != 0.0 {
                        for &(w, id) in terms {
                            abar[self.nodes[id].offset] += w * yb;
                        }
                    }
                }
                OpKind::AddConst { input, .. } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        abar[inode.offset + i] += abar[lo + i];
                    }
                }
                OpKind::SquaredNorm { input } => {
                    let inode = &self.nodes[input];
                    let yb = abar[lo];
                    for i in 0..inode.len {
                        abar[inode.offset + i] += 2.0 * self.values[inode.offset + i] * yb;
                    }
                }
                OpKind::Scale { input, factor } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        abar[inode.offset + i] += factor * abar[lo + i];
                    }
                }
                OpKind::KlFromRef {
                    input,
                    ref ref_probs,
                } => {
                    let inode = &self.nodes[input];
                    let yb = abar[lo];
                    for (i, &q) in ref_probs.iter().enumerate() {
                        abar[inode.offset + i] += -q * yb;
                    }
                }
                OpKind::GaussianLogProb { input, ref action } => {
                    let inode = &self.nodes[input];
                    let d = action.len();
                    let yb = abar[lo];
                    for i in 0..d {
                        let mean = self.values[inode.offset + i];
                        let log_std = self.values[inode.offset + d + i];
                        let u = action[i] - mean;
                        let e = (-2.0 * log_std).exp();
                        abar[inode.offset + i] += u * e * yb;
                        abar[inode.offset + d + i] += (u * u * e - 1.0) * yb;
                    }
                }
            }
        }
    }

    /// Hessian-vector product of the recorded scalar objective:
    /// `(d^2 output / d params^2) . v`, via forward-over-reverse.
    pub fn hvp(&self, v: &ParamVector) -> Result<ParamVector, NumericsError> {
        let out = self.output.ok_or(NumericsError::NonScalarObjective(0))?;
        if self.nodes[out].len != 1 {
            return Err(NumericsError::NonScalarObjective(self.nodes[out].len));
        }
        if v.len() != self.params.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.params.len(),
                got: v.len(),
                context: "hvp direction vs params",
            });
        }
        let vdot = v.as_slice();

        // Tangent sweep: directional derivative of every node along v.
        let mut dot = vec![0.0; self.values.len()];
        for id in 0..self.nodes.len() {
            let node = &self.nodes[id];
            let (lo, hi) = (node.offset, node.offset + node.len);
            match node.kind {
                OpKind::Input => {}
                OpKind::ParamView { offset } => {
                    dot[lo..hi].copy_from_slice(&vdot[offset..offset + node.len]);
                }
                OpKind::Affine { layer, input } => {
                    let inode = &self.nodes[input];
                    let w = &self.params
                        [layer.w_offset..layer.w_offset + layer.in_dim * layer.out_dim];
                    let wdot =
                        &vdot[layer.w_offset..layer.w_offset + layer.in_dim * layer.out_dim];
                    let bdot = &vdot[layer.b_offset..layer.b_offset + layer.out_dim];
                    let x = &self.values[inode.offset..inode.offset + inode.len];
                    let (head, tail) = dot.split_at_mut(lo);
                    let xdot = &head[inode.offset..inode.offset + inode.len];
                    kernels::affine_tangent(w, wdot, bdot, x, xdot, &mut tail[..node.len]);
                }
                OpKind::Tanh { input } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        let y = self.values[lo + i];
                        dot[lo + i] = (1.0 - y * y) * dot[inode.offset + i];
                    }
                }
                OpKind::LogSoftmax { input } => {
                    let inode = &self.nodes[input];
                    let mut mdot = 0.0;
                    for i in 0..node.len {
                        mdot += self.values[lo + i].exp() * dot[inode.offset + i];
                    }
                    for i in 0..node.len {
                        dot[lo + i] = dot[inode.offset + i] - mdot;
                    }
                }
                OpKind::Index { input, index } => {
                    dot[lo] = dot[self.nodes[input].offset + index];
                }
                OpKind::WeightedSum { ref terms } => {
                    let mut acc = 0.0;
                    for &(w, id) in terms {
                        acc += w * dot[self.nodes[id].offset];
                    }
                    dot[lo] = acc;
                }
                OpKind::AddConst { input, .. } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        dot[lo + i] = dot[inode.offset + i];
                    }
                }
                OpKind::SquaredNorm { input } => {
                    let inode = &self.nodes[input];
                    let mut acc = 0.0;
                    for i in 0..inode.len {
                        acc += 2.0 * self.values[inode.offset + i] * dot[inode.offset + i];
                    }
                    dot[lo] = acc;
                }
                OpKind::Scale { input, factor } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        dot[lo + i] = factor * dot[inode.offset + i];
                    }
                }
                OpKind::KlFromRef {
                    input,
                    ref ref_probs,
                } => {
                    let inode = &self.nodes[input];
                    let mut acc = 0.0;
                    for (i, &q) in ref_probs.iter().enumerate() {
                        acc += -q * dot[inode.offset + i];
                    }
                    dot[lo] = acc;
                }
                OpKind::GaussianLogProb { input, ref action } => {
                    let inode = &self.nodes[input];
                    let d = action.len();
                    let mut acc = 0.0;
                    for i in 0..d {
                        let mean = self.values[inode.offset + i];
                        let log_std = self.values[inode.offset + d + i];
                        let u = action[i] - mean;
                        let e = (-2.0 * log_std).exp();
                        acc += u * e * dot[inode.offset + i]
                            + (u * u * e - 1.0) * dot[inode.offset + d + i];
                    }
                    dot[lo] = acc;
                }
            }
        }

        // Augmented backward sweep: adjoints and their tangents together.
        let mut abar = vec![0.0; self.values.len()];
        let mut adot = vec![0.0; self.values.len()];
        abar[self.nodes[out].offset] = 1.0;
        let mut hv = vec![0.0; self.params.len()];
        for id in (0..self.nodes.len()).rev() {
            let node = &self.nodes[id];
            let (lo, hi) = (node.offset, node.offset + node.len);
            match node.kind {
                OpKind::Input => {}
                OpKind::ParamView { offset } => {
                    for i in 0..node.len {
                        hv[offset + i] += adot[lo + i];
                    }
                }
                OpKind::Affine { layer, input } => {
                    let inode = &self.nodes[input];
                    let in_dim = layer.in_dim;
                    let w = &self.params[layer.w_offset..layer.w_offset + in_dim * layer.out_dim];
                    let wdot = &vdot[layer.w_offset..layer.w_offset + in_dim * layer.out_dim];
                    let x = &self.values[inode.offset..inode.offset + inode.len];
                    let xdot = &dot[inode.offset..inode.offset + inode.len];
                    for o in 0..layer.out_dim {
                        let yb = abar[lo + o];
                        let yd = adot[lo + o];
                        if yb == 0.0 && yd == 0.0 {
                            continue;
                        }
                        let row = &w[o * in_dim..(o + 1) * in_dim];
                        let rowdot = &wdot[o * in_dim..(o + 1) * in_dim];
                        for i in 0..in_dim {
                            abar[inode.offset + i] += row[i] * yb;
                            adot[inode.offset + i] += row[i] * yd + rowdot[i] * yb;
                            hv[layer.w_offset + o * in_dim + i] += yd * x[i] + yb * xdot[i];
                        }
                        hv[layer.b_offset + o] += yd;
                    }
                }
                OpKind::Tanh { input } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        let y = self.values[lo + i];
                        let ydot = dot[lo + i];
                        let der = 1.0 - y * y;
                        abar[inode.offset + i] += der * abar[lo + i];
                        adot[inode.offset + i] +=
                            der * adot[lo + i] - 2.0 * y * ydot * abar[lo + i];
                    }
                }
                OpKind::LogSoftmax { input } => {
                    let inode = &self.nodes[input];
                    let s: f64 = abar[lo..hi].iter().sum();
                    let sdot: f64 = adot[lo..hi].iter().sum();
                    for i in 0..node.len {
                        let p = self.values[lo + i].exp();
                        let pdot = p * dot[lo + i];
                        abar[inode.offset + i] += abar[lo + i] - p * s;
                        adot[inode.offset + i] += adot[lo + i] - pdot * s - p * sdot;
                    }
                }
                OpKind::Index { input, index } => {
                    let off = self.nodes[input].offset + index;
                    abar[off] += abar[lo];
                    adot[off] += adot[lo];
                }
                OpKind::WeightedSum { ref terms } => {
                    let yb = abar[lo];
                    let yd = adot[lo];
                    if yb != 0.0 || yd != 0.0 {
                        for &(w, id) in terms {
                            let off = self.nodes[id].offset;
                            abar[off] += w * yb;
                            adot[off] += w * yd;
                        }
                    }
                }
                OpKind::AddConst { input, .. } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        abar[inode.offset + i] += abar[lo + i];
                        adot[inode.offset + i] += adot[lo + i];
                    }
                }
                OpKind::SquaredNorm { input } => {
                    let inode = &self.nodes[input];
                    let yb = abar[lo];
                    let yd = adot[lo];
                    for i in 0..inode.len {
                        let x = self.values[inode.offset + i];
                        let xd = dot[inode.offset + i];
                        abar[inode.offset + i] += 2.0 * x * yb;
                        adot[inode.offset + i] += 2.0 * (xd * yb + x * yd);
                    }
                }
                OpKind::Scale { input, factor } => {
                    let inode = &self.nodes[input];
                    for i in 0..node.len {
                        abar[inode.offset + i] += factor * abar[lo + i];
                        adot[inode.offset + i] += factor * adot[lo + i];
                    }
                }
                OpKind::KlFromRef {
                    input,
                    ref ref_probs,
                } => {
                    let inode = &self.nodes[input];
                    let yb = abar[lo];
                    let yd = adot[lo];
                    for (i, &q) in ref_probs.iter().enumerate() {
                        abar[inode.offset + i] += -q * yb;
                        adot[inode.offset + i] += -q * yd;
                    }
                }
                OpKind::GaussianLogProb { input, ref action } => {
                    let inode = &self.nodes[input];
                    let d = action.len();
                    let yb = abar[lo];
                    let yd = adot[lo];
                    for i in 0..d {
                        let mean = self.values[inode.offset + i];
                        let log_std = self.values[inode.offset + d + i];
                        let mdot = dot[inode.offset + i];
                        let sdot = dot[inode.offset + d + i];
                        let u = action[i] - mean;
                        let e = (-2.0 * log_std).exp();
                        let d_mean = u * e;
                        let d_std = u * u * e - 1.0;
                        let d_mean_dot = -e * (mdot + 2.0 * u * sdot);
                        let d_std_dot = -2.0 * u * e * (mdot + u * sdot);
                        abar[inode.offset + i] += d_mean * yb;
                        adot[inode.offset + i] += d_mean * yd + d_mean_dot * yb;
                        abar[inode.offset + d + i] += d_std * yb;
                        adot[inode.offset + d + i] += d_std * yd + d_std_dot * yb;
                    }
                }
            }
        }
        ParamVector::new(hv)
    }
}

/// Records a forward pass of `spec` at `params` on `input`.
///
/// Returns the output activation and the tape; callers can extend the tape
/// with probability heads and reductions before differentiating.
pub fn mlp_forward(
    spec: &MlpSpec,
    params: &ParamVector,
    input: &[f64],
) -> Result<(Vec<f64>, GradTape), NumericsError> {
    spec.validate()?;
    spec.check_params(params)?;
    if input.len() != spec.input_dim {
        return Err(NumericsError::DimensionMismatch {
            expected: spec.input_dim,
            got: input.len(),
            context: "mlp input",
        });
    }
    let mut tape = GradTape::new(params);
    let out = tape.mlp(spec, input);
    tape.set_output(out);
    Ok((tape.value(out).to_vec(), tape))
}
