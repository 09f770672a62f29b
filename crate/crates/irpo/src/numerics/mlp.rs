//! MLP shape description and parameter layout.

use serde::{Deserialize, Serialize};

use super::{kernels, NumericsError, ParamVector};

/// Supported activation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
}

/// Architecture of a fully-connected network over a flat parameter vector.
///
/// Parameters are laid out layer by layer: the weight matrix (row-major,
/// `out_dim` rows of `in_dim`) followed by the bias vector. Hidden layers all
/// use the configured activation; the output layer is linear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
}

/// Offsets of one layer's weights and bias inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerRef {
    pub w_offset: usize,
    pub b_offset: usize,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_dims: &[usize], output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dims: hidden_dims.to_vec(),
            output_dim,
            activation: Activation::Tanh,
        }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_dims.contains(&0) {
            return Err(NumericsError::BadShape(format!(
                "all dims must be >= 1: in={}, hidden={:?}, out={}",
                self.input_dim, self.hidden_dims, self.output_dim
            )));
        }
        Ok(())
    }

    /// Total parameter count: sum over layers of `(in + 1) * out`.
    pub fn param_count(&self) -> usize {
        self.layers().map(|l| (l.in_dim + 1) * l.out_dim).sum()
    }

    /// Iterates layers in evaluation order with their parameter offsets.
    pub fn layers(&self) -> impl Iterator<Item = LayerRef> + '_ {
        let dims: Vec<usize> = std::iter::once(self.input_dim)
            .chain(self.hidden_dims.iter().copied())
            .chain(std::iter::once(self.output_dim))
            .collect();
        let mut offset = 0;
        (0..dims.len() - 1).map(move |i| {
            let layer = LayerRef {
                w_offset: offset,
                b_offset: offset + dims[i] * dims[i + 1],
                in_dim: dims[i],
                out_dim: dims[i + 1],
            };
            offset += (dims[i] + 1) * dims[i + 1];
            layer
        })
    }

    pub fn check_params(&self, params: &ParamVector) -> Result<(), NumericsError> {
        let m = self.param_count();
        if params.len() != m {
            return Err(NumericsError::DimensionMismatch {
                expected: m,
                got: params.len(),
                context: "parameter vector vs network shape",
            });
        }
        Ok(())
    }

    /// Plain forward pass without recording. Uses the same arithmetic kernels
    /// as the tape, so results are bit-identical to recorded evaluation.
    pub fn eval(&self, params: &ParamVector, input: &[f64]) -> Result<Vec<f64>, NumericsError> {
        self.check_params(params)?;
        if input.len() != self.input_dim {
            return Err(NumericsError::DimensionMismatch {
                expected: self.input_dim,
                got: input.len(),
                context: "mlp input",
            });
        }
        let p = params.as_slice();
        let n_layers = self.hidden_dims.len() + 1;
        let mut cur = input.to_vec();
        for (i, layer) in self.layers().enumerate() {
            let mut next = vec![0.0; layer.out_dim];
            kernels::affine(
                &p[layer.w_offset..layer.w_offset + layer.in_dim * layer.out_dim],
                &p[layer.b_offset..layer.b_offset + layer.out_dim],
                &cur,
                &mut next,
            );
            if i + 1 < n_layers {
                kernels::tanh_inplace(&mut next);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Xavier-style random initialization from a seeded RNG. Hidden layers use
    /// the tanh gain; the output layer is scaled down so fresh policies start
    /// near-uniform and fresh critics near zero.
    pub fn init_params(&self, rng: &mut impl rand::Rng, output_scale: f64) -> ParamVector {
        let mut values = vec![0.0; self.param_count()];
        let n_layers = self.hidden_dims.len() + 1;
        for (i, layer) in self.layers().enumerate() {
            let gain = if i + 1 < n_layers { 5.0 / 3.0 } else { output_scale };
            let bound = gain * (6.0 / (layer.in_dim + layer.out_dim) as f64).sqrt();
            for w in &mut values[layer.w_offset..layer.w_offset + layer.in_dim * layer.out_dim] {
                *w = rng.random_range(-bound..=bound);
            }
            // biases stay zero
        }
        ParamVector::new(values).expect("bounded init is finite")
    }
}
