//! Dense feedforward network with rectifier hidden layers and an identity
//! output, differentiated by hand-written reverse mode.
//!
//! Parameters live in one flat vector laid out as
//! `[W_1 | b_1 | W_2 | b_2 | …]` with each weight matrix stored row-major
//! `[out × in]`. The gradient buffer uses the same layout.

use crate::approximator::{Approximator, ApproximatorInput};
use crate::error::{Error, Result};
use crate::rng::{CounterRng, Stream};

/// Layer sizes used for the benchmark protocol: four hidden layers of 64.
pub const STANDARD_HIDDEN_WIDTH: usize = 64;
pub const STANDARD_HIDDEN_LAYERS: usize = 4;

#[derive(Debug, Clone)]
pub struct MlpModel {
    dims: Vec<usize>,
    params: Vec<f64>,
    // (weight offset, bias offset) per layer
    offsets: Vec<(usize, usize)>,
}

/// Forward-pass record: the input to every layer plus hidden pre-activations.
pub struct MlpTrace {
    layer_inputs: Vec<Vec<f64>>,
    preactivations: Vec<Vec<f64>>,
}

#[inline]
fn relu(x: f64) -> f64 {
    // value at exactly zero is zero, and so is the derivative used below
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

impl MlpModel {
    /// Build a network with the given layer sizes. `dims[0]` counts the
    /// state dimension plus one time feature. Weights are seeded Gaussians
    /// scaled by 1/√fan-in; biases start at zero.
    pub fn new(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidArgument(
                "network needs an input and an output layer".into(),
            ));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(
                "layer widths must be positive".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(dims.len() - 1);
        let mut total = 0;
        for l in 0..dims.len() - 1 {
            let w_off = total;
            total += dims[l + 1] * dims[l];
            let b_off = total;
            total += dims[l + 1];
            offsets.push((w_off, b_off));
        }

        let rng = CounterRng::new(seed, Stream::WeightInit);
        let mut params = vec![0.0; total];
        for (l, &(w_off, _)) in offsets.iter().enumerate() {
            let fan_in = dims[l];
            let scale = 1.0 / (fan_in as f64).sqrt();
            for o in 0..dims[l + 1] {
                for i in 0..fan_in {
                    params[w_off + o * fan_in + i] =
                        rng.normal(l as u64, o as u64, i as u64) * scale;
                }
            }
        }

        Ok(MlpModel {
            dims: dims.to_vec(),
            params,
            offsets,
        })
    }

    /// Benchmark architecture for a d-dimensional problem:
    /// [d+1, 64, 64, 64, 64, d].
    pub fn standard(state_dim: usize, seed: u64) -> Result<Self> {
        let mut dims = vec![state_dim + 1];
        dims.extend(std::iter::repeat(STANDARD_HIDDEN_WIDTH).take(STANDARD_HIDDEN_LAYERS));
        dims.push(state_dim);
        MlpModel::new(&dims, seed)
    }

    /// Network with `hidden_layers` hidden layers of `hidden_width`.
    pub fn with_hidden(
        state_dim: usize,
        hidden_width: usize,
        hidden_layers: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut dims = vec![state_dim + 1];
        dims.extend(std::iter::repeat(hidden_width).take(hidden_layers));
        dims.push(state_dim);
        MlpModel::new(&dims, seed)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Replace all parameters (used by checkpoint loading).
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    fn run_forward(&self, input: &ApproximatorInput, mut record: Option<&mut MlpTrace>) -> Vec<f64> {
        assert_eq!(
            input.state.len(),
            self.state_dim(),
            "state dimension mismatch"
        );
        let mut activation = Vec::with_capacity(self.dims[0]);
        activation.push(input.time_feature);
        activation.extend_from_slice(input.state);

        let last = self.num_layers() - 1;
        for l in 0..self.num_layers() {
            let (w_off, b_off) = self.offsets[l];
            let n_in = self.dims[l];
            let n_out = self.dims[l + 1];
            let mut z = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &self.params[w_off + o * n_in..w_off + (o + 1) * n_in];
                let mut acc = self.params[b_off + o];
                for (wi, ai) in row.iter().zip(&activation) {
                    acc += wi * ai;
                }
                z[o] = acc;
            }
            let next = if l == last {
                z.clone()
            } else {
                z.iter().map(|&v| relu(v)).collect()
            };
            if let Some(trace) = record.as_deref_mut() {
                trace.layer_inputs.push(std::mem::take(&mut activation));
                if l != last {
                    trace.preactivations.push(z);
                }
            }
            activation = next;
        }
        activation
    }
}

impl Approximator for MlpModel {
    type Trace = MlpTrace;

    fn state_dim(&self) -> usize {
        self.dims[0] - 1
    }

    fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    fn param_count(&self) -> usize {
        self.params.len()
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn forward(&self, input: &ApproximatorInput) -> Vec<f64> {
        self.run_forward(input, None)
    }

    fn forward_traced(&self, input: &ApproximatorInput) -> (Vec<f64>, MlpTrace) {
        let mut trace = MlpTrace {
            layer_inputs: Vec::with_capacity(self.num_layers()),
            preactivations: Vec::with_capacity(self.num_layers() - 1),
        };
        let out = self.run_forward(input, Some(&mut trace));
        (out, trace)
    }

    fn backward(&self, trace: &MlpTrace, upstream: &[f64], grad: &mut [f64]) {
        assert_eq!(upstream.len(), self.output_dim(), "upstream length");
        assert_eq!(grad.len(), self.params.len(), "gradient buffer length");

        let mut delta = upstream.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (w_off, b_off) = self.offsets[l];
            let n_in = self.dims[l];
            let n_out = self.dims[l + 1];
            let a_in = &trace.layer_inputs[l];

            for o in 0..n_out {
                let d = delta[o];
                grad[b_off + o] += d;
                let g_row = &mut grad[w_off + o * n_in..w_off + (o + 1) * n_in];
                for (gi, ai) in g_row.iter_mut().zip(a_in) {
                    *gi += d * ai;
                }
            }

            if l > 0 {
                let mut prev = vec![0.0; n_in];
                for o in 0..n_out {
                    let d = delta[o];
                    let row = &self.params[w_off + o * n_in..w_off + (o + 1) * n_in];
                    for (pi, wi) in prev.iter_mut().zip(row) {
                        *pi += d * wi;
                    }
                }
                // rectifier mask of the layer below
                let z_prev = &trace.preactivations[l - 1];
                for (pi, zi) in prev.iter_mut().zip(z_prev) {
                    if *zi <= 0.0 {
                        *pi = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }
}
