//! Uniform interface for the trainable control map (t/T, X_t) ↦ Z_t.
//!
//! The solver treats the approximator as a differentiable black box with a
//! flat parameter vector. `forward_traced` records whatever the concrete
//! model needs to later push an upstream gradient dL/dZ back onto the
//! parameters.

/// Input to the control map: normalized time plus the state (log-state for
/// problems simulated in log coordinates).
#[derive(Debug, Clone, Copy)]
pub struct ApproximatorInput<'a> {
    /// t_n / T in [0, 1].
    pub time_feature: f64,
    pub state: &'a [f64],
}

/// Differentiable map from (time, state) to a control vector in R^d.
///
/// Implementations must be pure: identical parameters and inputs give
/// bitwise-identical outputs, and `backward` must only accumulate (+=) into
/// the gradient buffer so per-sample contributions can be reduced in a fixed
/// order.
pub trait Approximator: Send + Sync {
    type Trace: Send;

    /// Dimension of the state part of the input.
    fn state_dim(&self) -> usize;

    /// Dimension of the control output.
    fn output_dim(&self) -> usize;

    /// Number of trainable parameters (frozen tensors excluded).
    fn param_count(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    fn forward(&self, input: &ApproximatorInput) -> Vec<f64>;

    /// Forward pass that also records the data `backward` needs.
    fn forward_traced(&self, input: &ApproximatorInput) -> (Vec<f64>, Self::Trace);

    /// Accumulate d(upstream · output)/dparams into `grad`
    /// (length `param_count`).
    fn backward(&self, trace: &Self::Trace, upstream: &[f64], grad: &mut [f64]);
}

/// Control frozen at zero. No parameters; handy for degenerate rollouts.
pub struct ZeroControl {
    state_dim: usize,
}

impl ZeroControl {
    pub fn new(state_dim: usize) -> Self {
        ZeroControl { state_dim }
    }
}

impl Approximator for ZeroControl {
    type Trace = ();

    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn output_dim(&self) -> usize {
        self.state_dim
    }

    fn param_count(&self) -> usize {
        0
    }

    fn params(&self) -> &[f64] {
        &[]
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut []
    }

    fn forward(&self, _input: &ApproximatorInput) -> Vec<f64> {
        vec![0.0; self.state_dim]
    }

    fn forward_traced(&self, input: &ApproximatorInput) -> (Vec<f64>, ()) {
        (self.forward(input), ())
    }

    fn backward(&self, _trace: &(), _upstream: &[f64], _grad: &mut [f64]) {}
}
