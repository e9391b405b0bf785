//! Training loop: simulate forward paths, roll the backward value forward
//! from a trainable initial scalar using the approximator's control, and
//! minimize the expected squared terminal mismatch.
//!
//! The rollout is the forward-in-time recursion
//!   Y_{n+1} = Y_n − f(t_n, X_n, Y_n, Z_n) Δt + Z_n · ΔW_n,
//! with Y_0 a trainable scalar whose optimum is the solution value at the
//! initial point. The terminal control Z at t_N is never queried.

use std::time::Instant;

use rayon::prelude::*;

use crate::adam::{AdamConfig, AdamState};
use crate::approximator::{Approximator, ApproximatorInput};
use crate::error::{Error, Result};
use crate::oracles::relative_error;
use crate::paths::{sample_increments, simulate_forward, PathBatch, TimeGrid};
use crate::problems::ProblemSpec;
use crate::rng::{CounterRng, Stream};

/// Training protocol. Defaults follow the benchmark setup: 10,000 paths,
/// batches of 100, 10 epochs, learning rate 0.01 on a 10-step grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub num_paths: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub num_steps: usize,
    /// Re-draw the minibatch order every epoch. Off by default: paths are
    /// consumed in fixed sequential order.
    pub shuffle: bool,
    /// Half-width, relative to the calibrated center, of the uniform
    /// interval the initial value is drawn from.
    pub y0_init_spread: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            num_paths: 10_000,
            batch_size: 100,
            epochs: 10,
            learning_rate: 0.01,
            num_steps: 10,
            shuffle: false,
            y0_init_spread: 0.01,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 || self.batch_size == 0 || self.epochs == 0 || self.num_steps == 0
        {
            return Err(Error::InvalidArgument(
                "paths, batch size, epochs and steps must all be positive".into(),
            ));
        }
        if self.num_paths % self.batch_size != 0 {
            return Err(Error::InvalidArgument(format!(
                "batch size {} must divide the path count {}",
                self.batch_size, self.num_paths
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument(
                "learning rate must be positive".into(),
            ));
        }
        if !(self.y0_init_spread >= 0.0) {
            return Err(Error::InvalidArgument(
                "initial-value spread must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// The trainable initial value of the backward process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainableHead {
    pub y0: f64,
}

/// Outcome of one training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub y0: f64,
    /// Batch loss per optimizer iteration.
    pub losses: Vec<f64>,
    pub seed: u64,
    /// Wall-clock seconds; informational only and excluded from any
    /// determinism comparison or CSV output.
    pub wall_clock: f64,
    pub oracle: Option<f64>,
    pub relative_error: Option<f64>,
}

/// Out-of-sample evaluation result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub mean_loss: f64,
    pub y0: f64,
}

/// Run the value recursion over simulated paths and return the terminal
/// value per sample. With a zero driver and zero control this is the
/// identity map y0 → Y_T on every path.
pub fn rollout<A: Approximator>(
    spec: &ProblemSpec,
    paths: &PathBatch,
    head: &TrainableHead,
    approx: &A,
) -> Result<Vec<f64>> {
    check_shapes(spec, approx)?;
    if paths.dim() != spec.dim {
        return Err(Error::DimensionMismatch(
            "path batch dimension does not match the problem".into(),
        ));
    }
    let grid = *paths.grid();
    (0..paths.batch())
        .into_par_iter()
        .map(|sample| rollout_sample(spec, paths, &grid, head.y0, approx, sample))
        .collect()
}

fn rollout_sample<A: Approximator>(
    spec: &ProblemSpec,
    paths: &PathBatch,
    grid: &TimeGrid,
    y0: f64,
    approx: &A,
    sample: usize,
) -> Result<f64> {
    let dt = grid.dt();
    let log_space = spec.log_space();
    let mut state_buf = vec![0.0; spec.dim];
    let mut y = y0;
    for n in 0..grid.num_steps() {
        let x = paths.state(sample, n);
        let input_state: &[f64] = if log_space {
            for (b, &v) in state_buf.iter_mut().zip(x) {
                *b = v.ln();
            }
            &state_buf
        } else {
            x
        };
        let z = approx.forward(&ApproximatorInput {
            time_feature: grid.time_feature(n),
            state: input_state,
        });
        let f = spec.driver.value(grid.time(n), x, y, &z);
        let dw = paths.increments().at(sample, n);
        let mut diffusion_term = 0.0;
        for (zi, wi) in z.iter().zip(dw) {
            diffusion_term += zi * wi;
        }
        y = y - f * dt + diffusion_term;
        if !y.is_finite() {
            return Err(Error::NonFinite {
                context: "value rollout".into(),
                step: n + 1,
                sample,
            });
        }
    }
    Ok(y)
}

fn check_shapes<A: Approximator>(spec: &ProblemSpec, approx: &A) -> Result<()> {
    spec.validate()?;
    if approx.state_dim() != spec.dim || approx.output_dim() != spec.dim {
        return Err(Error::DimensionMismatch(format!(
            "approximator maps {} -> {}, problem dimension is {}",
            approx.state_dim(),
            approx.output_dim(),
            spec.dim
        )));
    }
    Ok(())
}

/// Per-sample result of a traced rollout plus backward sweep.
struct SampleGrad {
    param_grad: Vec<f64>,
    y0_grad: f64,
    squared_error: f64,
}

/// Forward rollout with recorded traces, then reverse sweep pushing the
/// terminal error back onto the approximator parameters and y0.
fn sample_gradient<A: Approximator>(
    spec: &ProblemSpec,
    paths: &PathBatch,
    grid: &TimeGrid,
    y0: f64,
    approx: &A,
    sample: usize,
    batch_size: usize,
) -> Result<SampleGrad> {
    let dt = grid.dt();
    let num_steps = grid.num_steps();
    let dim = spec.dim;
    let log_space = spec.log_space();

    let mut traces = Vec::with_capacity(num_steps);
    let mut controls = Vec::with_capacity(num_steps);
    let mut values = Vec::with_capacity(num_steps + 1);
    let mut state_buf = vec![0.0; dim];

    let mut y = y0;
    values.push(y);
    for n in 0..num_steps {
        let x = paths.state(sample, n);
        let input_state: &[f64] = if log_space {
            for (b, &v) in state_buf.iter_mut().zip(x) {
                *b = v.ln();
            }
            &state_buf
        } else {
            x
        };
        let (z, trace) = approx.forward_traced(&ApproximatorInput {
            time_feature: grid.time_feature(n),
            state: input_state,
        });
        let f = spec.driver.value(grid.time(n), x, y, &z);
        let dw = paths.increments().at(sample, n);
        let mut diffusion_term = 0.0;
        for (zi, wi) in z.iter().zip(dw) {
            diffusion_term += zi * wi;
        }
        y = y - f * dt + diffusion_term;
        if !y.is_finite() {
            return Err(Error::NonFinite {
                context: "value rollout".into(),
                step: n + 1,
                sample,
            });
        }
        traces.push(trace);
        controls.push(z);
        values.push(y);
    }

    let target = (spec.terminal)(paths.terminal(sample));
    let error = y - target;
    let squared_error = error * error;

    // dL/dY_T for the batch-mean loss
    let mut adjoint = 2.0 * error / batch_size as f64;
    let mut param_grad = vec![0.0; approx.param_count()];
    let mut upstream = vec![0.0; dim];
    let mut driver_dz = vec![0.0; dim];

    for n in (0..num_steps).rev() {
        let x = paths.state(sample, n);
        let t = grid.time(n);
        let y_n = values[n];
        let z = &controls[n];
        let dw = paths.increments().at(sample, n);

        spec.driver.dz(t, x, y_n, z, &mut driver_dz);
        for i in 0..dim {
            upstream[i] = adjoint * (dw[i] - driver_dz[i] * dt);
        }
        approx.backward(&traces[n], &upstream, &mut param_grad);

        let f_y = spec.driver.dy(t, x, y_n, z);
        adjoint *= 1.0 - f_y * dt;
    }

    Ok(SampleGrad {
        param_grad,
        y0_grad: adjoint,
        squared_error,
    })
}

/// Mean of the terminal condition over a path batch.
fn terminal_mean(spec: &ProblemSpec, paths: &PathBatch) -> f64 {
    let mut acc = 0.0;
    for sample in 0..paths.batch() {
        acc += (spec.terminal)(paths.terminal(sample));
    }
    acc / paths.batch() as f64
}

/// Mean terminal value of the zero-control rollout started at y0. Used to
/// calibrate where the trainable initial value should start.
fn zero_control_mean(spec: &ProblemSpec, paths: &PathBatch, y0: f64) -> Result<f64> {
    let zero = crate::approximator::ZeroControl::new(spec.dim);
    let terminal = rollout(spec, paths, &TrainableHead { y0 }, &zero)?;
    Ok(terminal.iter().sum::<f64>() / terminal.len() as f64)
}

/// Initial value for y0: the uncontrolled rollout maps y0 affinely (for the
/// driver families here) to the mean terminal value, so solving
/// `A·y0 + B = mean g(X_T)` starts the head on the payoff scale already
/// corrected for the driver's deterministic growth. A uniform draw of
/// configurable relative width is added on top.
fn initial_head(
    spec: &ProblemSpec,
    paths: &PathBatch,
    config: &SolverConfig,
    seed: u64,
) -> Result<f64> {
    let mean_g = terminal_mean(spec, paths);
    let at_zero = zero_control_mean(spec, paths, 0.0)?;
    let at_one = zero_control_mean(spec, paths, 1.0)?;
    let gain = at_one - at_zero;
    let center = if gain.abs() > 1e-9 {
        (mean_g - at_zero) / gain
    } else {
        mean_g
    };
    let u = 2.0 * CounterRng::new(seed, Stream::HeadInit).uniform(0, 0, 0) - 1.0;
    Ok(center + config.y0_init_spread * center.abs() * u)
}

/// Minibatch order for one epoch.
fn epoch_order(config: &SolverConfig, seed: u64, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..config.num_paths).collect();
    if config.shuffle {
        let rng = CounterRng::new(seed, Stream::Shuffle);
        // Fisher-Yates keyed on (epoch, position)
        for i in (1..order.len()).rev() {
            let j = (rng.raw(epoch as u64, i as u64, 0) % (i as u64 + 1)) as usize;
            order.swap(i, j);
        }
    }
    order
}

/// Train the approximator and the initial value. Fully deterministic given
/// (spec, config, approximator state, seed); the returned report carries the
/// loss trace and, when an oracle value is supplied, the relative error.
pub fn train<A: Approximator>(
    spec: &ProblemSpec,
    config: &SolverConfig,
    approx: &mut A,
    seed: u64,
    oracle: Option<f64>,
) -> Result<TrainReport> {
    config.validate()?;
    check_shapes(spec, approx)?;
    let started = Instant::now();

    let grid = TimeGrid::new(spec.horizon, config.num_steps)?;
    let increments = sample_increments(seed, config.num_paths, &grid, spec.dim)?;
    let paths = simulate_forward(spec, &increments, &grid)?;

    let mut head = TrainableHead {
        y0: initial_head(spec, &paths, config, seed)?,
    };

    let n_params = approx.param_count();
    let mut adam = AdamState::new(
        AdamConfig::with_learning_rate(config.learning_rate),
        n_params + 1,
    );
    let mut flat = vec![0.0; n_params + 1];
    let mut grads = vec![0.0; n_params + 1];
    let iterations_per_epoch = config.num_paths / config.batch_size;
    let mut losses = Vec::with_capacity(config.epochs * iterations_per_epoch);

    for epoch in 0..config.epochs {
        let order = epoch_order(config, seed, epoch);
        for block in 0..iterations_per_epoch {
            let iteration = epoch * iterations_per_epoch + block;
            let batch = &order[block * config.batch_size..(block + 1) * config.batch_size];

            let per_sample: Vec<SampleGrad> = batch
                .par_iter()
                .map(|&sample| {
                    sample_gradient(
                        spec,
                        &paths,
                        &grid,
                        head.y0,
                        &*approx,
                        sample,
                        config.batch_size,
                    )
                })
                .collect::<Result<_>>()
                .map_err(|e| match e {
                    Error::NonFinite { context, step, sample } => Error::Diverged {
                        iteration,
                        context: format!("{context} non-finite at step {step}, sample {sample}"),
                    },
                    other => other,
                })?;

            // fixed-order reduction keeps the result independent of the
            // parallel schedule
            grads.fill(0.0);
            let mut loss = 0.0;
            for s in &per_sample {
                for (g, c) in grads[..n_params].iter_mut().zip(&s.param_grad) {
                    *g += c;
                }
                grads[n_params] += s.y0_grad;
                loss += s.squared_error;
            }
            loss /= config.batch_size as f64;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    iteration,
                    context: "batch loss is not finite".into(),
                });
            }
            losses.push(loss);

            flat[..n_params].copy_from_slice(approx.params());
            flat[n_params] = head.y0;
            adam.step(&mut flat, &grads).map_err(|e| match e {
                Error::Diverged { context, .. } => Error::Diverged { iteration, context },
                other => other,
            })?;
            approx.params_mut().copy_from_slice(&flat[..n_params]);
            head.y0 = flat[n_params];
        }
    }

    Ok(TrainReport {
        y0: head.y0,
        losses,
        seed,
        wall_clock: started.elapsed().as_secs_f64(),
        oracle,
        relative_error: oracle.map(|o| relative_error(head.y0, o)),
    })
}

/// Recompute the terminal loss on freshly simulated paths without touching
/// any parameter.
pub fn evaluate<A: Approximator>(
    spec: &ProblemSpec,
    head: &TrainableHead,
    approx: &A,
    fresh_seed: u64,
    num_paths: usize,
    num_steps: usize,
) -> Result<EvalReport> {
    check_shapes(spec, approx)?;
    let grid = TimeGrid::new(spec.horizon, num_steps)?;
    let increments = sample_increments(fresh_seed, num_paths, &grid, spec.dim)?;
    let paths = simulate_forward(spec, &increments, &grid)?;
    let terminal = rollout(spec, &paths, head, approx)?;
    let mut loss = 0.0;
    for (sample, y) in terminal.iter().enumerate() {
        let target = (spec.terminal)(paths.terminal(sample));
        loss += (y - target) * (y - target);
    }
    Ok(EvalReport {
        mean_loss: loss / num_paths as f64,
        y0: head.y0,
    })
}
