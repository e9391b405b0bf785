//! Seeded Brownian increments and forward Euler trajectories on a uniform
//! time grid.
//!
//! Increments are counter-addressable: entry (sample, step, coordinate) is a
//! pure function of the seed, so batches can be generated in slices on
//! independent workers and still agree bitwise with a serial run.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::{Diffusion, Dynamics, ProblemSpec};
use crate::rng::{CounterRng, Stream};

/// Uniform grid 0 = t_0 < t_1 < … < t_N = T with dt = T / N.
///
/// Construction requires that `dt * N` reproduces the horizon exactly in
/// floating point, so step times never drift past the terminal time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    num_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, num_steps: usize) -> Result<Self> {
        if num_steps == 0 {
            return Err(Error::InvalidArgument(
                "time grid needs at least one step".into(),
            ));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        let dt = horizon / num_steps as f64;
        if dt * num_steps as f64 != horizon {
            return Err(Error::InvalidArgument(format!(
                "step count {num_steps} does not divide horizon {horizon} exactly"
            )));
        }
        Ok(TimeGrid { horizon, num_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.num_steps as f64
    }

    /// Time of grid node n (0 ≤ n ≤ N).
    pub fn time(&self, step: usize) -> f64 {
        if step == self.num_steps {
            self.horizon
        } else {
            step as f64 * self.dt()
        }
    }

    /// t_n / T, the normalized time fed to approximators.
    pub fn time_feature(&self, step: usize) -> f64 {
        self.time(step) / self.horizon
    }
}

/// Batch of Brownian increments, shape [batch, N, dim], each entry
/// N(0, dt).
#[derive(Debug, Clone)]
pub struct BrownianIncrements {
    values: Vec<f64>,
    batch: usize,
    num_steps: usize,
    dim: usize,
    dt: f64,
}

impl BrownianIncrements {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Increment vector ΔW for one sample and step.
    #[inline]
    pub fn at(&self, sample: usize, step: usize) -> &[f64] {
        let start = (sample * self.num_steps + step) * self.dim;
        &self.values[start..start + self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Draw increments for samples 0..batch. Identical arguments give a
/// bitwise-identical tensor.
pub fn sample_increments(
    seed: u64,
    batch: usize,
    grid: &TimeGrid,
    dim: usize,
) -> Result<BrownianIncrements> {
    sample_increments_range(seed, 0, batch, grid, dim)
}

/// Draw increments for the global sample indices
/// `first_sample..first_sample + count`. Concatenating ranges reproduces the
/// full batch exactly, which is what makes worker partitioning safe.
pub fn sample_increments_range(
    seed: u64,
    first_sample: usize,
    count: usize,
    grid: &TimeGrid,
    dim: usize,
) -> Result<BrownianIncrements> {
    if count == 0 {
        return Err(Error::InvalidArgument("batch must be positive".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let rng = CounterRng::new(seed, Stream::PathNoise);
    let num_steps = grid.num_steps();
    let scale = grid.dt().sqrt();
    let stride = num_steps * dim;
    let mut values = vec![0.0; count * stride];

    let fill_sample = |local: usize, chunk: &mut [f64]| {
        let sample = (first_sample + local) as u64;
        for step in 0..num_steps {
            for coord in 0..dim {
                chunk[step * dim + coord] =
                    rng.normal(sample, step as u64, coord as u64) * scale;
            }
        }
    };

    // Worth parallelizing only for large batches; either way the entries are
    // pure functions of their counters.
    if count >= 512 {
        values
            .par_chunks_mut(stride)
            .enumerate()
            .for_each(|(local, chunk)| fill_sample(local, chunk));
    } else {
        for (local, chunk) in values.chunks_mut(stride).enumerate() {
            fill_sample(local, chunk);
        }
    }

    Ok(BrownianIncrements {
        values,
        batch: count,
        num_steps,
        dim,
        dt: grid.dt(),
    })
}

/// Simulated forward states, shape [batch, N + 1, dim], plus the increments
/// that produced them.
pub struct PathBatch {
    states: Vec<f64>,
    increments: BrownianIncrements,
    grid: TimeGrid,
    dim: usize,
}

impl PathBatch {
    pub fn batch(&self) -> usize {
        self.increments.batch()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn increments(&self) -> &BrownianIncrements {
        &self.increments
    }

    /// State X at one sample and grid node (0 ≤ step ≤ N).
    #[inline]
    pub fn state(&self, sample: usize, step: usize) -> &[f64] {
        let start = (sample * (self.grid.num_steps() + 1) + step) * self.dim;
        &self.states[start..start + self.dim]
    }

    /// Terminal state X_T of one sample.
    #[inline]
    pub fn terminal(&self, sample: usize) -> &[f64] {
        self.state(sample, self.grid.num_steps())
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }
}

/// Run the forward Euler recursion from the problem's initial point through
/// every increment. Log-space problems are stepped in log coordinates and
/// exponentiated, so their states stay strictly positive.
pub fn simulate_forward(
    spec: &ProblemSpec,
    increments: &BrownianIncrements,
    grid: &TimeGrid,
) -> Result<PathBatch> {
    spec.validate()?;
    if increments.dim() != spec.dim {
        return Err(Error::DimensionMismatch(format!(
            "increments have dimension {}, problem has {}",
            increments.dim(),
            spec.dim
        )));
    }
    if increments.num_steps() != grid.num_steps() || increments.dt() != grid.dt() {
        return Err(Error::DimensionMismatch(
            "increments were drawn on a different time grid".into(),
        ));
    }

    let dim = spec.dim;
    let num_steps = grid.num_steps();
    let dt = grid.dt();
    let batch = increments.batch();
    let state_stride = (num_steps + 1) * dim;
    let inc_stride = num_steps * dim;
    let mut states = vec![0.0; batch * state_stride];

    let step_sample = |sample: usize, chunk: &mut [f64], incs: &[f64]| -> Result<()> {
        chunk[..dim].copy_from_slice(&spec.initial);
        match &spec.dynamics {
            Dynamics::Direct { drift, diffusion } => {
                let mut b = vec![0.0; dim];
                for n in 0..num_steps {
                    let (done, rest) = chunk.split_at_mut((n + 1) * dim);
                    let x = &done[n * dim..];
                    let next = &mut rest[..dim];
                    drift(x, &mut b);
                    let dw = &incs[n * dim..(n + 1) * dim];
                    match diffusion {
                        Diffusion::Scalar(c) => {
                            for i in 0..dim {
                                next[i] = x[i] + b[i] * dt + c * dw[i];
                            }
                        }
                        Diffusion::StateDiag(c) => {
                            for i in 0..dim {
                                next[i] = x[i] + b[i] * dt + c * x[i] * dw[i];
                            }
                        }
                    }
                    if next.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite {
                            context: "forward simulation".into(),
                            step: n + 1,
                            sample,
                        });
                    }
                }
                Ok(())
            }
            Dynamics::GeometricLog { rate, vol } => {
                let log_drift = (rate - 0.5 * vol * vol) * dt;
                let mut log_x: Vec<f64> = spec.initial.iter().map(|v| v.ln()).collect();
                for n in 0..num_steps {
                    let dw = &incs[n * dim..(n + 1) * dim];
                    let next = &mut chunk[(n + 1) * dim..(n + 2) * dim];
                    for i in 0..dim {
                        log_x[i] += log_drift + vol * dw[i];
                        next[i] = log_x[i].exp();
                    }
                    if next.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite {
                            context: "forward simulation (log space)".into(),
                            step: n + 1,
                            sample,
                        });
                    }
                }
                Ok(())
            }
        }
    };

    if batch >= 512 {
        states
            .par_chunks_mut(state_stride)
            .zip(increments.values().par_chunks(inc_stride))
            .enumerate()
            .try_for_each(|(sample, (chunk, incs))| step_sample(sample, chunk, incs))?;
    } else {
        for (sample, (chunk, incs)) in states
            .chunks_mut(state_stride)
            .zip(increments.values().chunks(inc_stride))
            .enumerate()
        {
            step_sample(sample, chunk, incs)?;
        }
    }

    Ok(PathBatch {
        states,
        increments: increments.clone(),
        grid: *grid,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        make_black_scholes, make_hjb, BlackScholesParams, Diffusion, Dynamics, HjbParams,
        ProblemSpec, ZeroDriver,
    };

    fn zero_dynamics_spec(dim: usize) -> ProblemSpec {
        ProblemSpec {
            dim,
            dynamics: Dynamics::Direct {
                drift: Box::new(|_x, out| out.fill(0.0)),
                diffusion: Diffusion::Scalar(0.0),
            },
            driver: Box::new(ZeroDriver),
            terminal: Box::new(|_x| 0.0),
            initial: vec![1.0; dim],
            horizon: 1.0,
            label: "zero".into(),
        }
    }

    #[test]
    fn grid_divides_horizon() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        assert_eq!(grid.dt(), 0.1);
        assert_eq!(grid.time(10), 1.0);
        assert_eq!(grid.time_feature(5), 0.5);
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 4).is_err());
    }

    #[test]
    fn increments_deterministic_and_seed_sensitive() {
        let grid = TimeGrid::new(0.3, 3).unwrap();
        let a = sample_increments(7, 2, &grid, 1).unwrap();
        let b = sample_increments(7, 2, &grid, 1).unwrap();
        assert_eq!(a.values(), b.values());

        let c = sample_increments(8, 2, &grid, 1).unwrap();
        assert!(a.values().iter().zip(c.values()).any(|(x, y)| x != y));
    }

    #[test]
    fn increments_law_of_large_numbers() {
        // One step of size dt = 0.1 over 1e5 samples.
        let grid = TimeGrid::new(0.1, 1).unwrap();
        let n = 100_000usize;
        let incs = sample_increments(42, n, &grid, 1).unwrap();
        let mean = incs.values().iter().sum::<f64>() / n as f64;
        let var = incs.values().iter().map(|v| v * v).sum::<f64>() / n as f64 - mean * mean;
        let mean_tolerance = 4.0 * (0.1f64 / n as f64).sqrt();
        assert!(mean.abs() <= mean_tolerance, "mean {mean}");
        assert!((var - 0.1).abs() <= 0.05 * 0.1, "variance {var}");
    }

    #[test]
    fn increments_reject_degenerate_shapes() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        assert!(sample_increments(1, 0, &grid, 1).is_err());
        assert!(sample_increments(1, 1, &grid, 0).is_err());
    }

    #[test]
    fn partitioned_generation_matches_full_batch() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let full = sample_increments(11, 6, &grid, 3).unwrap();
        let head = sample_increments_range(11, 0, 2, &grid, 3).unwrap();
        let tail = sample_increments_range(11, 2, 4, &grid, 3).unwrap();
        let mut joined = head.values().to_vec();
        joined.extend_from_slice(tail.values());
        assert_eq!(full.values(), joined.as_slice());
    }

    #[test]
    fn zero_dynamics_keeps_initial_state() {
        let spec = zero_dynamics_spec(3);
        let grid = TimeGrid::new(1.0, 5).unwrap();
        let incs = sample_increments(3, 4, &grid, 3).unwrap();
        let paths = simulate_forward(&spec, &incs, &grid).unwrap();
        for sample in 0..4 {
            for step in 0..=5 {
                assert_eq!(paths.state(sample, step), &[1.0, 1.0, 1.0]);
            }
        }
    }

    /// Per-step geometric recursion with all noise zeroed: one step of the
    /// log-space scheme multiplies the state by exp((r - σ²/2) dt).
    #[test]
    fn log_space_drift_step() {
        let params = BlackScholesParams {
            rate: 0.1,
            vol: 0.2,
            strike: 100.0,
            spot: 100.0,
            is_call: true,
            num_options: 1,
        };
        let spec = make_black_scholes(&params, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        // all-zero increments
        let incs = BrownianIncrements {
            values: vec![0.0; 10],
            batch: 1,
            num_steps: 10,
            dim: 1,
            dt: grid.dt(),
        };
        let paths = simulate_forward(&spec, &incs, &grid).unwrap();
        let expected = 100.0 * (0.008f64).exp();
        assert!((paths.state(0, 1)[0] - expected).abs() < 1e-10);
    }

    #[test]
    fn hjb_steps_scale_increments_by_sqrt_two() {
        let spec = make_hjb(&HjbParams { lambda: 1.0, dim: 2 }, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let incs = sample_increments(5, 3, &grid, 2).unwrap();
        let paths = simulate_forward(&spec, &incs, &grid).unwrap();
        for sample in 0..3 {
            for step in 0..10 {
                let x = paths.state(sample, step);
                let next = paths.state(sample, step + 1);
                let dw = incs.at(sample, step);
                for i in 0..2 {
                    let diff = next[i] - x[i];
                    let expected = std::f64::consts::SQRT_2 * dw[i];
                    assert!(
                        (diff - expected).abs() <= 1e-12 * (1.0 + x[i].abs()),
                        "sample {sample} step {step}"
                    );
                }
            }
        }
    }

    /// With noise off, the engine must agree with a plain explicit-Euler ODE
    /// integrator written independently here.
    #[test]
    fn zero_noise_matches_scalar_ode_euler() {
        let spec = ProblemSpec {
            dim: 1,
            dynamics: Dynamics::Direct {
                drift: Box::new(|x, out| out[0] = -0.5 * x[0] + 0.3),
                diffusion: Diffusion::Scalar(0.0),
            },
            driver: Box::new(ZeroDriver),
            terminal: Box::new(|_x| 0.0),
            initial: vec![2.0],
            horizon: 1.0,
            label: "ode".into(),
        };
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let incs = BrownianIncrements {
            values: vec![0.0; 50],
            batch: 1,
            num_steps: 50,
            dim: 1,
            dt: grid.dt(),
        };
        let paths = simulate_forward(&spec, &incs, &grid).unwrap();

        // independent scalar Euler loop
        let dt = grid.dt();
        let mut y = 2.0f64;
        for step in 0..50 {
            y += (-0.5 * y + 0.3) * dt;
            assert!(
                (paths.state(0, step + 1)[0] - y).abs() < 1e-14,
                "step {step}"
            );
        }
    }

    #[test]
    fn discounted_terminal_mean_recovers_spot() {
        // Martingale check: E[X_T e^{-rT}] = X_0 for geometric dynamics.
        let params = BlackScholesParams {
            rate: 0.1,
            vol: 0.2,
            strike: 100.0,
            spot: 100.0,
            is_call: true,
            num_options: 1,
        };
        let spec = make_black_scholes(&params, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let n = 100_000usize;
        let incs = sample_increments(2024, n, &grid, 1).unwrap();
        let paths = simulate_forward(&spec, &incs, &grid).unwrap();
        let discount = (-0.1f64).exp();
        let discounted: Vec<f64> = (0..n).map(|s| paths.terminal(s)[0] * discount).collect();
        let mean = discounted.iter().sum::<f64>() / n as f64;
        let var = discounted
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n as f64 - 1.0);
        let std_err = (var / n as f64).sqrt();
        assert!(
            (mean - 100.0).abs() <= 4.0 * std_err,
            "mean {mean}, std err {std_err}"
        );
    }

    #[test]
    fn log_space_paths_stay_positive() {
        let params = BlackScholesParams {
            rate: 0.1,
            vol: 0.2,
            strike: 100.0,
            spot: 100.0,
            is_call: true,
            num_options: 3,
        };
        let spec = make_black_scholes(&params, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let incs = sample_increments(77, 500, &grid, 3).unwrap();
        let paths = simulate_forward(&spec, &incs, &grid).unwrap();
        assert!(paths.states().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn terminal_condition_is_finite_over_simulated_batches() {
        let bs = make_black_scholes(
            &BlackScholesParams {
                rate: 0.1,
                vol: 0.2,
                strike: 100.0,
                spot: 100.0,
                is_call: false,
                num_options: 5,
            },
            1.0,
        )
        .unwrap();
        let hjb = make_hjb(&HjbParams { lambda: 60.0, dim: 5 }, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        for spec in [&bs, &hjb] {
            let incs = sample_increments(55, 200, &grid, 5).unwrap();
            let paths = simulate_forward(spec, &incs, &grid).unwrap();
            for sample in 0..200 {
                assert!((spec.terminal)(paths.terminal(sample)).is_finite());
            }
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = make_hjb(&HjbParams { lambda: 2.0, dim: 4 }, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let incs = sample_increments(13, 600, &grid, 4).unwrap();
        let a = simulate_forward(&spec, &incs, &grid).unwrap();
        let b = simulate_forward(&spec, &incs, &grid).unwrap();
        assert_eq!(a.states(), b.states());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = zero_dynamics_spec(2);
        let grid = TimeGrid::new(1.0, 3).unwrap();
        let incs = sample_increments(1, 2, &grid, 5).unwrap();
        assert!(matches!(
            simulate_forward(&spec, &incs, &grid),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
