//! Solver for high-dimensional semilinear parabolic PDEs through their
//! backward-SDE representation.
//!
//! A forward diffusion is simulated with the Euler scheme on a uniform
//! grid; the backward value process is rolled forward from a trainable
//! initial scalar, with the control process supplied by a differentiable
//! approximator — either a dense rectifier network or a simulated
//! variational quantum circuit whose only trainable parameters are the
//! rotation angles (classical adapters are frozen). Training minimizes the
//! expected squared mismatch at the terminal time. All randomness is
//! counter-addressable, so every run is reproducible from its seed.

pub mod adam;
pub mod approximator;
pub mod checkpoint;
pub mod error;
pub mod experiments;
pub mod mlp;
pub mod normal;
pub mod oracles;
pub mod paths;
pub mod problems;
pub mod quantum;
pub mod rng;
pub mod solver;

pub use adam::{AdamConfig, AdamState};
pub use approximator::{Approximator, ApproximatorInput, ZeroControl};
pub use error::{Error, Result};
pub use experiments::{
    derive_seed, reference_value, run_sweep, summarize, sweep_points, train_point, ArchSpec,
    ExperimentReport, PointKind, PointReport, RunOutcome, SeedRun, SummaryRow, SweepFamily,
    SweepPoint, SweepSpec, TrainedModel,
};
pub use mlp::MlpModel;
pub use oracles::{bs_closed_form, hjb_exact, relative_error, McEstimate};
pub use paths::{
    sample_increments, sample_increments_range, simulate_forward, BrownianIncrements, PathBatch,
    TimeGrid,
};
pub use problems::{
    make_black_scholes, make_constant, make_hjb, BlackScholesParams, HjbParams, OptionKind,
    ProblemSpec,
};
pub use quantum::{StateVector, VqcModel};
pub use solver::{evaluate, rollout, train, EvalReport, SolverConfig, TrainReport, TrainableHead};
