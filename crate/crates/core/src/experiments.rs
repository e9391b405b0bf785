//! Benchmark sweeps: train one model per (sweep value, repetition), compare
//! each trained initial value against the matching reference, and aggregate
//! mean and standard deviation of the relative error.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::oracles::{bs_closed_form, hjb_exact, relative_error};
use crate::problems::{make_black_scholes, make_hjb, BlackScholesParams, HjbParams, OptionKind};
use crate::quantum::VqcModel;
use crate::rng::{CounterRng, Stream};
use crate::solver::{train, SolverConfig, TrainReport};

/// Which benchmark family a sweep runs over.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepFamily {
    BlackScholes {
        rate: f64,
        vol: f64,
        spot: f64,
        num_options: usize,
        strikes: Vec<f64>,
        option_kinds: Vec<OptionKind>,
    },
    Hjb {
        dim: usize,
        lambdas: Vec<f64>,
    },
    /// Degenerate smoke family with a constant terminal value; the
    /// reference is the value itself.
    Constant { value: f64, dim: usize },
}

/// Approximator architecture for every run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ArchSpec {
    Mlp {
        hidden_width: usize,
        hidden_layers: usize,
    },
    Vqc {
        num_qubits: usize,
        num_layers: usize,
        adapter_seed: u64,
    },
}

impl ArchSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ArchSpec::Mlp { .. } => "mlp",
            ArchSpec::Vqc { .. } => "vqc",
        }
    }
}

/// Full description of one sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: SweepFamily,
    pub arch: ArchSpec,
    pub repetitions: usize,
    pub base_seed: u64,
    pub solver: SolverConfig,
    pub horizon: f64,
    /// Sample count for Monte Carlo reference values.
    pub oracle_mc_samples: usize,
    pub oracle_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument(
                "at least one repetition is required".into(),
            ));
        }
        let empty = match &self.family {
            SweepFamily::BlackScholes {
                strikes,
                option_kinds,
                ..
            } => strikes.is_empty() || option_kinds.is_empty(),
            SweepFamily::Hjb { lambdas, .. } => lambdas.is_empty(),
            SweepFamily::Constant { value, .. } => {
                if *value == 0.0 {
                    return Err(Error::InvalidArgument(
                        "constant family needs a non-zero value for relative errors".into(),
                    ));
                }
                false
            }
        };
        if empty {
            return Err(Error::InvalidArgument("sweep values must be non-empty".into()));
        }
        self.solver.validate()
    }
}

/// What the sweep axis means at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Call,
    Put,
    Lambda,
    Constant,
}

impl PointKind {
    pub fn label(self) -> &'static str {
        match self {
            PointKind::Call => "call",
            PointKind::Put => "put",
            PointKind::Lambda => "lambda",
            PointKind::Constant => "constant",
        }
    }
}

impl From<OptionKind> for PointKind {
    fn from(kind: OptionKind) -> Self {
        match kind {
            OptionKind::Call => PointKind::Call,
            OptionKind::Put => PointKind::Put,
        }
    }
}

/// One point on the sweep axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Strike, control strength, or constant target.
    pub value: f64,
    pub kind: PointKind,
}

impl SweepPoint {
    /// Second CSV column: the option direction, "lambda", or "constant".
    pub fn kind_label(&self) -> &'static str {
        self.kind.label()
    }
}

/// Result of a single training run inside a sweep.
#[derive(Debug, Clone)]
pub enum RunOutcome {
    Completed {
        y0: f64,
        relative_error: f64,
        absolute_error: f64,
        losses: Vec<f64>,
    },
    Failed {
        reason: String,
    },
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub outcome: RunOutcome,
}

/// All repetitions of one sweep point plus their aggregates.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub point: SweepPoint,
    pub oracle: f64,
    pub oracle_std_error: f64,
    pub runs: Vec<SeedRun>,
    pub mean_relative_error: Option<f64>,
    pub std_relative_error: Option<f64>,
    /// Loss trace averaged elementwise over completed runs.
    pub mean_loss_curve: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub arch: String,
    pub points: Vec<PointReport>,
}

impl ExperimentReport {
    pub fn num_failed(&self) -> usize {
        self.points
            .iter()
            .flat_map(|p| &p.runs)
            .filter(|r| matches!(r.outcome, RunOutcome::Failed { .. }))
            .count()
    }
}

/// Fixed-schema aggregate row, one per sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub kind_label: String,
    pub arch: String,
    pub mean_rel_err_pct: Option<f64>,
    pub std_rel_err_pct: Option<f64>,
    pub n_seeds: usize,
    pub n_failed: usize,
}

/// Expand the family into its ordered sweep points.
pub fn sweep_points(family: &SweepFamily) -> Vec<SweepPoint> {
    match family {
        SweepFamily::BlackScholes {
            strikes,
            option_kinds,
            ..
        } => option_kinds
            .iter()
            .flat_map(|&kind| {
                strikes.iter().map(move |&value| SweepPoint {
                    value,
                    kind: kind.into(),
                })
            })
            .collect(),
        SweepFamily::Hjb { lambdas, .. } => lambdas
            .iter()
            .map(|&value| SweepPoint {
                value,
                kind: PointKind::Lambda,
            })
            .collect(),
        SweepFamily::Constant { value, .. } => vec![SweepPoint {
            value: *value,
            kind: PointKind::Constant,
        }],
    }
}

/// Seed for repetition `rep` of a sweep point: a keyed hash of
/// (base seed, point, repetition).
pub fn derive_seed(base_seed: u64, point: &SweepPoint, rep: usize) -> u64 {
    let rng = CounterRng::new(base_seed, Stream::SeedDerivation);
    let kind_tag = match point.kind {
        PointKind::Lambda => 0,
        PointKind::Call => 1,
        PointKind::Put => 2,
        PointKind::Constant => 3,
    };
    rng.raw(point.value.to_bits(), kind_tag, rep as u64)
}

/// Reference value and its standard error for one sweep point.
pub fn reference_value(spec: &SweepSpec, point: &SweepPoint) -> Result<(f64, f64)> {
    match &spec.family {
        SweepFamily::BlackScholes {
            rate,
            vol,
            spot,
            num_options,
            ..
        } => {
            let params = BlackScholesParams {
                rate: *rate,
                vol: *vol,
                strike: point.value,
                spot: *spot,
                is_call: point.kind == PointKind::Call,
                num_options: *num_options,
            };
            let value = bs_closed_form(&params, spec.horizon)?;
            if !(value > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "portfolio reference value {value} at strike {} is not positive",
                    point.value
                )));
            }
            Ok((value, 0.0))
        }
        SweepFamily::Hjb { dim, .. } => {
            let params = HjbParams {
                lambda: point.value,
                dim: *dim,
            };
            let origin = vec![0.0; *dim];
            let est = hjb_exact(
                &params,
                spec.horizon,
                &origin,
                0.0,
                spec.oracle_mc_samples,
                spec.oracle_seed,
            )?;
            Ok((est.value, est.std_error))
        }
        SweepFamily::Constant { value, .. } => Ok((*value, 0.0)),
    }
}

/// A trained approximator of either architecture, ready for checkpointing.
pub enum TrainedModel {
    Mlp(MlpModel),
    Vqc(VqcModel),
}

impl TrainedModel {
    pub fn record(&self) -> crate::checkpoint::ModelRecord {
        match self {
            TrainedModel::Mlp(m) => crate::checkpoint::mlp_record(m),
            TrainedModel::Vqc(m) => crate::checkpoint::vqc_record(m),
        }
    }
}

/// Build the problem for one sweep point and train a fresh model on it.
pub fn train_point(
    spec: &SweepSpec,
    point: &SweepPoint,
    seed: u64,
    oracle: f64,
) -> Result<(TrainReport, TrainedModel)> {
    let problem = match &spec.family {
        SweepFamily::BlackScholes {
            rate,
            vol,
            spot,
            num_options,
            ..
        } => make_black_scholes(
            &BlackScholesParams {
                rate: *rate,
                vol: *vol,
                strike: point.value,
                spot: *spot,
                is_call: point.kind == PointKind::Call,
                num_options: *num_options,
            },
            spec.horizon,
        )?,
        SweepFamily::Hjb { dim, .. } => make_hjb(
            &HjbParams {
                lambda: point.value,
                dim: *dim,
            },
            spec.horizon,
        )?,
        SweepFamily::Constant { value, dim } => {
            crate::problems::make_constant(*value, *dim, spec.horizon)?
        }
    };

    match &spec.arch {
        ArchSpec::Mlp {
            hidden_width,
            hidden_layers,
        } => {
            let mut model =
                MlpModel::with_hidden(problem.dim, *hidden_width, *hidden_layers, seed)?;
            let report = train(&problem, &spec.solver, &mut model, seed, Some(oracle))?;
            Ok((report, TrainedModel::Mlp(model)))
        }
        ArchSpec::Vqc {
            num_qubits,
            num_layers,
            adapter_seed,
        } => {
            // fresh adapters per run, deterministic in (config seed, run seed)
            let run_adapter_seed =
                CounterRng::new(*adapter_seed, Stream::SeedDerivation).raw(seed, 0, 1);
            let mut model = VqcModel::new(
                problem.dim,
                *num_qubits,
                *num_layers,
                seed,
                run_adapter_seed,
            )?;
            let report = train(&problem, &spec.solver, &mut model, seed, Some(oracle))?;
            Ok((report, TrainedModel::Vqc(model)))
        }
    }
}

/// Run every (sweep value, repetition) job and aggregate. Failed runs are
/// recorded per seed, never dropped.
pub fn run_sweep(spec: &SweepSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let points = sweep_points(&spec.family);

    // reference values once per point
    let references: Vec<(f64, f64)> = points
        .iter()
        .map(|p| reference_value(spec, p))
        .collect::<Result<_>>()?;

    // derived seeds must not collide within the sweep
    let mut all_seeds: Vec<u64> = Vec::new();
    for point in &points {
        for rep in 0..spec.repetitions {
            all_seeds.push(derive_seed(spec.base_seed, point, rep));
        }
    }
    {
        let mut sorted = all_seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != all_seeds.len() {
            return Err(Error::InvalidArgument(
                "derived run seeds collide; choose a different base seed".into(),
            ));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..spec.repetitions).map(move |r| (p, r)))
        .collect();

    let run_results: Vec<SeedRun> = jobs
        .par_iter()
        .map(|&(point_idx, rep)| {
            let point = &points[point_idx];
            let seed = derive_seed(spec.base_seed, point, rep);
            let oracle = references[point_idx].0;
            let outcome = match train_point(spec, point, seed, oracle) {
                Ok((report, _model)) => RunOutcome::Completed {
                    y0: report.y0,
                    relative_error: relative_error(report.y0, oracle),
                    absolute_error: (report.y0 - oracle).abs(),
                    losses: report.losses,
                },
                Err(err) => RunOutcome::Failed {
                    reason: err.to_string(),
                },
            };
            SeedRun { seed, outcome }
        })
        .collect();

    let mut report_points = Vec::with_capacity(points.len());
    for (point_idx, point) in points.iter().enumerate() {
        let runs: Vec<SeedRun> = run_results
            [point_idx * spec.repetitions..(point_idx + 1) * spec.repetitions]
            .to_vec();
        report_points.push(aggregate_point(
            *point,
            references[point_idx].0,
            references[point_idx].1,
            runs,
        ));
    }

    Ok(ExperimentReport {
        arch: spec.arch.label().to_string(),
        points: report_points,
    })
}

/// Pure aggregation of per-seed results for one sweep point. The standard
/// deviation uses the sample (n-1) convention.
pub fn aggregate_point(
    point: SweepPoint,
    oracle: f64,
    oracle_std_error: f64,
    runs: Vec<SeedRun>,
) -> PointReport {
    let errors: Vec<f64> = runs
        .iter()
        .filter_map(|r| match &r.outcome {
            RunOutcome::Completed { relative_error, .. } => Some(*relative_error),
            RunOutcome::Failed { .. } => None,
        })
        .collect();

    let (mean, std) = if errors.is_empty() {
        (None, None)
    } else {
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let std = if errors.len() > 1 {
            let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0);
            Some(var.sqrt())
        } else {
            Some(0.0)
        };
        (Some(mean), std)
    };

    let curves: Vec<&Vec<f64>> = runs
        .iter()
        .filter_map(|r| match &r.outcome {
            RunOutcome::Completed { losses, .. } => Some(losses),
            RunOutcome::Failed { .. } => None,
        })
        .collect();
    let mean_loss_curve = if curves.is_empty() {
        Vec::new()
    } else {
        let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
        (0..len)
            .map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / curves.len() as f64)
            .collect()
    };

    PointReport {
        point,
        oracle,
        oracle_std_error,
        runs,
        mean_relative_error: mean,
        std_relative_error: std,
        mean_loss_curve,
    }
}

/// Plot-ready aggregate rows, in sweep order.
pub fn summarize(report: &ExperimentReport) -> Vec<SummaryRow> {
    report
        .points
        .iter()
        .map(|p| {
            let n_failed = p
                .runs
                .iter()
                .filter(|r| matches!(r.outcome, RunOutcome::Failed { .. }))
                .count();
            SummaryRow {
                sweep_value: p.point.value,
                kind_label: p.point.kind_label().to_string(),
                arch: report.arch.clone(),
                mean_rel_err_pct: p.mean_relative_error.map(|m| 100.0 * m),
                std_rel_err_pct: p.std_relative_error.map(|s| 100.0 * s),
                n_seeds: p.runs.len() - n_failed,
                n_failed,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn completed(rel: f64) -> SeedRun {
        SeedRun {
            seed: 0,
            outcome: RunOutcome::Completed {
                y0: 0.0,
                relative_error: rel,
                absolute_error: rel,
                losses: vec![1.0, 0.5],
            },
        }
    }

    fn point() -> SweepPoint {
        SweepPoint {
            value: 100.0,
            kind: PointKind::Call,
        }
    }

    #[test]
    fn identical_errors_have_zero_std() {
        let runs = vec![completed(0.01); 5];
        let agg = aggregate_point(point(), 1.0, 0.0, runs);
        assert_eq!(agg.mean_relative_error, Some(0.01));
        assert_eq!(agg.std_relative_error, Some(0.0));
    }

    #[test]
    fn two_point_sample_std() {
        let runs = vec![completed(0.0), completed(0.02)];
        let agg = aggregate_point(point(), 1.0, 0.0, runs);
        assert_eq!(agg.mean_relative_error, Some(0.01));
        // sample std of {0, 2}% is √2 %
        let std = agg.std_relative_error.unwrap();
        assert!((std - 0.02 / (2.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_runs_emit_no_mean() {
        let agg = aggregate_point(point(), 1.0, 0.0, Vec::new());
        assert_eq!(agg.mean_relative_error, None);
        let report = ExperimentReport {
            arch: "mlp".into(),
            points: vec![agg],
        };
        let rows = summarize(&report);
        assert_eq!(rows[0].n_seeds, 0);
        assert_eq!(rows[0].mean_rel_err_pct, None);
    }

    #[test]
    fn failed_runs_are_counted_not_dropped() {
        let mut runs = vec![completed(0.01), completed(0.03)];
        runs.push(SeedRun {
            seed: 9,
            outcome: RunOutcome::Failed {
                reason: "diverged".into(),
            },
        });
        let agg = aggregate_point(point(), 1.0, 0.0, runs);
        assert_eq!(agg.mean_relative_error, Some(0.02));
        let report = ExperimentReport {
            arch: "vqc".into(),
            points: vec![agg],
        };
        let rows = summarize(&report);
        assert_eq!(rows[0].n_seeds, 2);
        assert_eq!(rows[0].n_failed, 1);
    }

    #[test]
    fn derived_seeds_differ_across_points_and_reps() {
        let a = derive_seed(42, &point(), 0);
        let b = derive_seed(42, &point(), 1);
        let c = derive_seed(
            42,
            &SweepPoint {
                value: 110.0,
                kind: PointKind::Call,
            },
            0,
        );
        let d = derive_seed(
            42,
            &SweepPoint {
                value: 100.0,
                kind: PointKind::Put,
            },
            0,
        );
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn mean_loss_curve_averages_elementwise() {
        let runs = vec![completed(0.01), completed(0.02)];
        let agg = aggregate_point(point(), 1.0, 0.0, runs);
        assert_eq!(agg.mean_loss_curve, vec![1.0, 0.5]);
    }
}
