//! Command implementations shared by the binary and the test suites.
//!
//! Output files (all CSV, UTF-8, comma-separated, header row mandatory):
//!   oracle:  oracle.csv           family,sweep_value,option_type_or_lambda,value,std_error
//!   train:   loss.csv             iteration,loss
//!            train_summary.csv    label,arch,seed,y0,oracle,rel_err,abs_err
//!            checkpoint.json      trained head + model tensors
//!   sweep:   sweep_runs.csv       sweep_value,option_type_or_lambda,arch,seed,y0,oracle,rel_err,abs_err,status
//!            sweep_aggregate.csv  sweep_value,option_type_or_lambda,arch,mean_rel_err_pct,std_rel_err_pct,n_seeds,n_failed
//!
//! Wall-clock time is never written to CSV, so identical configurations
//! produce byte-identical files.

use std::path::{Path, PathBuf};

use qbsde::checkpoint::{self, Checkpoint};
use qbsde::experiments::{
    derive_seed, reference_value, run_sweep, summarize, sweep_points, train_point, RunOutcome,
    SweepSpec,
};
use qbsde::solver::TrainableHead;

use crate::config::{template, RunConfig};
use crate::csv::{format_float, format_opt, write_csv};

/// Failure modes mapped to process exit codes: configuration problems exit
/// with 2, run-time failures (divergence, partial sweeps, I/O) with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) => m,
            CliError::Run(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

/// Write the reference configuration template.
pub fn cmd_init(path: &Path, force: bool) -> CliResult<()> {
    if path.exists() && !force {
        return Err(CliError::Config(format!(
            "{} already exists (pass --force to overwrite)",
            path.display()
        )));
    }
    std::fs::write(path, template()).map_err(run_err)?;
    println!("wrote config template to {}", path.display());
    Ok(())
}

fn load_config(path: &Path) -> CliResult<RunConfig> {
    RunConfig::load(path).map_err(CliError::Config)
}

/// Resolve the output directory (flag overrides config) and create it only
/// after the configuration has validated.
fn prepare_out_dir(config: &RunConfig, out_flag: Option<&Path>) -> CliResult<PathBuf> {
    let dir = out_flag
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    std::fs::create_dir_all(&dir).map_err(run_err)?;
    Ok(dir)
}

/// Compute reference values for every sweep point and write oracle.csv.
pub fn cmd_oracle(
    config_path: &Path,
    out_flag: Option<&Path>,
    seed_override: Option<u64>,
) -> CliResult<PathBuf> {
    let config = load_config(config_path)?;
    let mut spec = config.sweep_spec(None).map_err(CliError::Config)?;
    if let Some(seed) = seed_override {
        spec.oracle_seed = seed;
    }
    let out_dir = prepare_out_dir(&config, out_flag)?;

    let points = sweep_points(&spec.family);
    let mut rows = Vec::with_capacity(points.len());
    for point in &points {
        let (value, std_error) = reference_value(&spec, point).map_err(run_err)?;
        println!(
            "oracle[{} {} {}]: value={value} std_error={std_error}",
            config.problem.family,
            point.kind_label(),
            point.value
        );
        rows.push(vec![
            config.problem.family.clone(),
            format_float(point.value),
            point.kind_label().to_string(),
            format_float(value),
            format_float(std_error),
        ]);
    }
    let path = out_dir.join("oracle.csv");
    write_csv(
        &path,
        &[
            "family",
            "sweep_value",
            "option_type_or_lambda",
            "value",
            "std_error",
        ],
        rows,
    )
    .map_err(run_err)?;
    Ok(path)
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub y0: f64,
    pub oracle: f64,
    pub relative_error: f64,
    pub out_dir: PathBuf,
}

/// Train one (problem, architecture, seed) and persist loss curve, summary
/// and checkpoint. The configuration must name exactly one sweep point.
pub fn cmd_train(
    config_path: &Path,
    out_flag: Option<&Path>,
    seed_override: Option<u64>,
) -> CliResult<TrainOutcome> {
    let config = load_config(config_path)?;
    let spec: SweepSpec = config.sweep_spec(seed_override).map_err(CliError::Config)?;
    let points = sweep_points(&spec.family);
    if points.len() != 1 {
        return Err(CliError::Config(format!(
            "train needs a config with exactly one sweep point, found {} \
             (narrow strikes/option_types or lambdas)",
            points.len()
        )));
    }
    let point = points[0];
    let out_dir = prepare_out_dir(&config, out_flag)?;

    let (oracle, _) = reference_value(&spec, &point).map_err(run_err)?;
    let seed = derive_seed(spec.base_seed, &point, 0);
    let (report, model) = train_point(&spec, &point, seed, oracle).map_err(run_err)?;

    write_csv(
        &out_dir.join("loss.csv"),
        &["iteration", "loss"],
        report
            .losses
            .iter()
            .enumerate()
            .map(|(i, l)| vec![i.to_string(), format_float(*l)]),
    )
    .map_err(run_err)?;

    let rel = report.relative_error.unwrap_or(f64::NAN);
    write_csv(
        &out_dir.join("train_summary.csv"),
        &["label", "arch", "seed", "y0", "oracle", "rel_err", "abs_err"],
        [vec![
            format!("{}_{}_{}", config.problem.family, point.kind_label(), point.value),
            spec.arch.label().to_string(),
            seed.to_string(),
            format_float(report.y0),
            format_float(oracle),
            format_float(rel),
            format_float((report.y0 - oracle).abs()),
        ]],
    )
    .map_err(run_err)?;

    let head = TrainableHead { y0: report.y0 };
    checkpoint::save(
        &out_dir.join("checkpoint.json"),
        &Checkpoint::new(&head, model.record()),
    )
    .map_err(run_err)?;

    println!(
        "train[{} {} {} seed={seed}]: y0={} oracle={oracle} rel_err={:.4}%",
        config.problem.family,
        point.kind_label(),
        point.value,
        report.y0,
        100.0 * rel
    );

    Ok(TrainOutcome {
        y0: report.y0,
        oracle,
        relative_error: rel,
        out_dir,
    })
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub n_runs: usize,
    pub n_failed: usize,
    pub out_dir: PathBuf,
}

/// Full sweep: per-run rows plus aggregate rows.
pub fn cmd_sweep(
    config_path: &Path,
    out_flag: Option<&Path>,
    seed_override: Option<u64>,
) -> CliResult<SweepOutcome> {
    let config = load_config(config_path)?;
    let spec = config.sweep_spec(seed_override).map_err(CliError::Config)?;
    let out_dir = prepare_out_dir(&config, out_flag)?;

    let report = run_sweep(&spec).map_err(run_err)?;

    let mut run_rows = Vec::new();
    for point in &report.points {
        for run in &point.runs {
            let (y0, rel, abs, status) = match &run.outcome {
                RunOutcome::Completed {
                    y0,
                    relative_error,
                    absolute_error,
                    ..
                } => (Some(*y0), Some(*relative_error), Some(*absolute_error), "ok"),
                RunOutcome::Failed { .. } => (None, None, None, "failed"),
            };
            run_rows.push(vec![
                format_float(point.point.value),
                point.point.kind_label().to_string(),
                report.arch.clone(),
                run.seed.to_string(),
                format_opt(y0),
                format_float(point.oracle),
                format_opt(rel),
                format_opt(abs),
                status.to_string(),
            ]);
        }
    }
    write_csv(
        &out_dir.join("sweep_runs.csv"),
        &[
            "sweep_value",
            "option_type_or_lambda",
            "arch",
            "seed",
            "y0",
            "oracle",
            "rel_err",
            "abs_err",
            "status",
        ],
        run_rows,
    )
    .map_err(run_err)?;

    let rows = summarize(&report);
    write_csv(
        &out_dir.join("sweep_aggregate.csv"),
        &[
            "sweep_value",
            "option_type_or_lambda",
            "arch",
            "mean_rel_err_pct",
            "std_rel_err_pct",
            "n_seeds",
            "n_failed",
        ],
        rows.iter().map(|r| {
            vec![
                format_float(r.sweep_value),
                r.kind_label.clone(),
                r.arch.clone(),
                format_opt(r.mean_rel_err_pct),
                format_opt(r.std_rel_err_pct),
                r.n_seeds.to_string(),
                r.n_failed.to_string(),
            ]
        }),
    )
    .map_err(run_err)?;

    for r in &rows {
        match (r.mean_rel_err_pct, r.std_rel_err_pct) {
            (Some(mean), Some(std)) => println!(
                "sweep[{} {} {}]: mean_rel_err={mean:.4}% std={std:.4}% ({} seeds, {} failed)",
                r.arch, r.kind_label, r.sweep_value, r.n_seeds, r.n_failed
            ),
            _ => println!(
                "sweep[{} {} {}]: all {} runs failed",
                r.arch, r.kind_label, r.sweep_value, r.n_failed
            ),
        }
    }

    let n_failed = report.num_failed();
    let n_runs = report.points.iter().map(|p| p.runs.len()).sum();
    if n_failed > 0 {
        eprintln!("warning: {n_failed} of {n_runs} runs failed");
    }
    Ok(SweepOutcome {
        n_runs,
        n_failed,
        out_dir,
    })
}
