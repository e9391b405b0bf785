use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qbsde_cli::commands::{cmd_init, cmd_oracle, cmd_sweep, cmd_train, CliError};

/// BSDE solver for high-dimensional semilinear parabolic PDEs with dense
/// and variational-quantum-circuit control approximators.
#[derive(Parser)]
#[command(name = "qbsde", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a reference config file.
    Init {
        /// Destination path for the template.
        #[arg(long, default_value = "qbsde.toml")]
        config: PathBuf,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Compute the reference values for the configured sweep points.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bound on worker threads for parallel sections.
        #[arg(long)]
        workers: Option<usize>,
        /// Replace the oracle seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Train one (problem, architecture, seed) run.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bound on worker threads for parallel sections.
        #[arg(long)]
        workers: Option<usize>,
        /// Replace the experiment base seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Run the full sweep and emit per-run plus aggregate CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed_override: Option<u64>,
    },
}

fn configure_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        // results are schedule-independent, so a failure to resize the pool
        // (e.g. it already exists) is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Init { config, force } => cmd_init(&config, force),
        Command::Oracle {
            config,
            out,
            workers,
            seed_override,
        } => {
            configure_workers(workers);
            cmd_oracle(&config, out.as_deref(), seed_override).map(|_| ())
        }
        Command::Train {
            config,
            out,
            workers,
            seed_override,
        } => {
            configure_workers(workers);
            cmd_train(&config, out.as_deref(), seed_override).map(|_| ())
        }
        Command::Sweep {
            config,
            out,
            workers,
            seed_override,
        } => {
            configure_workers(workers);
            let outcome = cmd_sweep(&config, out.as_deref(), seed_override)?;
            if outcome.n_failed > 0 {
                return Err(CliError::Run(format!(
                    "{} of {} sweep runs failed",
                    outcome.n_failed, outcome.n_runs
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
