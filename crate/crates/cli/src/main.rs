//! `fracheat`: solve, measure and verify from TOML configs.
//!
//! Exit status is 0 on success or pass, 1 when a run completes but fails its
//! verification (or a solve does not converge), 2 on usage, config, input or
//! output errors.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use log::LevelFilter;

use commands::{KernelRun, Status};
use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "fracheat", version, about = "Fractional semilinear heat equation: solver and norm verification")]
struct Cli {
    /// Output directory [default: out, or the plan's `output` key].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the parallel sections [default: all cores].
    #[arg(short, long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// More log output; repeat for more detail.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    /// Errors only.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Picard solve; writes the report JSON and solution snapshots.
    Solve {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Override a config key, e.g. `--set solver.horizon=0.25`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Lorentz and Besov-Lorentz norms of a forcing or a stored field.
    Norms {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run experiment plans; exit 1 if any fails.
    Verify {
        #[arg(long = "plan", value_name = "FILE", required = true)]
        plans: Vec<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a solvability sweep plan and print the convergence thresholds.
    Sweep {
        #[arg(long, value_name = "FILE")]
        plan: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Sample the kernel of C_T and fit its tail exponent.
    Kernel {
        #[arg(long)]
        theta: f64,
        #[arg(long = "T", value_name = "T")]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 131072)]
        points: usize,
        #[arg(long, default_value_t = 16384.0)]
        half_length: f64,
        /// Keep every n-th sample in the CSV.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
}

fn init_logging(cli: &Cli) {
    let level = if cli.quiet {
        LevelFilter::Error
    } else {
        match cli.verbose {
            0 => LevelFilter::Warn,
            1 => LevelFilter::Info,
            2 => LevelFilter::Debug,
            _ => LevelFilter::Trace,
        }
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
}

fn run(cli: Cli) -> Result<Status, Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot size the worker pool: {e}")))?;
    }
    let out = cli.out.as_deref();
    let default_out = PathBuf::from("out");
    let fixed_out = out.unwrap_or(&default_out);
    match &cli.command {
        Command::Solve { config, set } => commands::solve(config, set, fixed_out),
        Command::Norms { config, set } => commands::norms(config, set, fixed_out),
        Command::Verify { plans, set } => commands::verify(plans, set, out),
        Command::Sweep { plan, set } => commands::sweep(plan, set, out),
        Command::Kernel { theta, horizon, dim, points, half_length, stride } => commands::kernel(
            &KernelRun {
                theta: *theta,
                horizon: *horizon,
                dim: *dim,
                points: *points,
                half_length: *half_length,
                stride: *stride,
            },
            fixed_out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(&cli);
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("fracheat: {e}");
            ExitCode::from(2)
        }
    }
}
