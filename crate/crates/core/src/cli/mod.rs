//! The `lindescent` command line.
//!
//! Subcommands `solve`, `fixed-point` and `metric` read a problem config;
//! `check` runs the built-in invariant suite. Exit codes: `0` success,
//! `1` configuration or runtime error (or a failed audit), `2` when the
//! descent hit its iteration limit.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;

pub use commands::{cmd_check, cmd_fixed_point, cmd_metric, cmd_solve, Outcome, CHECKS, FAULTS};
pub use config::ProblemConfig;

/// Default output directory when neither `--output` nor `output.dir` is set.
pub const OUTPUT_DIR_ENV: &str = "LINDESCENT_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITERATIONS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lindescent", version, about = "Descent along generalized linearizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the descent on the configured problem.
    Solve(RunArgs),
    /// Search for a fixed point of the configured self-map.
    FixedPoint(RunArgs),
    /// Tabulate d_X on sampled pairs and audit the metric axioms.
    Metric(RunArgs),
    /// Run the invariant suite.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Print check names and exit.
    #[arg(long)]
    list: bool,
    /// Run the suite with a known fault injected.
    #[arg(long, value_name = "FAULT")]
    inject: Option<String>,
    #[command(flatten)]
    overrides: Overrides,
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Stopping tolerance eps.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(&a.config, &a.overrides),
        Command::FixedPoint(a) => cmd_fixed_point(&a.config, &a.overrides),
        Command::Metric(a) => cmd_metric(&a.config, &a.overrides),
        Command::Check(a) => {
            if a.list {
                for name in CHECKS {
                    println!("{name}");
                }
                return EXIT_OK;
            }
            cmd_check(a.inject.as_deref(), &a.overrides)
        }
    };
    match outcome {
        Ok(o) => {
            print!("{}", o.report);
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
