//! `nlsol`: build, evolve, scatter and stress-test NLS multi-solitons from the shell.

mod commands;

use clap::{Parser, Subcommand};
use std::io::Write;
use std::process::ExitCode;

use commands::{Failure, GridArgs, ParamArgs, RegionArgs};

#[derive(Parser)]
#[command(name = "nlsol", version, about = "Multi-soliton toolkit for the focusing cubic NLS equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form n-soliton field (.nlsf), or an (x, t, |q|²) surface when --out ends in .csv
    Soliton {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Evaluation time; repeat for surface output
        #[arg(long = "t", default_value = "0", allow_negative_numbers = true)]
        t: Vec<f64>,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Dress the vacuum, or a small background given by --in, with the given solitons
    Dress {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long = "t", default_value = "0", allow_negative_numbers = true, conflicts_with = "input")]
        t: f64,
        #[arg(long = "in", id = "input")]
        input: Option<std::path::PathBuf>,
        #[arg(long)]
        out: std::path::PathBuf,
        /// Also write x,log_det rows
        #[arg(long)]
        log_det: Option<std::path::PathBuf>,
    },
    /// Split-step evolution of a field file
    Evolve {
        #[arg(long = "in")]
        input: std::path::PathBuf,
        /// EvolveConfig JSON; replaces the stepping flags
        #[arg(long, conflicts_with_all = ["t_end", "dt", "scheme", "sample", "no_dealias"])]
        config: Option<std::path::PathBuf>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value = "0.001")]
        dt: f64,
        #[arg(long, value_enum, default_value = "suzuki4")]
        scheme: commands::SchemeArg,
        /// Snapshot time; repeatable
        #[arg(long)]
        sample: Vec<f64>,
        #[arg(long)]
        no_dealias: bool,
        /// Final field
        #[arg(long)]
        out: std::path::PathBuf,
        /// Surface CSV over all snapshots
        #[arg(long)]
        surface: Option<std::path::PathBuf>,
    },
    /// Eigenvalues, norming constants and soliton parameters of a field file
    Scatter {
        #[arg(long = "in")]
        input: std::path::PathBuf,
        #[command(flatten)]
        region: RegionArgs,
        /// Number of a(ξ) samples on the real axis
        #[arg(long, default_value = "0")]
        real_samples: usize,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Remove every soliton found in the region and write the remainder
    Undress {
        #[arg(long = "in")]
        input: std::path::PathBuf,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// One stability experiment from an ExperimentConfig JSON
    Stability {
        #[arg(long)]
        config: std::path::PathBuf,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Distance series as CSV
        #[arg(long)]
        csv: Option<std::path::PathBuf>,
    },
    /// The same experiment over several perturbation sizes, with the fitted constant
    Sweep {
        #[arg(long)]
        config: std::path::PathBuf,
        #[arg(long = "eps", required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Directory for per-ε series CSVs
        #[arg(long)]
        csv_dir: Option<std::path::PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    commands::init_threads()?;
    match cli.command {
        Command::Soliton { params, grid, t, out } => commands::soliton(&params, &grid, &t, &out),
        Command::Dress { params, grid, t, input, out, log_det } => {
            commands::dress(&params, &grid, t, input.as_deref(), &out, log_det.as_deref())
        }
        Command::Evolve { input, config, t_end, dt, scheme, sample, no_dealias, out, surface } => commands::evolve(
            &input,
            config.as_deref(),
            commands::StepFlags { t_end, dt, scheme, sample, dealias: !no_dealias },
            &out,
            surface.as_deref(),
        ),
        Command::Scatter { input, region, real_samples, out } => {
            commands::scatter(&input, &region, real_samples, out.as_deref())
        }
        Command::Undress { input, region, out } => commands::undress(&input, &region, &out),
        Command::Stability { config, out, csv } => commands::stability(&config, out.as_deref(), csv.as_deref()),
        Command::Sweep { config, eps, out, csv_dir } => commands::sweep(&config, &eps, out.as_deref(), csv_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let _ = writeln!(std::io::stderr(), "\n{}", commands::schema());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
