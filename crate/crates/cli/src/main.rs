//! Command-line entry point. Exit codes: 0 success, 1 validation/check or
//! runtime failure, 2 usage/configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qfi_workbench_cli::commands::{
    run_scaling, run_simulate, run_sweep_time, run_validate, OutputFormat, RouteChoice,
    ScalingArgs, SimulateArgs, SweepArgs, TimeRange, ValidateArgs,
};
use qfi_workbench_cli::CliError;

#[derive(Parser)]
#[command(
    name = "qfi-workbench",
    version,
    about = "Translation generators, quantum Fisher information, and estimation experiments \
             for parametrized Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Fd,
    Quad,
    #[value(name = "super")]
    Superoperator,
    Spectral,
    Auto,
}

impl From<RouteArg> for RouteChoice {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Fd => RouteChoice::FiniteDiff,
            RouteArg::Quad => RouteChoice::Quadrature,
            RouteArg::Superoperator => RouteChoice::Superoperator,
            RouteArg::Spectral => RouteChoice::Spectral,
            RouteArg::Auto => RouteChoice::Auto,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Maximum QFI and its bounds over a time grid.
    SweepTime {
        /// Builtin model (e.g. spin-direction:B=1) or path to a model file.
        #[arg(long)]
        model: String,
        /// Parameter value at which to expand.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        g: f64,
        /// Time grid lo:hi:points.
        #[arg(long = "t-range")]
        t_range: TimeRange,
        /// Generator route.
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Maximum QFI of N noninteracting copies for each N in a list.
    Scaling {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// Copy counts, e.g. --N 1,2,3.
        #[arg(long = "N", value_delimiter = ',')]
        copies: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Seeded cross-route validation suite; exits 1 if any check fails.
    Validate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of random models (three builtin spin models are appended).
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo Cramer-Rao experiment with the optimal probe and the
    /// SLD-eigenbasis measurement.
    Simulate {
        #[arg(long)]
        model: String,
        /// True parameter value.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// Samples per replication.
        #[arg(long, default_value_t = 10_000)]
        nu: usize,
        /// Number of replications.
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::SweepTime {
            model,
            g,
            t_range,
            route,
            out,
            format,
        } => {
            run_sweep_time(&SweepArgs {
                model,
                g,
                t_range,
                route: route.into(),
                out,
                format: format.into(),
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Scaling {
            model,
            g,
            t,
            copies,
            out,
            format,
        } => {
            run_scaling(&ScalingArgs {
                model,
                g,
                t,
                copies,
                out,
                format: format.into(),
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { seed, count, out } => {
            let report = run_validate(&ValidateArgs { seed, count, out })?;
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("validation failed: see the JSON report for per-instance results");
                Ok(ExitCode::from(1))
            }
        }
        Command::Simulate {
            model,
            g,
            t,
            nu,
            reps,
            seed,
            out,
        } => {
            run_simulate(&SimulateArgs {
                model,
                g,
                t,
                nu,
                reps,
                seed,
                out,
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
