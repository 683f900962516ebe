//! Implementations of the CLI subcommands. Grid points and validation
//! instances are processed in parallel; output ordering is by index, so
//! results are identical however many threads run (the pool size is capped
//! by the QFI_WORKBENCH_THREADS environment variable).

use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use qfi_workbench::generator::{generator, GeneratorRoute};
use qfi_workbench::metrology::{crb_experiment, optimal_setup, CrbConfig};
use qfi_workbench::qfi::{
    bound_eigenvalue_independent_ceiling, bound_hilbert_schmidt, bound_spectral, qfi_max,
    tensor_power_qfi,
};
use qfi_workbench::validation::{
    assemble_report, check_instance, validation_instances, ValidationReport, ValidationTolerances,
};
use qfi_workbench::WorkbenchError;

use crate::model_source::resolve_model;
use crate::output::{fmt_f64, write_csv, write_json};
use crate::CliError;

/// Inclusive time grid `lo:hi:points`.
#[derive(Debug, Clone, Copy)]
pub struct TimeRange {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl TimeRange {
    pub fn point(&self, i: usize) -> f64 {
        if self.points == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.hi < self.lo || self.points == 0 {
            return Err(CliError::Config(format!(
                "time range must be a nonempty lo:hi:points grid with hi >= lo, got {}:{}:{}",
                self.lo, self.hi, self.points
            )));
        }
        Ok(())
    }
}

impl FromStr for TimeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:points, got '{s}'"));
        }
        let lo = parts[0]
            .parse::<f64>()
            .map_err(|_| format!("invalid grid start '{}'", parts[0]))?;
        let hi = parts[1]
            .parse::<f64>()
            .map_err(|_| format!("invalid grid end '{}'", parts[1]))?;
        let points = parts[2]
            .parse::<usize>()
            .map_err(|_| format!("invalid point count '{}'", parts[2]))?;
        Ok(Self { lo, hi, points })
    }
}

/// Route selection; `auto` resolves to the spectral closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteChoice {
    FiniteDiff,
    Quadrature,
    Superoperator,
    Spectral,
    Auto,
}

impl RouteChoice {
    pub fn resolve(self) -> GeneratorRoute {
        match self {
            Self::FiniteDiff => GeneratorRoute::FiniteDiff,
            Self::Quadrature => GeneratorRoute::Quadrature,
            Self::Superoperator => GeneratorRoute::Superoperator,
            Self::Spectral | Self::Auto => GeneratorRoute::Spectral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn require_finite(name: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {value}")))
    }
}

/// Builds the rayon pool, capped by QFI_WORKBENCH_THREADS when set.
fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("QFI_WORKBENCH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
    {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot build thread pool: {e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub qfi_max: f64,
    pub bound_spectral: f64,
    pub bound_hilbert_schmidt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<f64>,
}

pub struct SweepArgs {
    pub model: String,
    pub g: f64,
    pub t_range: TimeRange,
    pub route: RouteChoice,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

/// QFI and bounds over a time grid.
pub fn run_sweep_time(args: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    require_finite("--g", args.g)?;
    args.t_range.validate()?;
    let model = resolve_model(&args.model)?;
    model.validate_at(args.g)?;
    let spec = &model.spec;
    let route = args.route.resolve();
    let ceiling = bound_eigenvalue_independent_ceiling(spec, args.g, None).ok();

    let pool = thread_pool()?;
    let rows: Vec<SweepRow> = pool.install(|| {
        (0..args.t_range.points)
            .into_par_iter()
            .map(|i| -> Result<SweepRow, CliError> {
                let t = args.t_range.point(i);
                let result = generator(spec, args.g, t, route)?;
                let (value, _) = qfi_max(&result.h)?;
                Ok(SweepRow {
                    t,
                    qfi_max: value,
                    bound_spectral: bound_spectral(spec, args.g, t, None)?,
                    bound_hilbert_schmidt: bound_hilbert_schmidt(&result.h),
                    ceiling,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    match args.format {
        OutputFormat::Json => write_json(args.out.as_ref(), &rows)?,
        OutputFormat::Csv => {
            let mut header = vec!["t", "qfi_max", "bound_spectral", "bound_hilbert_schmidt"];
            if ceiling.is_some() {
                header.push("ceiling");
            }
            let records: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut rec = vec![
                        fmt_f64(r.t),
                        fmt_f64(r.qfi_max),
                        fmt_f64(r.bound_spectral),
                        fmt_f64(r.bound_hilbert_schmidt),
                    ];
                    if let Some(c) = r.ceiling {
                        rec.push(fmt_f64(c));
                    }
                    rec
                })
                .collect();
            write_csv(args.out.as_ref(), &header, &records)?;
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub qfi_max: f64,
    /// qfi_max / N^2; equals the single-copy value under Heisenberg scaling.
    pub ratio_to_n2: f64,
}

pub struct ScalingArgs {
    pub model: String,
    pub g: f64,
    pub t: f64,
    pub copies: Vec<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Maximum QFI of N noninteracting copies for each requested N.
pub fn run_scaling(args: &ScalingArgs) -> Result<Vec<ScalingRow>, CliError> {
    if args.copies.is_empty() {
        return Err(CliError::Config(
            "provide at least one copy count via --N".into(),
        ));
    }
    if args.copies.contains(&0) {
        return Err(CliError::Config("copy counts must be at least 1".into()));
    }
    require_finite("--g", args.g)?;
    require_finite("--t", args.t)?;
    let model = resolve_model(&args.model)?;
    model.validate_at(args.g)?;
    let spec = &model.spec;

    let rows: Vec<ScalingRow> = args
        .copies
        .iter()
        .map(|&n| -> Result<ScalingRow, CliError> {
            let value = tensor_power_qfi(spec, args.g, args.t, n)?;
            Ok(ScalingRow {
                n,
                qfi_max: value,
                ratio_to_n2: value / (n * n) as f64,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    match args.format {
        OutputFormat::Json => write_json(args.out.as_ref(), &rows)?,
        OutputFormat::Csv => {
            let records: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.n.to_string(), fmt_f64(r.qfi_max), fmt_f64(r.ratio_to_n2)])
                .collect();
            write_csv(
                args.out.as_ref(),
                &["N", "qfi_max", "ratio_to_N2"],
                &records,
            )?;
        }
    }
    Ok(rows)
}

pub struct ValidateArgs {
    pub seed: u64,
    pub count: usize,
    pub out: Option<PathBuf>,
}

/// Runs the seeded validation suite and writes the JSON report; the caller
/// maps `passed = false` to a nonzero exit.
pub fn run_validate(args: &ValidateArgs) -> Result<ValidationReport, CliError> {
    if args.count == 0 {
        return Err(CliError::Config("count must be at least 1".into()));
    }
    let tolerances = ValidationTolerances::default();
    let instances = validation_instances(args.seed, args.count);
    let pool = thread_pool()?;
    let reports = pool.install(|| {
        instances
            .par_iter()
            .map(|inst| check_instance(inst, &tolerances))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let report = assemble_report(args.seed, args.count, tolerances, reports);
    write_json(args.out.as_ref(), &report)?;
    Ok(report)
}

pub struct SimulateArgs {
    pub model: String,
    pub g: f64,
    pub t: f64,
    pub nu: usize,
    pub reps: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct StructuredError<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

/// Cramer-Rao experiment with the optimal probe and the SLD-eigenbasis
/// measurement. Identifiability failures are emitted as structured JSON.
pub fn run_simulate(
    args: &SimulateArgs,
) -> Result<qfi_workbench::metrology::EstimationReport, CliError> {
    require_finite("--g", args.g)?;
    require_finite("--t", args.t)?;
    let model = resolve_model(&args.model)?;
    model.validate_at(args.g)?;
    let spec = &model.spec;
    let (probe, meas) = optimal_setup(spec, args.g, args.t)?;
    let config = CrbConfig::new(args.g, args.t, args.nu, args.reps, args.seed);
    match crb_experiment(spec, &probe, &meas, &config) {
        Ok(report) => {
            write_json(args.out.as_ref(), &report)?;
            Ok(report)
        }
        Err(e @ WorkbenchError::Identifiability { .. }) => {
            let body = StructuredError {
                error: ErrorBody {
                    kind: e.kind(),
                    message: e.to_string(),
                },
            };
            write_json(args.out.as_ref(), &body)?;
            Err(CliError::Runtime(e.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}
