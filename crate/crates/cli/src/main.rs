use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qheat_core::functionals::HeatBin;
use qheat_core::ingest::{write_snapshots, SnapshotFormat};
use qheat_core::report::{simulate_states, GridSpec, InputSpec};
use qheat_core::{compare_runs, run, FtQuantity, FtReport, JointProbability, Mode, RunConfig, ThermalParameters};

/// Exit code for runtime errors (bad input, I/O, numerical failure).
const EXIT_RUNTIME: u8 = 1;
/// Exit code for command-line usage errors.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "qheat", version, about = "Fluctuation theorems for heat exchange between two correlated qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the protocol on a time grid and evaluate every check.
    Simulate(RunArgs),
    /// Analyse reconstructed states from a snapshot file.
    Analyze(AnalyzeArgs),
    /// Like `simulate`, but print only the verdict.
    Check(RunArgs),
    /// Write simulated states as a snapshot file.
    Export(ExportArgs),
    /// Compare two `summary.json` reports on the same time grid.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Correlated,
    Uncorrelated,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Joint {
    Evolved,
    Initial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for SnapshotFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => SnapshotFormat::Json,
            Format::Csv => SnapshotFormat::Csv,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ThermalArgs {
    /// TOML run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter set.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Initial correlation as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Inverse temperature of qubit A, peV.
    #[arg(long)]
    beta_a_inv: Option<f64>,
    /// Inverse temperature of qubit B, peV.
    #[arg(long)]
    beta_b_inv: Option<f64>,
    /// Qubit frequency, Hz.
    #[arg(long)]
    nu0: Option<f64>,
    /// Exchange coupling J, Hz.
    #[arg(long)]
    coupling: Option<f64>,
    /// Probability source for the final joint term of J1 and C1.
    #[arg(long, value_enum)]
    joint: Option<Joint>,
    /// Heat snapping distance, peV.
    #[arg(long)]
    heat_snap: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Last interaction time, ms.
    #[arg(long, conflicts_with = "times")]
    t_max: Option<f64>,
    /// Number of uniform grid points.
    #[arg(long, conflicts_with = "times")]
    t_points: Option<usize>,
    /// Explicit comma-separated times, ms. Must start at 0.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    thermal: ThermalArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Directory for CSV and JSON exports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Snapshot file (.json or .csv).
    snapshots: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    thermal: ThermalArgs,
    /// Gaussian noise added to each real degree of freedom per resample.
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Number of Monte-Carlo resamples.
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    thermal: ThermalArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Output file.
    #[arg(long)]
    output: PathBuf,
    /// Defaults to the output file extension.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long)]
    json: bool,
}

type CliResult<T> = Result<T, String>;

fn parse_alpha(text: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let parse = |s: &str| s.parse::<f64>().map_err(|_| format!("bad alpha component `{s}`"));
    match parts.as_slice() {
        [re] => Ok((parse(re)?, 0.0)),
        [re, im] => Ok((parse(re)?, parse(im)?)),
        _ => Err(format!("alpha must be `re,im`, got `{text}`")),
    }
}

fn base_config(args: &ThermalArgs) -> CliResult<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(|e| e.to_string())?,
        None => RunConfig::default(),
    };
    if let Some(preset) = args.preset {
        cfg.thermal = match preset {
            Preset::Correlated => ThermalParameters::correlated(),
            Preset::Uncorrelated => ThermalParameters::uncorrelated(),
        };
    }
    let t = cfg.thermal;
    let alpha = match &args.alpha {
        Some(text) => {
            let (re, im) = parse_alpha(text)?;
            qheat_core::Complex64::new(re, im)
        }
        None => t.alpha(),
    };
    cfg.thermal = ThermalParameters::new(
        args.beta_a_inv.unwrap_or(t.beta_a_inv()),
        args.beta_b_inv.unwrap_or(t.beta_b_inv()),
        args.nu0.unwrap_or(t.nu0()),
        args.coupling.unwrap_or(t.coupling()),
        alpha,
    )
    .map_err(|e| e.to_string())?;
    if let Some(joint) = args.joint {
        cfg.analysis.joint_probability = match joint {
            Joint::Evolved => JointProbability::Evolved,
            Joint::Initial => JointProbability::Initial,
        };
    }
    if let Some(tol) = args.heat_snap {
        cfg.analysis.heat_snap_pev = tol;
    }
    Ok(cfg)
}

fn apply_grid(cfg: &mut RunConfig, grid: &GridArgs) {
    if let Some(times) = &grid.times {
        cfg.grid = GridSpec::Explicit { times_ms: times.clone() };
    } else if grid.t_max.is_some() || grid.t_points.is_some() {
        let (t_max_ms, t_points) = match cfg.grid {
            GridSpec::Uniform { t_max_ms, t_points } => (t_max_ms, t_points),
            GridSpec::Explicit { .. } => match GridSpec::default() {
                GridSpec::Uniform { t_max_ms, t_points } => (t_max_ms, t_points),
                GridSpec::Explicit { .. } => unreachable!("default grid is uniform"),
            },
        };
        cfg.grid = GridSpec::Uniform {
            t_max_ms: grid.t_max.unwrap_or(t_max_ms),
            t_points: grid.t_points.unwrap_or(t_points),
        };
    }
}

fn print_summary(report: &FtReport) {
    let m = &report.metadata;
    println!(
        "beta_A^-1 = {} peV, beta_B^-1 = {} peV, alpha = {}, J = {} Hz, nu0 = {} Hz",
        m.thermal.beta_a_inv(),
        m.thermal.beta_b_inv(),
        m.thermal.alpha(),
        m.thermal.coupling(),
        m.thermal.nu0()
    );
    println!(
        "{:>12} {:>12} {:>12} {:>12} {:>14} {:>14} {:>12} {:>12}",
        "t [ms]", "P_f(-hv)", "P_f(0)", "P_f(+hv)", "<e^-sigma>", "<e^-Q dbeta>", "psi(-hv)", "psi(+hv)"
    );
    let fmt_opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
    for tp in &report.time_points {
        let exp = |q| tp.integral.row(q).map_or(f64::NAN, |r| r.exp_average);
        println!(
            "{:>12.6} {:>12.6e} {:>12.6e} {:>12.6e} {:>14.10} {:>14.10} {:>12} {:>12}",
            tp.time_s * 1e3,
            tp.forward.mass(HeatBin::Negative),
            tp.forward.mass(HeatBin::Zero),
            tp.forward.mass(HeatBin::Positive),
            exp(FtQuantity::Sigma),
            exp(FtQuantity::HeatExchange),
            fmt_opt(tp.detailed_record(HeatBin::Negative).psi),
            fmt_opt(tp.detailed_record(HeatBin::Positive).psi),
        );
    }
    print_verdict(report);
}

fn print_verdict(report: &FtReport) {
    if report.passed {
        println!("PASS: all checks hold at {} time points", report.time_points.len());
    } else {
        for f in &report.failures {
            println!("FAIL [{}] t = {:.6e} s: {}", f.category, f.time_s, f.detail);
        }
        println!("exit code {}", report.exit_code);
    }
}

fn finish(report: &FtReport, json: bool, verdict_only: bool) -> ExitCode {
    if json {
        println!("{}", report.to_json());
    } else if verdict_only {
        print_verdict(report);
    } else {
        print_summary(report);
    }
    ExitCode::from(report.exit_code as u8)
}

fn simulate(args: RunArgs, verdict_only: bool) -> CliResult<ExitCode> {
    let mut cfg = base_config(&args.thermal)?;
    cfg.mode = Mode::Simulate;
    apply_grid(&mut cfg, &args.grid);
    if args.out.is_some() {
        cfg.output_dir = args.out;
    }
    let output = run(&cfg).map_err(|e| e.to_string())?;
    Ok(finish(&output.report, args.json, verdict_only))
}

fn analyze(args: AnalyzeArgs) -> CliResult<ExitCode> {
    let mut cfg = base_config(&args.thermal)?;
    cfg.mode = Mode::Analyze;
    cfg.input = Some(InputSpec {
        snapshots: args.snapshots,
        format: args.format.map(Into::into),
    });
    if let Some(s) = args.noise_sigma {
        cfg.uncertainty.noise_sigma = s;
    }
    if let Some(n) = args.resamples {
        cfg.uncertainty.n_resamples = n;
    }
    if let Some(seed) = args.seed {
        cfg.uncertainty.seed = seed;
    }
    if args.out.is_some() {
        cfg.output_dir = args.out;
    }
    let output = run(&cfg).map_err(|e| e.to_string())?;
    Ok(finish(&output.report, args.json, false))
}

fn export(args: ExportArgs) -> CliResult<ExitCode> {
    let mut cfg = base_config(&args.thermal)?;
    apply_grid(&mut cfg, &args.grid);
    let format = match args.format {
        Some(f) => f.into(),
        None => SnapshotFormat::from_path(&args.output)
            .ok_or_else(|| format!("cannot infer format of {}; pass --format", args.output.display()))?,
    };
    let grid = cfg.grid.to_grid().map_err(|e| e.to_string())?;
    let states = simulate_states(&cfg.thermal, grid.times()).map_err(|e| e.to_string())?;
    let snapshots: Vec<_> = states.into_iter().map(|(s, _)| s).collect();
    write_snapshots(&snapshots, &args.output, format).map_err(|e| e.to_string())?;
    println!("wrote {} snapshots to {}", snapshots.len(), args.output.display());
    Ok(ExitCode::SUCCESS)
}

fn load_report(path: &Path) -> CliResult<FtReport> {
    let path = if path.is_dir() { path.join("summary.json") } else { path.to_path_buf() };
    FtReport::load(&path).map_err(|e| e.to_string())
}

fn compare(args: CompareArgs) -> CliResult<ExitCode> {
    let a = load_report(&args.a)?;
    let b = load_report(&args.b)?;
    let diff = compare_runs(&a, &b).map_err(|e| e.to_string())?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&diff).map_err(|e| e.to_string())?);
    } else {
        println!("max |a - b| = {:.3e} over {} quantities", diff.max_abs_diff, diff.rows.len());
        for r in &diff.psi_departures {
            let show = |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.9}"));
            println!("t = {:.6e} s  {}  a = {}  b = {}", r.time_s, r.quantity, show(r.a), show(r.b));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args, false),
        Command::Check(args) => simulate(args, true),
        Command::Analyze(args) => analyze(args),
        Command::Export(args) => export(args),
        Command::Compare(args) => compare(args),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_RUNTIME)
    })
}
