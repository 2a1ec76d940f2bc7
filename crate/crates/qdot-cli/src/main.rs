//! `qdot`: transport through detector-monitored quantum dots.
//!
//! Four subcommands: `run` integrates the equations of motion, `steady`
//! solves the stationary state directly, `sweep` tabulates steady
//! observables along one parameter axis, and `validate` cross-checks the
//! construction routes against each other and against the closed forms.
//!
//! Exit codes: 0 success, 1 bad usage or configuration, 2 solver failure.

mod checks;
mod commands;
mod output;

use std::path::PathBuf;
use std::process;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qdot::config::{OutputFormat, Scenario};
use qdot::scenarios::{AssemblyMode, FermiRegime};

/// How a command ended badly; decides the exit code and the stderr line.
pub enum Failure {
    /// Unusable input: flags, file contents, or their combination.
    Config(String),
    /// The engine could not produce the requested solution.
    Solver(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Solver(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qdot",
    version,
    about = "Transport through quantum dots monitored by a point-contact charge detector"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equations of motion and print the trajectory table
    Run(SpecArgs),
    /// Solve the stationary state directly and report observables as JSON
    ///
    /// The report always includes the residual against an independent
    /// long-time integration of the same generator.
    Steady(SpecArgs),
    /// Tabulate steady observables along one parameter axis, as CSV
    Sweep(SweepArgs),
    /// Cross-check construction routes, closed forms, and solver invariants
    Validate,
}

/// Flags mirroring the run-description fields. Defaults come first, then the
/// configuration file, then these flags; later layers win.
#[derive(Args)]
pub struct SpecArgs {
    /// JSON run description; flags override its fields
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Device preset (custom models must come from --config)
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,

    /// Fermi-level regime of the detector in the double-dot preset
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,

    /// Generator construction route
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Detector width with the device empty
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    /// Detector width with the near dot occupied
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0p: Option<f64>,
    /// Detector width with the far dot occupied
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0pp: Option<f64>,
    /// Fill rate of the measured dot (detector empty)
    #[arg(long = "gammaL", allow_negative_numbers = true)]
    pub gamma_l: Option<f64>,
    /// Fill rate of the measured dot (detector occupied)
    #[arg(long = "gammaLp", allow_negative_numbers = true)]
    pub gamma_lp: Option<f64>,
    /// Drain rate of the measured dot (detector empty)
    #[arg(long = "gammaR", allow_negative_numbers = true)]
    pub gamma_r: Option<f64>,
    /// Drain rate of the measured dot (detector occupied)
    #[arg(long = "gammaRp", allow_negative_numbers = true)]
    pub gamma_rp: Option<f64>,
    /// Coherent hop amplitude between the dots (detector empty)
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Coherent hop amplitude between the dots (detector occupied)
    #[arg(long, allow_negative_numbers = true)]
    pub omegap: Option<f64>,
    /// Detuning of the far level
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Extra shift of the far level while the detector is occupied
    #[arg(long = "deltaU", allow_negative_numbers = true)]
    pub delta_u: Option<f64>,

    /// Relative integration tolerance
    #[arg(long, allow_negative_numbers = true)]
    pub rel_tol: Option<f64>,
    /// Absolute integration tolerance
    #[arg(long, allow_negative_numbers = true)]
    pub abs_tol: Option<f64>,
    /// Integration horizon (0 prints the initial state only)
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Number of output grid points
    #[arg(long)]
    pub grid_points: Option<usize>,

    /// Table format for `run` (`steady` always reports JSON)
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Write the report here instead of standard output
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub spec: SpecArgs,

    /// Parameter axis to sweep (gamma0p moves both detector-occupied widths)
    #[arg(long, value_enum)]
    pub axis: AxisArg,

    /// Comma-separated grid: regime names for the regime axis, numbers
    /// otherwise; the regime axis defaults to blocked,partial,open
    #[arg(long, allow_hyphen_values = true, value_name = "V1,V2,...")]
    pub grid: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    #[value(name = "single_dot")]
    SingleDot,
    #[value(name = "double_dot")]
    DoubleDot,
    #[value(name = "custom")]
    Custom,
}

impl From<ScenarioArg> for Scenario {
    fn from(v: ScenarioArg) -> Self {
        match v {
            ScenarioArg::SingleDot => Scenario::SingleDot,
            ScenarioArg::DoubleDot => Scenario::DoubleDot,
            ScenarioArg::Custom => Scenario::Custom,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Blocked,
    Partial,
    Open,
}

impl From<RegimeArg> for FermiRegime {
    fn from(v: RegimeArg) -> Self {
        match v {
            RegimeArg::Blocked => FermiRegime::Blocked,
            RegimeArg::Partial => FermiRegime::Partial,
            RegimeArg::Open => FermiRegime::Open,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Generic,
    Literal,
}

impl From<ModeArg> for AssemblyMode {
    fn from(v: ModeArg) -> Self {
        match v {
            ModeArg::Generic => AssemblyMode::Generic,
            ModeArg::Literal => AssemblyMode::Literal,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(v: FormatArg) -> Self {
        match v {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Regime,
    Gamma0p,
    Epsilon,
    #[value(name = "deltaU")]
    DeltaU,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successes; everything else is bad usage,
            // which this binary reports as 1 across the board.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            process::exit(code);
        }
    };

    let result = match &cli.command {
        Command::Run(args) => commands::run(args),
        Command::Steady(args) => commands::steady(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Validate => checks::validate(),
    };

    if let Err(failure) = result {
        eprintln!("error: {}", failure.message());
        process::exit(failure.code());
    }
}
