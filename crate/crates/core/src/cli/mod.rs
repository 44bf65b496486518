//! Command-line front end. Every subcommand writes one JSON report that
//! embeds the tool version and the full configuration, defaults included.

mod commands;
mod puiseux;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use sardkit::critical::CriticalError;
use sardkit::expr::ExprError;
use sardkit::rabier::RabierError;
use sardkit::rcf::RcfError;
use sardkit::thin::ThinError;

#[derive(Debug, Parser)]
#[command(name = "sardkit", version, about = "Critical values, thinness and Puiseux arithmetic for polynomial maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rabier function of the Jacobian at a point
    Nu(commands::NuArgs),
    /// Parse a map file and print its components and Jacobian
    Parse(commands::ParseArgs),
    /// Sample the points where nu falls below z
    Critical(commands::CriticalArgs),
    /// Estimate ordinary critical values
    K0(commands::K0Args),
    /// Estimate asymptotic critical values at infinity
    Kinf(commands::KinfArgs),
    /// Estimate asymptotic critical values at the frontier of the domain
    K1(commands::K1Args),
    /// Thinness of critical value sets along a decreasing z schedule
    Sard(commands::SardArgs),
    /// Thinness score of a point cloud
    Thin(commands::ThinArgs),
    /// Box-counting dimension of a point cloud
    Dim(commands::DimArgs),
    /// Thinness sweep over a one-parameter family of clouds
    Family(commands::FamilyArgs),
    /// Evaluate a Puiseux series expression
    Puiseux(puiseux::PuiseuxArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Args, Serialize)]
pub(crate) struct Common {
    /// Root of every random stream
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Parse(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<RabierError> for CliError {
    fn from(e: RabierError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<RcfError> for CliError {
    fn from(e: RcfError) -> Self {
        match e {
            RcfError::BadRational(_) => CliError::Parse(e.to_string()),
            RcfError::NonPositiveParameter(_) => CliError::Usage(e.to_string()),
            RcfError::DivisionByZero | RcfError::Overflow { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ThinError> for CliError {
    fn from(e: ThinError) -> Self {
        match e {
            ThinError::Csv(_)
            | ThinError::CsvValue { .. }
            | ThinError::NonFinite { .. }
            | ThinError::DimensionMismatch { .. } => CliError::Parse(e.to_string()),
            ThinError::BadTargetDimension { .. }
            | ThinError::NonPositiveDelta(_)
            | ThinError::TooFew { .. }
            | ThinError::RepeatedParameter(_) => CliError::Usage(e.to_string()),
            ThinError::EmptyCloud => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<CriticalError> for CliError {
    fn from(e: CriticalError) -> Self {
        match e {
            CriticalError::Expr(e) => e.into(),
            CriticalError::Rabier(e) => e.into(),
            CriticalError::Thin(e) => e.into(),
            CriticalError::DimensionMismatch { .. } | CriticalError::BadBox(_) => CliError::Parse(e.to_string()),
            CriticalError::KExceedsN { .. }
            | CriticalError::NonPositiveThreshold(_)
            | CriticalError::BadSchedule(_)
            | CriticalError::BadBudget(_)
            | CriticalError::NoConstraints => CliError::Usage(e.to_string()),
            CriticalError::EmptyDomain => CliError::Numeric(e.to_string()),
        }
    }
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Nu(a) => commands::nu(a),
        Command::Parse(a) => commands::parse(a),
        Command::Critical(a) => commands::critical(a),
        Command::K0(a) => commands::k0(a),
        Command::Kinf(a) => commands::kinf(a),
        Command::K1(a) => commands::k1(a),
        Command::Sard(a) => commands::sard(a),
        Command::Thin(a) => commands::thin(a),
        Command::Dim(a) => commands::dim(a),
        Command::Family(a) => commands::family(a),
        Command::Puiseux(a) => puiseux::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// Wrap `result` with the version and configuration and write it.
pub(crate) fn emit<C: Serialize>(name: &str, config: &C, out: Option<&Path>, result: Value) -> Result<(), CliError> {
    let mut config = serde_json::to_value(config).map_err(|e| CliError::Numeric(e.to_string()))?;
    if let Value::Object(m) = &mut config {
        m.insert("subcommand".into(), Value::String(name.into()));
    }
    let report = json!({ "version": sardkit::VERSION, "config": config, "result": result });
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write to standard output: {e}"))),
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub(crate) fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Numeric(e.to_string()))
}
