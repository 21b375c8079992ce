//! Command-line driver: argument parsing, validation and the exit-code
//! convention (0 success, 1 a numerical self-check failed, 2 usage error).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub mod commands;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Transform,
    Spectrum,
    Truncate,
    EmbedDemo,
    Solve,
    Bench,
    Verify,
}

impl Command {
    /// Commands whose output depends on a pseudo-random draw.
    fn is_randomized(self, has_input: bool) -> bool {
        match self {
            Command::Transform | Command::Solve => !has_input,
            Command::Truncate | Command::EmbedDemo | Command::Bench | Command::Verify => true,
            Command::Spectrum => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Norm {
    Sup,
    Euclidean,
}

/// Spectral operators on the flat torus.
#[derive(Debug, Parser)]
#[command(name = "torus", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Ambient dimension n (1, 2 or 3).
    #[arg(long, default_value_t = 2)]
    pub dimension: usize,
    /// Grid points per axis M (odd, at least 3).
    #[arg(long = "points", default_value_t = 9)]
    pub points_per_axis: usize,
    /// Truncation radius N.
    #[arg(long)]
    pub truncation: Option<u64>,
    /// Largest eigenvalue level K reported by `spectrum`.
    #[arg(long = "level-cap")]
    pub level_cap: Option<u64>,
    /// Sobolev exponent s reported by `transform`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub sobolev: f64,
    /// Target L² diameter for `embed-demo`.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Seed for every randomized command; never defaulted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format; `transform` and `solve` default to json, the rest to csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Field document to read for `transform` and `solve`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Timing repetitions for `bench`.
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Truncation geometry for `truncate`.
    #[arg(long, value_enum, default_value_t = Norm::Sup)]
    pub norm: Norm,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dimension: usize,
    pub points_per_axis: usize,
    pub truncation: Option<u64>,
    pub level_cap: Option<u64>,
    pub sobolev: f64,
    pub epsilon: f64,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub input: Option<PathBuf>,
    pub repetitions: usize,
    pub norm: Norm,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Check(_) => EXIT_CHECK_FAILED,
        }
    }
}

/// Library errors caused by the configuration are usage errors; anything
/// else means a computation went wrong.
impl From<torus_spectral::Error> for CliError {
    fn from(e: torus_spectral::Error) -> Self {
        use torus_spectral::Error as E;
        match e {
            E::ZeroDimension
            | E::InvalidPoints(_)
            | E::LengthMismatch { .. }
            | E::NonFinite { .. }
            | E::GridMismatch
            | E::OutsideBox { .. }
            | E::BoxTooSmall { .. }
            | E::InsufficientResolution { .. }
            | E::InvalidArgument(_)
            | E::Json(_) => CliError::Usage(e.to_string()),
            other => CliError::Check(other.to_string()),
        }
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        if !(1..=3).contains(&cli.dimension) {
            return Err(CliError::Usage(format!(
                "--dimension must be 1, 2 or 3, got {}",
                cli.dimension
            )));
        }
        if cli.points_per_axis < 3 || cli.points_per_axis.is_multiple_of(2) {
            return Err(CliError::Usage(format!(
                "--points must be odd and at least 3, got {}",
                cli.points_per_axis
            )));
        }
        if cli.command.is_randomized(cli.input.is_some()) && cli.seed.is_none() {
            return Err(CliError::Usage(format!(
                "--seed is required for `{}`",
                command_name(cli.command)
            )));
        }
        if !cli.sobolev.is_finite() {
            return Err(CliError::Usage("--sobolev must be finite".into()));
        }
        if !(cli.epsilon.is_finite() && cli.epsilon > 0.0) {
            return Err(CliError::Usage(format!(
                "--epsilon must be positive, got {}",
                cli.epsilon
            )));
        }
        if cli.repetitions == 0 {
            return Err(CliError::Usage("--repetitions must be at least 1".into()));
        }
        Ok(Self {
            command: cli.command,
            dimension: cli.dimension,
            points_per_axis: cli.points_per_axis,
            truncation: cli.truncation,
            level_cap: cli.level_cap,
            sobolev: cli.sobolev,
            epsilon: cli.epsilon,
            seed: cli.seed,
            output_path: cli.output,
            format: cli.format,
            input: cli.input,
            repetitions: cli.repetitions,
            norm: cli.norm,
        })
    }

    pub(crate) fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Usage("--seed is required".into()))
    }

    pub(crate) fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub(crate) fn grid(&self) -> Result<torus_spectral::TorusGrid, CliError> {
        Ok(torus_spectral::TorusGrid::new(
            self.dimension,
            self.points_per_axis,
        )?)
    }
}

pub fn command_name(command: Command) -> &'static str {
    match command {
        Command::Transform => "transform",
        Command::Spectrum => "spectrum",
        Command::Truncate => "truncate",
        Command::EmbedDemo => "embed-demo",
        Command::Solve => "solve",
        Command::Bench => "bench",
        Command::Verify => "verify",
    }
}

/// Writes `contents` to the configured output, or stdout.
pub(crate) fn emit(cfg: &RunConfig, contents: &str) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(path) => fs::write(path, contents)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Command::Transform => commands::cmd_transform(cfg),
        Command::Spectrum => commands::cmd_spectrum(cfg),
        Command::Truncate => commands::cmd_truncate(cfg),
        Command::EmbedDemo => commands::cmd_embed_demo(cfg),
        Command::Solve => commands::cmd_solve(cfg),
        Command::Bench => commands::cmd_bench(cfg),
        Command::Verify => commands::cmd_verify(cfg),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|cfg| execute(&cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
