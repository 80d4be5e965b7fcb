//! Command-line driver: configuration, dispatch and reports.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use commands::{IdentityKind, Outcome, SpectrumKind, VerifyTarget};
use config::{OutputFormat, PartialConfig, RunConfig};
use error::{CliError, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};

pub const THREADS_ENV: &str = "QHAAR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qhaar", version)]
#[command(about = "Check Haar functional identities on quantum SU(2) numerically")]
pub struct Cli {
    /// TOML file with run settings; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Add wall time to the JSON report (breaks byte-identical output)
    #[arg(long, global = true)]
    pub timings: bool,

    #[command(flatten)]
    pub flags: PartialConfig,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare trace and measure sides of the Haar functional
    Verify {
        #[arg(value_enum)]
        which: VerifyTarget,
    },
    /// Check the intermediate identities
    Identity {
        #[arg(value_enum)]
        which: IdentityKind,
    },
    /// Eigenvalues of truncated representation matrices
    Spectrum {
        #[arg(value_enum)]
        which: SpectrumKind,
    },
    /// Evaluate a basic hypergeometric series r phi s with real parameters
    EvalSeries {
        /// Upper parameters, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        upper: Vec<f64>,
        /// Lower parameters, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lower: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        /// Base of the series; defaults to q
        #[arg(long)]
        base: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> String {
        let v = |x: &dyn std::fmt::Debug| format!("{x:?}").to_lowercase();
        match self {
            Command::Verify { which } => format!("verify {}", v(which)),
            Command::Identity { which } => format!("identity {}", v(which)),
            Command::Spectrum { which } => match which {
                SpectrumKind::Cocentral => "spectrum cocentral".into(),
                SpectrumKind::RhoInf => "spectrum rho-inf".into(),
                SpectrumKind::RhoSigma => "spectrum rho-sigma".into(),
            },
            Command::EvalSeries { .. } => "eval-series".into(),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: u32,
    command: String,
    config: &'a RunConfig,
    pass: bool,
    body: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={raw} is not a thread count")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Verify { which } => commands::verify_cmd(*which, cfg),
        Command::Identity { which } => commands::identity_cmd(*which, cfg),
        Command::Spectrum { which } => commands::spectrum_cmd(*which, cfg),
        Command::EvalSeries {
            upper,
            lower,
            z,
            base,
        } => commands::eval_series_cmd(upper, lower, *z, *base, cfg),
    }
}

fn emit(
    cli: &Cli,
    cfg: &RunConfig,
    outcome: &Outcome,
    seconds: f64,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let werr = |e: std::io::Error| CliError::Write(e.to_string());
    match cfg.output {
        OutputFormat::Json => {
            let env = Envelope {
                schema: output::SCHEMA,
                command: cli.command.name(),
                config: cfg,
                pass: outcome.pass,
                body: &outcome.body,
                wall_time_s: cli.timings.then_some(seconds),
            };
            writeln!(out, "{}", output::to_json(&env)?).map_err(werr)
        }
        OutputFormat::Csv => outcome.table.write_csv(out),
        OutputFormat::Text => {
            writeln!(out, "{}", cli.command.name()).map_err(werr)?;
            writeln!(
                out,
                "q = {}, tau = {}, sigma = {}, N = {}, tol = {:e}",
                cfg.q, cfg.tau, cfg.sigma, cfg.trunc_n, cfg.tol
            )
            .map_err(werr)?;
            write!(out, "{}", outcome.table.render_text()).map_err(werr)?;
            for note in &outcome.notes {
                writeln!(out, "{note}").map_err(werr)?;
            }
            writeln!(
                out,
                "result: {}",
                if outcome.pass { "PASS" } else { "FAIL" }
            )
            .map_err(werr)?;
            writeln!(out, "wall time: {seconds:.3} s").map_err(werr)
        }
    }
}

/// Parses `args`, runs the command and writes the report to `out`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = configure_threads()
        .and_then(|_| config::resolve(&cli.flags, cli.config.as_deref()))
        .and_then(|cfg| {
            let start = Instant::now();
            let outcome = execute(&cli, &cfg)?;
            emit(&cli, &cfg, &outcome, start.elapsed().as_secs_f64(), out)?;
            Ok(outcome.pass)
        });
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
