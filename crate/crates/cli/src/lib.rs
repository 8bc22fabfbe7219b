//! Config-driven front end for `marginal-core`.
//!
//! ```text
//! marginal verify  --config run.toml [--out DIR] [--resolution 64,128] [--quiet]
//! marginal certify --config run.toml ...
//! marginal limit   --config run.toml ...
//! marginal ibp     --config run.toml ...
//! ```
//!
//! Exit codes: 0 when every check passes, 2 when a check fails (including
//! resolutions too coarse to check), 1 on any execution or config error.

pub mod config;
pub mod report;
pub mod run;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use marginal_core::Error as CoreError;
use serde::Serialize;

pub use config::{parse_config, ConfigError, Mode, RawConfig, RunConfig, Tolerances};
pub use report::{emit_report, render_summary, render_table, ReportFiles};
pub use run::{execute, Outcome, Rows};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Output directory when neither `--out` nor `output` is given.
pub const DEFAULT_OUTPUT: &str = "marginal-out";

#[derive(Debug, Parser)]
#[command(
    name = "marginal",
    version,
    about = "Numerical checks of the second-derivative identity for marginal functionals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare finite-difference, direct and decomposed second derivatives.
    Verify(RunArgs),
    /// Term-by-term sign certificate (mode certify_i or certify_ii).
    Certify(RunArgs),
    /// Large-beta limit sweep.
    Limit(RunArgs),
    /// Integration-by-parts identities behind the decomposition.
    Ibp(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Report directory; overrides `output` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated grid counts overriding `resolution`.
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
    /// Print nothing on success.
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Verify(a) | Command::Certify(a) | Command::Limit(a) | Command::Ibp(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Certify(_) => "certify",
            Command::Limit(_) => "limit",
            Command::Ibp(_) => "ibp",
        }
    }

    fn accepts(&self, mode: Mode) -> bool {
        matches!(
            (self, mode),
            (Command::Verify(_), Mode::Verify)
                | (Command::Certify(_), Mode::CertifyConvex | Mode::CertifyConcave)
                | (Command::Limit(_), Mode::BetaLimit)
                | (Command::Ibp(_), Mode::IbpCheck)
        )
    }
}

/// Loads, overrides and validates the config named by `args`.
pub fn load_config(command: &Command) -> Result<RunConfig, String> {
    let args = command.args();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read config {}: {e}", args.config.display()))?;
    let mut config = parse_config(&text).map_err(|e| format!("{}: {e}", args.config.display()))?;
    if let Some(counts) = &args.resolution {
        config = config
            .with_resolution(counts)
            .map_err(|e| format!("--resolution: {e}"))?;
    }
    if !command.accepts(config.mode) {
        return Err(format!(
            "subcommand `{}` cannot run a config with mode `{}`",
            command.name(),
            config.mode.as_str()
        ));
    }
    Ok(config)
}

fn is_under_resolved(e: &CoreError) -> bool {
    matches!(e.root(), CoreError::UnderResolved { .. })
}

#[derive(Serialize)]
struct UnresolvedSummary<'a> {
    status: &'static str,
    mode: &'static str,
    n: usize,
    resolution: Vec<usize>,
    config: &'a RawConfig,
    failures: Vec<String>,
}

/// A run that could not be checked still gets a summary naming why.
fn emit_unresolved(config: &RunConfig, error: &CoreError, dir: &Path) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let summary = UnresolvedSummary {
        status: "fail",
        mode: config.mode.as_str(),
        n: config.n,
        resolution: config.resolution.counts(),
        config: &config.raw,
        failures: vec![error.to_string()],
    };
    let path = dir.join(report::SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(&summary).expect("summary is plain data");
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run_command(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let config = match load_config(&cli.command) {
        Ok(c) => c,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_ERROR;
        }
    };
    let args = cli.command.args();
    let dir = args
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));

    let outcome = match execute(&config) {
        Ok(o) => o,
        Err(e) if is_under_resolved(&e) => {
            let _ = writeln!(stderr, "check failed: {e}");
            if let Err(io) = emit_unresolved(&config, &e, &dir) {
                let _ = writeln!(stderr, "error: cannot write report to {}: {io}", dir.display());
                return EXIT_ERROR;
            }
            return EXIT_FAIL;
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };

    let files = match emit_report(&outcome, &dir) {
        Ok(f) => f,
        Err(io) => {
            let _ = writeln!(stderr, "error: cannot write report to {}: {io}", dir.display());
            return EXIT_ERROR;
        }
    };
    let pass = outcome.pass();
    for line in outcome.failures() {
        let _ = writeln!(stderr, "check failed: {line}");
    }
    if !args.quiet {
        let _ = writeln!(
            stdout,
            "{}: {} ({} t value(s)); report in {}",
            config.mode.as_str(),
            run::flag(pass).to_uppercase(),
            config.t_values.len(),
            files.summary.parent().unwrap_or(&dir).display()
        );
    }
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Parses `argv` and runs it. Usage errors exit 1, `--help` and `--version` exit 0.
pub fn run_from_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run_command(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            code
        }
    }
}
