//! Command-line front end.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{profile_from_env, RunConfig};
use output::Report;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Compute(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "friedrichs", version, about = "Bound states of rank-one perturbed Friedrichs models on the 3-torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file (`key = value` lines, `[section]` headers allowed).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Override a config key, e.g. `--set quad.n_grid=64`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Band edges m(p), M(p) along a path.
    Edges,
    /// Critical coupling and threshold classification.
    Mu0,
    /// Sweep of the determinant in z, w or p.
    DetScan,
    /// Bound state along a path.
    Band,
    /// Expansion slopes, Hessian and lower-bound checks.
    Asymptotics,
    /// Discrete-grid cross-check of the eigenvalue.
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Edges => "edges",
            Command::Mu0 => "mu0",
            Command::DetScan => "det-scan",
            Command::Band => "band",
            Command::Asymptotics => "asymptotics",
            Command::Oracle => "oracle",
        }
    }
}

/// Assemble the resolved configuration from file, overrides and environment.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| CliError::Config(e.0))?
        }
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim()).map_err(|e| CliError::Config(e.0))?;
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse().map_err(|e: config::ConfigError| CliError::Config(e.0))?;
    }
    let profile = profile_from_env().map_err(|e| CliError::Config(e.0))?;
    cfg.finish(profile).map_err(|e| CliError::Config(e.0))
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Edges => commands::edges(cfg),
        Command::Mu0 => commands::mu0(cfg),
        Command::DetScan => commands::det_scan(cfg),
        Command::Band => commands::band(cfg),
        Command::Asymptotics => commands::asymptotics(cfg),
        Command::Oracle => commands::oracle(cfg),
    }
}

fn run_parsed(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load_config(cli)?;
    let report = execute(cli.command, &cfg)?;
    let text = report.render(cfg.format);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} (value {}, reference {}, tolerance {})", c.name, c.value, c.reference, c.tolerance);
    }
    Ok(report.all_pass())
}

/// Run the CLI and return the process exit code: 0 ok, 2 failed checks,
/// 1 configuration, I/O or computation errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("warning: could not configure thread pool: {e}");
    }
    match run_parsed(&cli) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
