//! `soi-lab`: spin-orbit waveguide scenarios from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use soi_core::error::SoiError;
use soi_core::types::{validate_spec, WaveguideSpec};

use crate::config::{resolve, FileConfig, Overrides, Scenario};
use crate::output::{sidecar_path, write_atomic, Metadata, Output};

pub const THREADS_ENV: &str = "SOI_LAB_THREADS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(SoiError),
}

impl From<SoiError> for CliError {
    fn from(e: SoiError) -> Self {
        match e {
            SoiError::InvalidSpec(_)
            | SoiError::InvalidQuantumNumbers(_)
            | SoiError::MuUndefined
            | SoiError::NoGuidedMode { .. }
            | SoiError::WrongProfile { .. }
            | SoiError::BasisMismatch { .. }
            | SoiError::InvalidGeometry(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "soi-lab", version, about = "Spin-orbit interaction in cylindrical waveguides")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML scenario file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted); a `<out>.meta.json` sidecar is written next to it
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// electron or photon
    #[arg(long, global = true)]
    particle: Option<String>,
    /// V-number k_core a sqrt(delta)
    #[arg(long = "V", global = true)]
    v: Option<f64>,
    /// Comma-separated V sweep (soi, geo)
    #[arg(long = "V-values", global = true, value_delimiter = ',')]
    v_values: Option<Vec<f64>>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// INT, inclusive range A..B, or list A,B,...
    #[arg(long, global = true, allow_hyphen_values = true)]
    m: Option<String>,
    /// +1 or -1 (soi: both when omitted)
    #[arg(long, global = true, allow_negative_numbers = true)]
    sigma: Option<i32>,
    /// Radial index
    #[arg(long, global = true)]
    p: Option<u32>,
    /// step, smooth:W (W in units of a) or tabulated (config file only)
    #[arg(long, global = true)]
    profile: Option<String>,
    /// End of the propagation sweep; one beat period by default
    #[arg(long = "z-max", global = true)]
    z_max: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// a (both spins, one OAM) or b (one spin, both OAM signs)
    #[arg(long, global = true)]
    superposition: Option<String>,
    /// spatial or temporal
    #[arg(long, global = true)]
    variant: Option<String>,
    /// mode-matched or sqrt-delta
    #[arg(long, global = true)]
    theta: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Guided-mode table
    Modes,
    /// First-order SOI splitting sweep
    Soi,
    /// Spin and pattern rotation along z (or t)
    Evolve,
    /// Geometric-phase comparison table
    Geo,
    /// Two-photon entanglement-transfer protocol
    Bell,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Soi => "soi",
            Command::Evolve => "evolve",
            Command::Geo => "geo",
            Command::Bell => "bell",
        }
    }
}

fn configure_threads() -> Result<usize, CliError> {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {text:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(rayon::current_num_threads())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let threads = configure_threads()?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        particle: cli.particle,
        v: cli.v,
        v_values: cli.v_values,
        delta: cli.delta,
        profile: cli.profile,
        m: cli.m,
        sigma: cli.sigma,
        p: cli.p,
        z_max: cli.z_max,
        steps: cli.steps,
        format: cli.format,
        out: cli.out,
        superposition: cli.superposition,
        variant: cli.variant,
        theta: cli.theta,
    };
    let scenario: Scenario = resolve(file, flags)?;
    let probe = WaveguideSpec::with_v_number(scenario.particle, scenario.v, scenario.delta, scenario.profile.clone());
    for w in validate_spec(&probe).warnings {
        eprintln!("warning: {w}");
    }

    let output: Output = match cli.command {
        Command::Modes => commands::modes(&scenario)?,
        Command::Soi => commands::soi(&scenario)?,
        Command::Evolve => commands::evolve(&scenario)?,
        Command::Geo => commands::geo(&scenario)?,
        Command::Bell => commands::bell(&scenario)?,
    };
    for note in &output.notes {
        eprintln!("note: {note}");
    }
    let text = output.render(scenario.format)?;
    match &scenario.out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            let meta = Metadata {
                tool: "soi-lab",
                version: env!("CARGO_PKG_VERSION"),
                command: cli.command.name(),
                scenario: &scenario,
                threads,
                started_unix_s,
                elapsed_ms: started.elapsed().as_millis(),
                notes: &output.notes,
            };
            let json = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Config(e.to_string()))?;
            write_atomic(&sidecar_path(path), json.as_bytes())?;
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("soi-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
