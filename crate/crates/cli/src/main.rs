//! `fracspec` — config-driven checks of directional fractional operators.
//!
//! Exit codes: 0 all checks pass, 1 a check or numerical routine failed,
//! 2 the configuration is invalid.

mod commands;
mod config;
mod expr;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::{Check, Failure};
use config::Setup;

#[derive(Parser)]
#[command(name = "fracspec", version, about = "Checks for directional fractional operators and their spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's `output`, else `.`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only errors on stderr, no summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Operator identities → identities.json
    Identities,
    /// Accretivity constants and empirical minimum → accretivity.json
    Accretivity,
    /// Numerical range and fitted sector → range.csv, sector.json
    Range,
    /// Eigenvalue bounds → eigenvalues.csv, sandwich.json
    Sandwich,
    /// All of the above
    Report,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_sha256: &'a str,
    seed: u64,
    checks_covered: Vec<&'static str>,
    pass: bool,
    checks: &'a [Check],
    result: &'a T,
}

/// Serialized artifacts of one analysis, written after all analyses finish.
struct Artifacts {
    name: &'static str,
    files: Vec<(&'static str, String)>,
    checks: Vec<Check>,
}

fn envelope<T: Serialize>(s: &Setup, command: &'static str, checks: &[Check], result: &T) -> String {
    let env = Envelope {
        tool: "fracspec",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_sha256: &s.hash,
        seed: s.seed,
        checks_covered: checks.iter().map(|c| c.id).collect(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        result,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("serializable report");
    text.push('\n');
    text
}

fn run_one(s: &Setup, cmd: Command) -> Result<Artifacts, Failure> {
    Ok(match cmd {
        Command::Identities => {
            let (r, checks) = commands::identities(s)?;
            Artifacts {
                name: "identities",
                files: vec![("identities.json", envelope(s, "identities", &checks, &r))],
                checks,
            }
        }
        Command::Accretivity => {
            let (r, checks) = commands::accretivity(s)?;
            Artifacts {
                name: "accretivity",
                files: vec![("accretivity.json", envelope(s, "accretivity", &checks, &r))],
                checks,
            }
        }
        Command::Range => {
            let ((pts, sector), checks) = commands::range(s)?;
            Artifacts {
                name: "range",
                files: vec![
                    ("range.csv", commands::range_csv(&pts)),
                    ("sector.json", envelope(s, "range", &checks, &sector)),
                ],
                checks,
            }
        }
        Command::Sandwich => {
            let (r, checks) = commands::sandwich(s)?;
            Artifacts {
                name: "sandwich",
                files: vec![
                    ("eigenvalues.csv", commands::eigenvalues_csv(&r.report)),
                    ("sandwich.json", envelope(s, "sandwich", &checks, &r)),
                ],
                checks,
            }
        }
        Command::Report => unreachable!("expanded by the caller"),
    })
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("FRACSPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("FRACSPEC_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot size the worker pool: {e}"))
}

fn write_all(dir: &Path, arts: &[Artifacts]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in arts {
        for (name, body) in &a.files {
            fs::write(dir.join(name), body)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.quiet { "error" } else { "warn" }))
        .init();

    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    let setup = match Setup::load(path, cli.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli
        .out
        .clone()
        .or_else(|| setup.config.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    let todo: Vec<Command> = match cli.command {
        Command::Report => {
            let mut v = vec![Command::Identities, Command::Accretivity];
            if setup.coeffs.is_some() {
                v.extend([Command::Range, Command::Sandwich]);
            } else {
                log::warn!("disk domain: range and sandwich need an assembled operator and are skipped");
            }
            v
        }
        c => vec![c],
    };

    // independent analyses run concurrently; files are written afterwards, in order
    let results: Vec<Result<Artifacts, Failure>> = {
        use rayon::prelude::*;
        todo.par_iter().map(|&c| run_one(&setup, c)).collect()
    };

    let mut arts = Vec::new();
    let mut code = 0u8;
    for r in results {
        match r {
            Ok(a) => arts.push(a),
            Err(Failure::Unsupported(msg)) => {
                eprintln!("error: {}: {msg}", path.display());
                code = 2;
            }
            Err(Failure::Numerical(msg)) => {
                eprintln!("failed: {msg}");
                code = code.max(1);
            }
        }
    }
    if let Err(e) = write_all(&out, &arts) {
        eprintln!("error: cannot write to {}: {e}", out.display());
        return ExitCode::from(1);
    }
    for a in &arts {
        for c in &a.checks {
            if !c.pass {
                code = code.max(1);
                eprintln!(
                    "failed: {} check `{}` ({}): value {:e}, threshold {:e}",
                    a.name, c.id, c.description, c.value, c.threshold
                );
            }
            if !cli.quiet {
                println!("{} {}/{}: {:e}", if c.pass { "PASS" } else { "FAIL" }, a.name, c.id, c.value);
            }
        }
    }
    ExitCode::from(code)
}
