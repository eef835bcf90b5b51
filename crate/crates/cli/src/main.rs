//! `swarmpulse` command-line runner.
//!
//! Exit codes: 0 success, 1 I/O failure or a failed comparison, 2 invalid
//! configuration or input, 3 numeric blow-up during a run.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swarmpulse::scenario::{bundled_source, describe, list_scenarios};
use swarmpulse::trace::{compare, CsvTable};
use swarmpulse::{run_scenario, ConfigError, ScenarioConfig, SimError, TraceError};

#[derive(Parser)]
#[command(name = "swarmpulse", version, about = "Pulse-coupled swarmalator simulation runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario by name) and write traces.
    Run {
        config: String,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory. Defaults to `swarmpulse-out/<scenario>`.
        #[arg(long, env = "SWARMPULSE_OUT")]
        out: Option<PathBuf>,
    },
    /// List bundled scenarios.
    List,
    /// Show the parameters and source of a bundled scenario.
    Describe { name: String },
    /// Compare one column of two traces.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        tol: f64,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Config(_) => 2,
            SimError::NonFinite { .. } => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<TraceError> for Failure {
    fn from(e: TraceError) -> Self {
        let code = match e {
            TraceError::Io { .. } => 1,
            TraceError::Schema(_) | TraceError::Malformed { .. } => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn load(config: &str) -> Result<ScenarioConfig, Failure> {
    let path = Path::new(config);
    if path.exists() {
        return Ok(ScenarioConfig::from_path(path)?);
    }
    match bundled_source(config) {
        Ok(src) => Ok(ScenarioConfig::parse(src, config)?),
        Err(_) => Err(Failure { code: 2, message: format!("no such file or bundled scenario: {config}") }),
    }
}

fn run(config: &str, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg = load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let dir = out.unwrap_or_else(|| Path::new("swarmpulse-out").join(&cfg.name));
    let output = run_scenario(&cfg)?;
    let written = output.write_to(&dir)?;
    let s = &output.summary;
    println!("scenario {} ({}), seed {}, {} ticks", s.scenario, s.model.label(), s.seed, s.ticks);
    println!("final order_param {:.6}, agents {}", s.final_order_param, s.n_final);
    if let Some(sp) = s.final_spacing {
        println!("final spacing am {:.4} gm {:.4} min {:.4} max {:.4}", sp.am, sp.gm, sp.min, sp.max);
    }
    if let Some(t) = s.sync_time {
        println!("sync_time {t:.4}");
    }
    if s.medium.is_some() {
        println!("collisions {}", s.collisions);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Accepts a CSV file, or a run directory in which the first trace holding
/// `metric` is used.
fn resolve_trace(path: &Path, metric: &str) -> Result<CsvTable, Failure> {
    if !path.is_dir() {
        return Ok(CsvTable::read(path)?);
    }
    for file in ["metrics.csv", "phases.csv", "positions.csv"] {
        let candidate = path.join(file);
        if candidate.exists() {
            let table = CsvTable::read(&candidate)?;
            if table.column(metric).is_some() {
                return Ok(table);
            }
        }
    }
    Err(Failure { code: 2, message: format!("no trace in {} has a `{metric}` column", path.display()) })
}

fn compare_cmd(a: &Path, b: &Path, metric: &str, tol: f64) -> Result<(), Failure> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Failure { code: 2, message: format!("--tol must be finite and >= 0, got {tol}") });
    }
    let report = compare(&resolve_trace(a, metric)?, &resolve_trace(b, metric)?, metric, tol)?;
    print!("{}", report.render());
    if report.pass {
        Ok(())
    } else {
        Err(Failure { code: 1, message: format!("`{metric}` differs by more than {tol}") })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out } => run(&config, seed, out),
        Command::List => {
            for name in list_scenarios() {
                let description = swarmpulse::scenario::bundled(name).map(|c| c.description).unwrap_or_default();
                println!("{name:20} {description}");
            }
            Ok(())
        }
        Command::Describe { name } => describe(&name).map(|text| print!("{text}")).map_err(Failure::from),
        Command::Compare { a, b, metric, tol } => compare_cmd(&a, &b, &metric, tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
