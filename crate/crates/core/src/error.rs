use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the circular/vector primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("value {value} outside [{lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("direction undefined for vector of norm {0}")]
    Singular(f64),
}

/// Errors raised by metric computations on malformed input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("metric needs at least {need} samples, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("expected {expected} positions for the target polygon, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

/// Configuration problems. `line` is 1-based when the offending key could be
/// located in the source text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{}parse error: {message}", line_prefix(*line))]
    Parse { line: Option<usize>, message: String },
    #[error("{}`{key}`: {message}", line_prefix(*line))]
    Invalid { key: String, line: Option<usize>, message: String },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("duplicate agent id {0}")]
    DuplicateId(usize),
}

fn line_prefix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

impl ConfigError {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.to_string(), line: None, message: message.into() }
    }
}

/// Failures while running a simulation.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("non-finite state at tick {tick} for agent {agent} ({what})")]
    NonFinite { tick: u64, agent: usize, what: &'static str },
}

/// Errors reading, writing or comparing trace files.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("malformed trace {path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

impl TraceError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TraceError::Io { path: path.into(), source }
    }
}
