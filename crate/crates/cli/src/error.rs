use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

/// A config rejected by parsing or validation.
#[derive(Debug, Clone, PartialEq, Serialize, Error)]
#[error("{path}: {message} [{invariant}]")]
pub struct ConfigError {
    /// Dotted location of the offending field, e.g. `policy.thresholds`.
    pub path: String,
    /// Name of the violated rule, e.g. `threshold_order`.
    pub invariant: String,
    pub message: String,
    /// 1-based position in the file for syntax and type errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, invariant: &str, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            invariant: invariant.to_owned(),
            message: message.into(),
            line: None,
            column: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),

    /// The command needs something the config or flags do not provide.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("model error: {0}")]
    Model(#[from] agewise_core::Error),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Serialize)]
struct Report<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a ConfigError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Model(_) => "model",
            CliError::Io { .. } => "io",
        }
    }

    /// 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Model(_) | CliError::Io { .. } => 1,
        }
    }

    /// Single-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        let report = Report {
            error: self.kind(),
            message: self.to_string(),
            config: match self {
                CliError::Config(c) => Some(c),
                _ => None,
            },
            file: match self {
                CliError::Io { path, .. } => Some(path.display().to_string()),
                _ => None,
            },
        };
        serde_json::to_string(&report).expect("report serializes")
    }
}
