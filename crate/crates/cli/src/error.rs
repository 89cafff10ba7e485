use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::json;

/// Failure of a command, carrying its exit code class.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric { message: String, diagnostics: serde_json::Value },
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io { path: path.to_path_buf(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn report(&self) {
        match self {
            CliError::Usage(msg) => eprintln!("error: {msg}"),
            CliError::Numeric { diagnostics, .. } => {
                eprintln!("{}", serde_json::to_string_pretty(diagnostics).unwrap_or_default())
            }
            CliError::Io { path, message } => eprintln!("error: {}: {message}", path.display()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numeric { message, .. } => write!(f, "{message}"),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl From<tmdnp_core::Error> for CliError {
    fn from(e: tmdnp_core::Error) -> Self {
        use tmdnp_core::Error as E;
        let message = e.to_string();
        let diagnostics = match &e {
            E::InvalidArgument(m) => return CliError::Usage(m.clone()),
            E::FitFailure { reason, iterations, cost } => json!({
                "error": "fit_failure",
                "message": reason,
                "iterations": iterations,
                "cost": if cost.is_finite() { json!(cost) } else { json!(null) },
            }),
            E::Underdetermined { points, params } => json!({
                "error": "underdetermined",
                "message": message,
                "points": points,
                "params": params,
            }),
            other => json!({ "error": kind(other), "message": message }),
        };
        CliError::Numeric { message, diagnostics }
    }
}

fn kind(e: &tmdnp_core::Error) -> &'static str {
    use tmdnp_core::Error as E;
    match e {
        E::InvalidArgument(_) => "invalid_argument",
        E::OutOfRange(_) => "out_of_range",
        E::InfiniteTemperature => "infinite_temperature",
        E::Indeterminate(_) => "indeterminate",
        E::Resolution { .. } => "resolution",
        E::NoRoot { .. } => "no_root",
        E::Numeric(_) => "numeric",
        E::Underdetermined { .. } => "underdetermined",
        E::FitFailure { .. } => "fit_failure",
        E::UnphysicalEnhancement(_) => "unphysical_enhancement",
        E::NoCrossing => "no_crossing",
        E::NoData => "no_data",
    }
}

pub type CliResult<T> = Result<T, CliError>;
