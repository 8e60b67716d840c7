use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid item: {0}")]
    InvalidItem(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parameter {name} = {value} outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown gadget `{0}` (expected duplicated_suffix, small_then_large or two_density)")]
    UnknownGadget(String),

    #[error("missing gadget parameter `{0}`")]
    MissingParam(&'static str),

    #[error("resource budget exceeded: {cells} DP cells > budget {budget}; use a coarser granularity m")]
    Budget { cells: u128, budget: u128 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("missing metadata sidecar {0}")]
    MissingMetadata(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parameter(name: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            value,
            range: range.into(),
        }
    }

    /// True for errors caused by bad input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Budget { .. } | Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
