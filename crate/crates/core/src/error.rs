use std::path::PathBuf;

use thiserror::Error;

use crate::instance::Violation;
use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("no_supply_remaining: no supply agent has capacity >= {0}")]
    NoSupplyRemaining(u32),

    #[error("LP solver: {0}")]
    Lp(#[from] LpError),

    #[error("policy: {0}")]
    Policy(String),

    #[error("config: {0}")]
    Config(String),

    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("{} ({})", x.code, x.detail))
        .collect::<Vec<_>>()
        .join("; ")
}
