use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: must satisfy {constraint}")]
    InvalidParam {
        name: &'static str,
        value: String,
        constraint: &'static str,
    },

    #[error("population of {n_players} players is too small: {reason}")]
    PopulationTooSmall { n_players: usize, reason: &'static str },

    #[error("player index {index} out of range for {n_players} players")]
    IndexOutOfRange { index: usize, n_players: usize },

    #[error("mixed players have no Cipolla quadrant")]
    MixedNotClassifiable,

    #[error("no outcome flip found on the initial-fraction grid: {0}")]
    NoFlipFound(String),

    #[error("config error at key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from user-supplied configuration rather than the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidParam { .. } | Error::Config { .. })
    }
}
