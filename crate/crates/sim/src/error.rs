use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{}:{line}: {message}", path.display())]
    ConfigFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error on {}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("trial {trial} failed")]
    Trial {
        trial: usize,
        #[source]
        source: pinching_core::Error,
    },
}
