use std::path::PathBuf;

/// Errors surfaced by the library.
///
/// Ingestion problems (files, parsing) and configuration problems (bad
/// parameters) are kept apart so the CLI can map them to distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("empty match set")]
    EmptyMatches,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),
    #[error("pair {index}: {source}")]
    Pair {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by unreadable or malformed inputs.
    pub fn is_ingestion(&self) -> bool {
        if let Error::Pair { source, .. } = self {
            return source.is_ingestion();
        }
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::Format { .. }
                | Error::EmptyMatches
                | Error::NonFinite
                | Error::DegenerateCloud(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
