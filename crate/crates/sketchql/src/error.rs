use std::io;
use std::path::PathBuf;

use sketchql_core::catalog::LoadError;
use sketchql_core::similarity::EmbeddingError;
use sketchql_core::sketch::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {source}", path.display())]
    Sqlite { path: PathBuf, source: rusqlite::Error },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{}: unsupported column type `{declared}` for {table}.{column}", path.display())]
    ColumnType {
        path: PathBuf,
        table: String,
        column: String,
        declared: String,
    },
    #[error("{} line {line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{} line {line}: {source}", path.display())]
    Embedding {
        path: PathBuf,
        line: usize,
        source: EmbeddingError,
    },
    #[error("{} line {line}: bad sketch: {source}", path.display())]
    Sketch {
        path: PathBuf,
        line: usize,
        source: ParseError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
