//! File formats and process-level plumbing around `sketchql-core`: schema
//! descriptors with CSV data, SQLite databases, embedding files, parser
//! corpora and models, result rendering and parallel synthesis.

pub mod embeddings;
pub mod error;
pub mod model;
pub mod output;
pub mod run;
pub mod schema;
pub mod sqlite;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
