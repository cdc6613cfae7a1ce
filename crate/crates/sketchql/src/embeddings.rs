//! Plain-text word vectors: a `V D` header line, then `token f1 .. fD`.

use std::fs;
use std::path::Path;

use sketchql_core::similarity::{EmbeddingError, EmbeddingStore};

use crate::{Error, Result};

pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text, path)
}

/// Parses embedding text; `origin` only labels errors. A repeated token
/// keeps its last vector.
pub fn parse_embeddings(text: &str, origin: &Path) -> Result<EmbeddingStore> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::format(origin, 1, "missing `V D` header"));
    };
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| Error::format(origin, 1, "header must be two counts `V D`"))?;
    let [declared, dim] = counts[..] else {
        return Err(Error::format(origin, 1, "header must be two counts `V D`"));
    };
    if dim == 0 {
        return Err(Error::format(origin, 1, "dimension must be positive"));
    }
    let mut store = EmbeddingStore::new(dim);
    let mut seen = 0;
    for (i, line) in lines {
        let mut parts = line.split_whitespace();
        let token = parts.next().unwrap_or_default();
        let vector: Vec<f32> = parts
            .map(|p| p.parse::<f32>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::format(origin, i + 1, format!("bad float in vector for `{}`", token)))?;
        if vector.len() != dim {
            return Err(Error::Embedding {
                path: origin.into(),
                line: i + 1,
                source: EmbeddingError::DimensionMismatch {
                    token: token.into(),
                    expected: dim,
                    found: vector.len(),
                },
            });
        }
        let replaced = store.insert(token, vector).map_err(|source| Error::Embedding {
            path: origin.into(),
            line: i + 1,
            source,
        })?;
        if replaced {
            log::warn!(
                "{} line {}: duplicate token `{}`, keeping the later vector",
                origin.display(),
                i + 1,
                token
            );
        }
        seen += 1;
    }
    if seen != declared {
        log::warn!(
            "{}: header declares {} vectors, found {}",
            origin.display(),
            declared,
            seen
        );
    }
    Ok(store)
}
