//! Parser training corpora and learned models.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sketchql_core::nlparser::ParserModel;
use sketchql_core::sketch::parse_sketch;

use crate::{Error, Result};

/// Reads `utterance<TAB>sketch` lines. Blank lines and lines starting with
/// `#` are ignored; every sketch must parse.
pub fn read_corpus(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((utterance, sketch)) = line.split_once('\t') else {
            return Err(Error::format(path, i + 1, "expected `utterance<TAB>sketch`"));
        };
        parse_sketch(sketch.trim()).map_err(|source| Error::Sketch {
            path: path.into(),
            line: i + 1,
            source,
        })?;
        pairs.push((utterance.trim().to_string(), sketch.trim().to_string()));
    }
    Ok(pairs)
}

/// A model as a JSON object of feature weights.
pub fn model_to_json(model: &ParserModel) -> String {
    let mut text = serde_json::to_string_pretty(model.weights()).unwrap_or_else(|_| "{}".into());
    text.push('\n');
    text
}

/// Weights trained on the bundled company corpus (20 epochs, rate 0.1,
/// seed 0), used when no model file is given.
pub fn default_model() -> ParserModel {
    let weights: BTreeMap<String, f64> =
        serde_json::from_str(include_str!("../fixtures/company/model.json")).expect("bundled model is valid JSON");
    ParserModel::from_weights(weights)
}

pub fn write_model(model: &ParserModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<ParserModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let weights: BTreeMap<String, f64> = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    Ok(ParserModel::from_weights(weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let model = ParserModel::from_weights([("rule:a".to_string(), 0.5), ("skipped".to_string(), -1.25)]);
        write_model(&model, &path).unwrap();
        assert_eq!(read_model(&path).unwrap(), model);
    }

    #[test]
    fn corpus_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        fs::write(&path, "# comment\nshow names\tSELECT ?[names] FROM ??\n\n").unwrap();
        assert_eq!(read_corpus(&path).unwrap().len(), 1);
        fs::write(&path, "show names SELECT ? FROM ??\n").unwrap();
        assert!(matches!(read_corpus(&path), Err(Error::Format { line: 1, .. })));
        fs::write(&path, "show names\tSELECT FROM\n").unwrap();
        assert!(matches!(read_corpus(&path), Err(Error::Sketch { line: 1, .. })));
    }
}
