//! Similarity between natural-language hints and schema identifiers.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::sketch::Hint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingError {
    DimensionMismatch {
        token: String,
        expected: usize,
        found: usize,
    },
    ZeroVector {
        token: String,
    },
}

impl fmt::Display for EmbeddingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbeddingError::DimensionMismatch { token, expected, found } => write!(
                f,
                "vector for `{}` has {} components, expected {}",
                token, found, expected
            ),
            EmbeddingError::ZeroVector { token } => write!(f, "vector for `{}` is zero", token),
        }
    }
}

impl core::error::Error for EmbeddingError {}

/// Word vectors of a fixed dimension, unit-normalized on insertion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: BTreeMap<String, Vec<f32>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Inserts (or replaces) the vector for `token`. Returns whether a
    /// previous vector was replaced.
    pub fn insert(&mut self, token: &str, vector: Vec<f32>) -> Result<bool, EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                token: token.into(),
                expected: self.dim,
                found: vector.len(),
            });
        }
        let norm = libm::sqrt(vector.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>());
        if norm == 0.0 || !norm.is_finite() {
            return Err(EmbeddingError::ZeroVector { token: token.into() });
        }
        let unit = vector.iter().map(|x| (*x as f64 / norm) as f32).collect();
        Ok(self.vectors.insert(token.to_lowercase(), unit).is_some())
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vectors.get(token).map(|v| v.as_slice())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        Some(x.iter().zip(y).map(|(p, q)| *p as f64 * *q as f64).sum())
    }
}

/// Splits an identifier or phrase into lowercase word tokens: breaks at
/// non-alphanumerics, lower-to-upper case changes, acronym ends and
/// letter/digit changes.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            if !current.is_empty() {
                tokens.push(core::mem::take(&mut current));
            }
            continue;
        }
        if let Some(&prev) = current.chars().last().as_ref() {
            let next = chars.get(i + 1).copied();
            let boundary = (prev.is_lowercase() && c.is_uppercase())
                || (prev.is_alphabetic() != c.is_alphabetic())
                || (prev.is_uppercase() && c.is_uppercase() && next.is_some_and(|n| n.is_lowercase()));
            if boundary {
                tokens.push(core::mem::take(&mut current));
            }
        }
        current.push(c);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens.into_iter().map(|t| t.to_lowercase()).collect()
}

/// Normalized Levenshtein similarity over characters.
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut row = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let subst = prev[j] + usize::from(ca != cb);
            row[j + 1] = subst.min(prev[j + 1] + 1).min(row[j] + 1);
        }
        core::mem::swap(&mut prev, &mut row);
    }
    1.0 - prev[b.len()] as f64 / longest as f64
}

/// Scores hints against identifiers, using embeddings when both tokens have
/// a vector and edit distance otherwise.
#[derive(Debug, Clone)]
pub struct SimilarityProvider {
    store: Option<EmbeddingStore>,
    neutral: f64,
}

impl Default for SimilarityProvider {
    fn default() -> Self {
        SimilarityProvider::lexical()
    }
}

impl SimilarityProvider {
    pub const DEFAULT_NEUTRAL: f64 = 0.5;

    pub fn new(store: Option<EmbeddingStore>) -> Self {
        SimilarityProvider {
            store,
            neutral: Self::DEFAULT_NEUTRAL,
        }
    }

    pub fn lexical() -> Self {
        SimilarityProvider::new(None)
    }

    pub fn with_neutral(mut self, neutral: f64) -> Self {
        self.neutral = neutral.clamp(0.0, 1.0);
        self
    }

    pub fn neutral(&self) -> f64 {
        self.neutral
    }

    pub fn store(&self) -> Option<&EmbeddingStore> {
        self.store.as_ref()
    }

    fn normalize(&self, tokens: Vec<String>) -> Vec<String> {
        let Some(store) = &self.store else {
            return tokens;
        };
        tokens
            .into_iter()
            .map(|t| match t.strip_suffix('s') {
                Some(stem) if !stem.is_empty() && store.contains(stem) => stem.into(),
                _ => t,
            })
            .collect()
    }

    fn token_similarity(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        if let Some(cos) = self.store.as_ref().and_then(|s| s.cosine(a, b)) {
            return ((cos + 1.0) / 2.0).clamp(0.0, 1.0);
        }
        edit_similarity(a, b)
    }

    /// Similarity of free text to an identifier: the mean over hint tokens
    /// of the best match among identifier tokens.
    pub fn text_similarity(&self, hint: &str, name: &str) -> f64 {
        let hint_tokens = self.normalize(tokenize(hint));
        let name_tokens = self.normalize(tokenize(name));
        if hint_tokens.is_empty() {
            return self.neutral;
        }
        if name_tokens.is_empty() {
            return 0.0;
        }
        let total: f64 = hint_tokens
            .iter()
            .map(|h| {
                name_tokens
                    .iter()
                    .map(|n| self.token_similarity(h, n))
                    .fold(0.0, f64::max)
            })
            .sum();
        (total / hint_tokens.len() as f64).clamp(0.0, 1.0)
    }

    /// `sim(h, name)`; the empty hint scores the neutral constant.
    pub fn sim(&self, hint: &Hint, name: &str) -> f64 {
        match hint.text() {
            None => self.neutral,
            Some(text) => self.text_similarity(text, name),
        }
    }

    /// Score of a column for a hint. With a `table_weight`, the owning
    /// table's name can stand in for the column at that discount.
    pub fn column_score(&self, hint: &Hint, table: &str, column: &str, table_weight: Option<f64>) -> f64 {
        let direct = self.sim(hint, column);
        match (table_weight, hint.is_empty()) {
            (Some(w), false) => direct.max(w * self.sim(hint, table)),
            _ => direct,
        }
    }
}
