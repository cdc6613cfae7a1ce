//! Natural-language front end: derives candidate sketches from an utterance
//! and ranks them with a linear model over derivation features.

mod grammar;
mod tokens;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sketch::{parse_sketch, print_sketch, Hint, Operand, ParseError, SketchRel, SketchSpec};

pub use grammar::MAX_DERIVATIONS;
pub use tokens::{Token, TokenKind, Utterance};

/// Sparse feature values keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector(BTreeMap<String, f64>);

impl FeatureVector {
    pub fn new() -> Self {
        FeatureVector::default()
    }

    /// Adds `value` to a feature. Non-finite values are ignored.
    pub fn add(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            *self.0.entry(name.into()).or_insert(0.0) += value;
        }
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// One way of reading an utterance as a sketch.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub sketch: SketchRel,
    /// Grammar rules applied, in order.
    pub rules: Vec<String>,
    /// For each token, the rule that consumed it; `None` when skipped.
    pub consumed: Vec<Option<String>>,
    pub features: FeatureVector,
}

/// Every derivation of `u`, at most [`MAX_DERIVATIONS`]. Empty when the
/// utterance has no recognizable opener.
pub fn derive(u: &Utterance) -> Vec<Derivation> {
    grammar::derive_all(u)
}

/// Feature weights. A feature absent from the map has weight zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParserModel {
    weights: BTreeMap<String, f64>,
}

impl ParserModel {
    pub fn new() -> Self {
        ParserModel::default()
    }

    /// Builds a model from named weights, dropping non-finite ones.
    pub fn from_weights(weights: impl IntoIterator<Item = (String, f64)>) -> Self {
        ParserModel {
            weights: weights.into_iter().filter(|(_, w)| w.is_finite()).collect(),
        }
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn weight(&self, name: &str) -> f64 {
        self.weights.get(name).copied().unwrap_or(0.0)
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    fn update(&mut self, features: &FeatureVector, scale: f64) {
        for (name, value) in features.iter() {
            let w = self.weights.entry(name.into()).or_insert(0.0);
            *w += scale * value;
        }
    }
}

/// `Σ w_j φ_j` over the derivation's features.
pub fn score_sketch(derivation: &Derivation, model: &ParserModel) -> f64 {
    derivation
        .features
        .iter()
        .map(|(name, value)| model.weight(name) * value)
        .sum()
}

/// Derivations ordered best first, breaking ties on the printed sketch.
fn ranked(derivations: &[Derivation], model: &ParserModel) -> Vec<(usize, f64, String)> {
    let mut out: Vec<(usize, f64, String)> = derivations
        .iter()
        .enumerate()
        .map(|(i, d)| (i, score_sketch(d, model), print_sketch(&d.sketch)))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.2.cmp(&b.2)).then(a.0.cmp(&b.0)));
    out
}

/// The `k` best distinct sketches for `u`, each with its best derivation
/// score.
pub fn parse(u: &Utterance, model: &ParserModel, k: usize) -> Vec<(SketchRel, f64)> {
    let derivations = derive(u);
    let mut out: Vec<(SketchRel, f64)> = Vec::new();
    for (i, score, _) in ranked(&derivations, model) {
        if out.len() >= k {
            break;
        }
        let sketch = &derivations[i].sketch;
        if !out.iter().any(|(s, _)| s == sketch) {
            out.push((sketch.clone(), score));
        }
    }
    out
}

/// The fallback reading of an utterance nothing else derives:
/// `SELECT ? FROM ??[utterance]`.
pub fn fallback_sketch(text: &str) -> SketchRel {
    SketchRel::project(SketchSpec::Col(Hint::none()), SketchRel::table(Hint::new(text)))
}

fn normalize_hint(h: &Hint) -> Hint {
    match h.key() {
        Some(k) => Hint::new(&k),
        None => Hint::none(),
    }
}

fn normalize_spec(spec: &SketchSpec) -> SketchSpec {
    use SketchSpec::*;
    match spec {
        Col(h) => Col(normalize_hint(h)),
        Agg(f, h) => Agg(*f, normalize_hint(h)),
        Group(f, a, b) => Group(*f, normalize_hint(a), normalize_hint(b)),
        List(a, b) => SketchSpec::list(normalize_spec(a), normalize_spec(b)),
        And(a, b) => SketchSpec::and(normalize_spec(a), normalize_spec(b)),
        Or(a, b) => SketchSpec::or(normalize_spec(a), normalize_spec(b)),
        Not(a) => SketchSpec::not(normalize_spec(a)),
        Atom(h, op, operand) => Atom(
            normalize_hint(h),
            *op,
            match operand {
                Operand::Col(c) => Operand::Col(normalize_hint(c)),
                Operand::Rel(r) => Operand::Rel(alloc::boxed::Box::new(normalize(r))),
                Operand::Value(v) => Operand::Value(v.clone()),
            },
        ),
    }
}

fn normalize(rel: &SketchRel) -> SketchRel {
    match rel {
        SketchRel::Table(h) => SketchRel::Table(normalize_hint(h)),
        SketchRel::Project(s, r) => SketchRel::project(normalize_spec(s), normalize(r)),
        SketchRel::Select(s, r) => SketchRel::select(normalize_spec(s), normalize(r)),
        SketchRel::Join {
            left,
            left_col,
            right_col,
            right,
        } => SketchRel::join(
            normalize(left),
            normalize_hint(left_col),
            normalize_hint(right_col),
            normalize(right),
        ),
    }
}

/// Equality up to the letter case of hints.
pub fn structurally_equal(a: &SketchRel, b: &SketchRel) -> bool {
    normalize(a) == normalize(b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainError {
    pub example: usize,
    pub error: ParseError,
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gold sketch of example {} does not parse: {}",
            self.example + 1,
            self.error
        )
    }
}

impl core::error::Error for TrainError {}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Indices of examples whose gold sketch no derivation produces.
    pub underivable: Vec<usize>,
    /// Weight updates made per epoch.
    pub updates: Vec<usize>,
}

/// Structured perceptron: whenever the top derivation is not the gold
/// sketch, move the weights towards the best gold derivation's features and
/// away from the top one's. Examples are shuffled each epoch with `seed`.
pub fn train(
    pairs: &[(String, String)],
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<(ParserModel, TrainReport), TrainError> {
    let mut examples = Vec::with_capacity(pairs.len());
    for (i, (text, gold)) in pairs.iter().enumerate() {
        let gold = parse_sketch(gold).map_err(|error| TrainError { example: i, error })?;
        examples.push((Utterance::new(text), gold));
    }
    let mut model = ParserModel::new();
    let mut report = TrainReport::default();
    let mut derivations: Vec<Vec<Derivation>> = Vec::with_capacity(examples.len());
    let mut gold_indices: Vec<Vec<usize>> = Vec::with_capacity(examples.len());
    for (i, (u, gold)) in examples.iter().enumerate() {
        let ds = derive(u);
        let matching: Vec<usize> = (0..ds.len())
            .filter(|&j| structurally_equal(&ds[j].sketch, gold))
            .collect();
        if matching.is_empty() {
            log::warn!(
                "skipping example {}: no derivation yields `{}`",
                i + 1,
                print_sketch(gold)
            );
            report.underivable.push(i);
        }
        derivations.push(ds);
        gold_indices.push(matching);
    }
    let mut order: Vec<usize> = (0..examples.len()).filter(|i| !gold_indices[*i].is_empty()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        let mut updates = 0;
        for &i in &order {
            let ranking = ranked(&derivations[i], &model);
            let top = ranking[0].0;
            if gold_indices[i].contains(&top) {
                continue;
            }
            let Some(best_gold) = ranking.iter().map(|r| r.0).find(|j| gold_indices[i].contains(j)) else {
                continue;
            };
            model.update(&derivations[i][best_gold].features, learning_rate);
            model.update(&derivations[i][top].features, -learning_rate);
            updates += 1;
        }
        report.updates.push(updates);
    }
    Ok((model, report))
}

/// Top-`k` accuracy of `model` on labelled pairs: the share of examples
/// whose gold sketch appears among the `k` best parses.
pub fn top_k_accuracy(pairs: &[(String, String)], model: &ParserModel, k: usize) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let hits = pairs
        .iter()
        .filter(|(text, gold)| {
            let Ok(gold) = parse_sketch(gold) else {
                return false;
            };
            parse(&Utterance::new(text), model, k)
                .iter()
                .any(|(s, _)| structurally_equal(s, &gold))
        })
        .count();
    hits as f64 / pairs.len() as f64
}

impl fmt::Display for ParserModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, w) in &self.weights {
            writeln!(f, "{}\t{}", name, w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
