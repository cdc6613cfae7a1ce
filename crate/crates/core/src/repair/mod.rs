//! Sketch repair: finding the smallest subterm whose completions are all
//! implausible, and rewriting it with one of a fixed set of tactics.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{AggFunc, BaseType, Value};
use crate::completion::Completer;
use crate::config::Config;
use crate::similarity::SimilarityProvider;
use crate::sketch::{
    sub_relation_indices, sub_specifier_indices, Hint, Operand, PathError, SketchPath, SketchRel, SketchSpec,
    SketchTerm,
};

/// Rewrites, in the order they are tried when several apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tactic {
    /// `?h op "a b"` becomes `?h op "a" AND ?h op "b"`.
    AddPred,
    /// `?[count of x]` in a projection becomes `count(?[x])`.
    AddFunc,
    /// `?h op "v"` becomes `?h op ?[v]`.
    AddCol,
    /// A selection's input gains a join with a fresh table hole.
    AddJoin1,
    /// A projection's input gains a join with a fresh table hole.
    AddJoin2,
    /// The left input of a join gains a further join.
    AddJoin3,
}

impl Tactic {
    pub const ALL: [Tactic; 6] = [
        Tactic::AddPred,
        Tactic::AddFunc,
        Tactic::AddCol,
        Tactic::AddJoin1,
        Tactic::AddJoin2,
        Tactic::AddJoin3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tactic::AddPred => "AddPred",
            Tactic::AddFunc => "AddFunc",
            Tactic::AddCol => "AddCol",
            Tactic::AddJoin1 => "AddJoin1",
            Tactic::AddJoin2 => "AddJoin2",
            Tactic::AddJoin3 => "AddJoin3",
        }
    }
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Splits text at its first space, apostrophe or hyphen. The second part is
/// empty when there is no delimiter.
pub fn split(text: &str) -> (String, String) {
    let text = text.trim();
    match text.find([' ', '\'', '-']) {
        Some(at) => {
            let delim = text[at..].chars().next().map_or(1, char::len_utf8);
            (text[..at].trim().into(), text[at + delim..].trim().into())
        }
        None => (text.into(), String::new()),
    }
}

/// Words that suggest each aggregate function.
pub const FUNCTION_KEYWORDS: [(AggFunc, &[&str]); 5] = [
    (AggFunc::Count, &["number", "count", "how many"]),
    (AggFunc::Avg, &["average", "mean"]),
    (AggFunc::Max, &["maximum", "most", "highest", "largest"]),
    (AggFunc::Min, &["minimum", "least", "lowest", "smallest"]),
    (AggFunc::Sum, &["total", "sum"]),
];

/// Reads an aggregate off the front of a hint, returning the function and
/// the remaining hint.
pub fn function_from_hint(hint: &Hint, sim: &SimilarityProvider, threshold: f64) -> Option<(AggFunc, Hint)> {
    let text = hint.text()?;
    let lower = text.to_lowercase();
    let mut best: Option<(AggFunc, f64, String)> = None;
    let mut offer = |func: AggFunc, score: f64, rest: &str| {
        if score >= threshold && best.as_ref().is_none_or(|(_, s, _)| score > *s) {
            best = Some((func, score, rest.into()));
        }
    };
    for (func, words) in FUNCTION_KEYWORDS {
        for word in words.iter().filter(|w| w.contains(' ')) {
            if let Some(rest) = lower.strip_prefix(word) {
                if rest.is_empty() || rest.starts_with(' ') {
                    offer(func, 1.0, &text[word.len()..]);
                }
            }
        }
    }
    let (head, rest) = split(text);
    for (func, words) in FUNCTION_KEYWORDS {
        for word in words.iter().filter(|w| !w.contains(' ')) {
            offer(func, sim.text_similarity(&head, word), &rest);
        }
    }
    let (func, _, rest) = best?;
    let mut rest = rest.trim();
    loop {
        let lowered = rest.to_lowercase();
        match ["of ", "the "].iter().find(|p| lowered.starts_with(**p)) {
            Some(p) => rest = rest[p.len()..].trim_start(),
            None if lowered == "of" || lowered == "the" => rest = "",
            None => break,
        }
    }
    Some((func, Hint::new(rest)))
}

/// `(path, tactic)` pairs already applied to a sketch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lineage(BTreeSet<(SketchPath, Tactic)>);

impl Lineage {
    pub fn new() -> Self {
        Lineage::default()
    }

    pub fn contains(&self, path: &SketchPath, tactic: Tactic) -> bool {
        self.0.contains(&(path.clone(), tactic))
    }

    pub fn record(&mut self, path: SketchPath, tactic: Tactic) {
        self.0.insert((path, tactic));
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepairError {
    NoSuchPath(SketchPath),
    NoTactic(SketchPath),
    Path(PathError),
}

impl fmt::Display for RepairError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepairError::NoSuchPath(p) => write!(f, "no subterm at {}", p),
            RepairError::NoTactic(p) => write!(f, "no unused tactic applies at {}", p),
            RepairError::Path(e) => write!(f, "{}", e),
        }
    }
}

impl core::error::Error for RepairError {}

impl From<PathError> for RepairError {
    fn from(e: PathError) -> Self {
        RepairError::Path(e)
    }
}

/// True when the column hole at `path` is an entry of a projection list.
fn in_item_slot(sketch: &SketchRel, path: &SketchPath) -> bool {
    let steps = &path.0;
    let Some(start) = (0..steps.len()).rev().find(|&k| {
        steps[k] == 0
            && matches!(
                sketch.get(&SketchPath(steps[..k].to_vec())),
                Some(SketchTerm::Rel(SketchRel::Project(..)))
            )
    }) else {
        return false;
    };
    (start + 1..steps.len()).all(|j| {
        matches!(
            sketch.get(&SketchPath(steps[..j].to_vec())),
            Some(SketchTerm::Spec(SketchSpec::List(..)))
        )
    })
}

/// Tactics whose shape matches the subterm at `path`, in priority order,
/// ignoring lineage.
pub fn applicable_tactics(
    sketch: &SketchRel,
    path: &SketchPath,
    sim: &SimilarityProvider,
    cfg: &Config,
) -> Vec<Tactic> {
    let Some(term) = sketch.get(path) else {
        return Vec::new();
    };
    Tactic::ALL
        .into_iter()
        .filter(|t| rewrite(sketch, path, &term, *t, sim, cfg).is_some())
        .collect()
}

/// Whether some tactic not yet applied at `path` matches there.
pub fn can_repair(
    sketch: &SketchRel,
    path: &SketchPath,
    lineage: &Lineage,
    sim: &SimilarityProvider,
    cfg: &Config,
) -> bool {
    applicable_tactics(sketch, path, sim, cfg)
        .into_iter()
        .any(|t| !lineage.contains(path, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Repair {
    pub sketch: SketchRel,
    pub path: SketchPath,
    pub tactic: Tactic,
}

/// Rewrites the subterm at `path` with the highest-priority unused tactic
/// and records it in `lineage`.
pub fn apply_repair(
    sketch: &SketchRel,
    path: &SketchPath,
    lineage: &mut Lineage,
    sim: &SimilarityProvider,
    cfg: &Config,
) -> Result<Repair, RepairError> {
    let term = sketch.get(path).ok_or_else(|| RepairError::NoSuchPath(path.clone()))?;
    for tactic in Tactic::ALL {
        if lineage.contains(path, tactic) {
            continue;
        }
        if let Some(replacement) = rewrite(sketch, path, &term, tactic, sim, cfg) {
            let repaired = sketch.replace_at(path, replacement)?;
            lineage.record(path.clone(), tactic);
            return Ok(Repair {
                sketch: repaired,
                path: path.clone(),
                tactic,
            });
        }
    }
    Err(RepairError::NoTactic(path.clone()))
}

fn literal(text: &str) -> Value {
    match crate::algebra::parse_number(text) {
        Some(_) => Value::string(text)
            .coerce_to(BaseType::Number)
            .unwrap_or_else(|| Value::string(text)),
        None => Value::string(text),
    }
}

fn fresh_join(input: SketchRel) -> SketchRel {
    SketchRel::join(input, Hint::none(), Hint::none(), SketchRel::table(Hint::none()))
}

/// The replacement a tactic produces for `term`, if its shape matches.
fn rewrite(
    sketch: &SketchRel,
    path: &SketchPath,
    term: &SketchTerm,
    tactic: Tactic,
    sim: &SimilarityProvider,
    cfg: &Config,
) -> Option<SketchTerm> {
    match (tactic, term) {
        (Tactic::AddPred, SketchTerm::Spec(SketchSpec::Atom(h, op, Operand::Value(Value::Str(text))))) => {
            let (first, second) = split(text);
            if first.is_empty() || second.is_empty() {
                return None;
            }
            Some(SketchTerm::Spec(SketchSpec::and(
                SketchSpec::Atom(h.clone(), *op, Operand::Value(literal(&first))),
                SketchSpec::Atom(h.clone(), *op, Operand::Value(literal(&second))),
            )))
        }
        (Tactic::AddFunc, SketchTerm::Spec(SketchSpec::Col(h))) => {
            if !in_item_slot(sketch, path) {
                return None;
            }
            let (func, rest) = function_from_hint(h, sim, cfg.func_threshold)?;
            Some(SketchTerm::Spec(SketchSpec::Agg(func, rest)))
        }
        (Tactic::AddCol, SketchTerm::Spec(SketchSpec::Atom(h, op, Operand::Value(v)))) => {
            let text = v.text();
            let hint = Hint::new(&text);
            if hint.is_empty() {
                return None;
            }
            Some(SketchTerm::Spec(SketchSpec::Atom(h.clone(), *op, Operand::Col(hint))))
        }
        (Tactic::AddJoin1, SketchTerm::Rel(SketchRel::Select(pred, input))) => Some(SketchTerm::Rel(
            SketchRel::select(pred.clone(), fresh_join((**input).clone())),
        )),
        (Tactic::AddJoin2, SketchTerm::Rel(SketchRel::Project(items, input))) => Some(SketchTerm::Rel(
            SketchRel::project(items.clone(), fresh_join((**input).clone())),
        )),
        (Tactic::AddJoin3, SketchTerm::Rel(SketchRel::Join { left, right, .. })) => {
            Some(SketchTerm::Rel(SketchRel::join(
                fresh_join((**left).clone()),
                Hint::none(),
                Hint::none(),
                (**right).clone(),
            )))
        }
        _ => None,
    }
}

/// A subterm whose completions all score below the fault threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Fault {
    pub path: SketchPath,
    pub term: SketchTerm,
    /// Best completion score of the subterm; for a specifier, the best over
    /// every record type its input can take.
    pub best_score: f64,
}

/// Finds the innermost repairable subterm of `sketch` with no plausible
/// completion. Specifiers are judged under every record type their input
/// relation can take, and blamed only when all of them agree.
pub fn fault_localize(sketch: &SketchRel, completer: &Completer<'_>, lineage: &Lineage) -> Option<Fault> {
    Localizer {
        sketch,
        completer,
        lineage,
    }
    .visit(&SketchPath::root(), &SketchTerm::Rel(sketch.clone()), None)
}

struct Localizer<'s, 'c, 'a> {
    sketch: &'s SketchRel,
    completer: &'c Completer<'a>,
    lineage: &'s Lineage,
}

impl Localizer<'_, '_, '_> {
    fn repairable(&self, path: &SketchPath) -> bool {
        can_repair(
            self.sketch,
            path,
            self.lineage,
            self.completer.similarity(),
            self.completer.config(),
        )
    }

    fn best(&self, term: &SketchTerm, tau: Option<&crate::algebra::RecordType>) -> f64 {
        self.completer
            .instantiate_term(term, tau)
            .first()
            .map_or(0.0, |c| c.score)
    }

    fn visit(&self, path: &SketchPath, term: &SketchTerm, tau: Option<&crate::algebra::RecordType>) -> Option<Fault> {
        match term {
            SketchTerm::Rel(rel) => {
                for (rel_idx, spec_idx) in sub_relation_indices(rel) {
                    let rel_path = path.child(rel_idx);
                    let child = self.sketch.get(&rel_path)?;
                    if let Some(fault) = self.visit(&rel_path, &child, None) {
                        return Some(fault);
                    }
                    let SketchTerm::Rel(child_rel) = &child else {
                        continue;
                    };
                    let mut taus = Vec::new();
                    for c in self.completer.instantiate_rel(child_rel) {
                        if !taus.contains(&c.ty) {
                            taus.push(c.ty);
                        }
                    }
                    if taus.is_empty() {
                        continue;
                    }
                    let spec_path = path.child(spec_idx);
                    let spec = self.sketch.get(&spec_path)?;
                    let found: Vec<Option<Fault>> =
                        taus.iter().map(|t| self.visit(&spec_path, &spec, Some(t))).collect();
                    if found.iter().all(Option::is_some) {
                        let found: Vec<Fault> = found.into_iter().flatten().collect();
                        if found.iter().all(|f| f.path == found[0].path) {
                            let best = found.iter().map(|f| f.best_score).fold(0.0, f64::max);
                            let mut fault = found[0].clone();
                            fault.best_score = best;
                            return Some(fault);
                        }
                        if self.repairable(&spec_path) {
                            let best = taus.iter().map(|t| self.best(&spec, Some(t))).fold(0.0, f64::max);
                            return Some(Fault {
                                path: spec_path,
                                term: spec,
                                best_score: best,
                            });
                        }
                    }
                }
            }
            SketchTerm::Spec(spec) => {
                for idx in sub_specifier_indices(spec) {
                    let sub_path = path.child(idx);
                    let sub = self.sketch.get(&sub_path)?;
                    if let Some(fault) = self.visit(&sub_path, &sub, tau) {
                        return Some(fault);
                    }
                }
            }
            SketchTerm::Value(_) => {}
        }
        let best = self.best(term, tau);
        if best < self.completer.config().fault_threshold && self.repairable(path) {
            return Some(Fault {
                path: path.clone(),
                term: term.clone(),
                best_score: best,
            });
        }
        None
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {} (best {:.3})", self.term, self.path, self.best_score)
    }
}

#[cfg(test)]
mod tests;
