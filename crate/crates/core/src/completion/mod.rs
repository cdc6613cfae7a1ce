//! Sketch completion: fills holes with schema names, scoring each completion
//! by hint similarity, types and database contents.
//!
//! A candidate's score is the geometric mean of all evidence factors gathered
//! while building it: one per hinted hole, one per literal, one per predicate
//! atom (content witness) and one per join (key relationship). Hintless holes
//! contribute no factor; a candidate with no factor at all scores the neutral
//! similarity. Because the number of factors is fixed by the sketch, a partial
//! candidate's product bounds every completion built from it, which is what
//! pruning relies on.

mod rules;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use crate::algebra::{
    emit_sql, evaluate, type_of, Attr, CmpOp, Expr, Predicate, QueryTerm, RecordType, SpecItem, Value,
};
use crate::catalog::Catalog;
use crate::config::{Config, JoinScoring};
use crate::similarity::SimilarityProvider;
use crate::sketch::{Operand, SketchRel, SketchSpec, SketchTerm};

/// `p1 ⊗ ... ⊗ pn`: the geometric mean. `None` for an empty list.
pub fn combine(scores: &[f64]) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    let product: f64 = scores.iter().product();
    Some(libm::pow(product, 1.0 / scores.len() as f64).clamp(0.0, 1.0))
}

/// Content score of the atom `column op rhs`: high when the stored data
/// holds a witness. Scalar subqueries are evaluated first; a NULL result has
/// no witness.
pub fn p_pred(catalog: &Catalog, cfg: &Config, column: &Attr, op: CmpOp, rhs: &Expr) -> f64 {
    if cfg.no_data {
        return 1.0;
    }
    if !column.is_base() {
        return 0.5;
    }
    let witnessed = match rhs {
        Expr::Value(v) => catalog.column_satisfies(column, op, v),
        Expr::Column(other) if other.is_base() => catalog.columns_satisfy(column, op, other),
        Expr::Column(_) => return 0.5,
        Expr::Query(q) => match evaluate(q, catalog).ok().and_then(|t| t.scalar().cloned()) {
            Some(v) => catalog.column_satisfies(column, op, &v),
            None => false,
        },
    };
    if witnessed {
        1.0 - cfg.pred_epsilon
    } else {
        cfg.pred_epsilon
    }
}

/// Score of joining on `left = right`.
pub fn p_join(catalog: &Catalog, cfg: &Config, left: &Attr, right: &Attr) -> f64 {
    let lo = cfg.join_epsilon;
    match cfg.join_scoring {
        JoinScoring::ForeignKey => {
            if catalog.is_fk_pair(left, right) {
                1.0 - lo
            } else {
                lo
            }
        }
        JoinScoring::ContentOverlap if cfg.no_data => 1.0,
        JoinScoring::ContentOverlap => catalog.content_overlap(left, right).clamp(lo, 1.0 - lo),
    }
}

/// A completed (sub)term.
#[derive(Debug, Clone, PartialEq)]
pub enum Fragment {
    Relation(QueryTerm),
    Items(Vec<SpecItem>),
    Predicate(Predicate),
    Column(Attr),
    Value(Value),
}

impl Fragment {
    pub fn as_query(&self) -> Option<&QueryTerm> {
        match self {
            Fragment::Relation(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fragment::Relation(q) => f.write_str(&emit_sql(q)),
            Fragment::Items(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", item)?;
                }
                Ok(())
            }
            Fragment::Predicate(p) => write!(f, "{}", p),
            Fragment::Column(a) => write!(f, "{}", a),
            Fragment::Value(v) => write!(f, "{}", v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub fragment: Fragment,
    /// Record type of the fragment; empty for predicates.
    pub ty: RecordType,
    /// Evidence factors in rule order; their geometric mean is `score`.
    pub factors: Vec<f64>,
    pub score: f64,
}

impl ScoredCandidate {
    pub fn query(&self) -> Option<&QueryTerm> {
        self.fragment.as_query()
    }

    /// Text used to break score ties: emitted SQL for relations.
    pub fn sort_key(&self) -> String {
        self.fragment.to_string()
    }
}

/// Orders candidates by score, then shorter text, then text.
pub fn rank(candidates: &mut [ScoredCandidate]) {
    let mut keyed: Vec<(String, usize)> = candidates.iter().enumerate().map(|(i, c)| (c.sort_key(), i)).collect();
    keyed.sort_by(|(ka, a), (kb, b)| {
        candidates[*b]
            .score
            .total_cmp(&candidates[*a].score)
            .then(ka.len().cmp(&kb.len()))
            .then_with(|| ka.cmp(kb))
    });
    let order: Vec<ScoredCandidate> = keyed.iter().map(|(_, i)| candidates[*i].clone()).collect();
    candidates.clone_from_slice(&order);
}

/// Number of score factors any completion of `rel` will carry.
pub fn factor_count(rel: &SketchRel) -> usize {
    match rel {
        SketchRel::Table(h) => usize::from(!h.is_empty()),
        SketchRel::Project(spec, input) | SketchRel::Select(spec, input) => {
            spec_factor_count(spec) + factor_count(input)
        }
        SketchRel::Join {
            left,
            left_col,
            right_col,
            right,
        } => {
            factor_count(left)
                + factor_count(right)
                + usize::from(!left_col.is_empty())
                + usize::from(!right_col.is_empty())
                + 1
        }
    }
}

pub fn spec_factor_count(spec: &SketchSpec) -> usize {
    match spec {
        SketchSpec::Col(h) | SketchSpec::Agg(_, h) => usize::from(!h.is_empty()),
        SketchSpec::Group(_, a, b) => usize::from(!a.is_empty()) + usize::from(!b.is_empty()),
        SketchSpec::List(a, b) | SketchSpec::And(a, b) | SketchSpec::Or(a, b) => {
            spec_factor_count(a) + spec_factor_count(b)
        }
        SketchSpec::Not(a) => spec_factor_count(a),
        SketchSpec::Atom(h, _, operand) => {
            let rhs = match operand {
                Operand::Col(h) => usize::from(!h.is_empty()),
                Operand::Value(_) => 1,
                Operand::Rel(r) => factor_count(r),
            };
            usize::from(!h.is_empty()) + rhs + 1
        }
    }
}

pub fn term_factor_count(term: &SketchTerm) -> usize {
    match term {
        SketchTerm::Rel(r) => factor_count(r),
        SketchTerm::Spec(s) => spec_factor_count(s),
        SketchTerm::Value(_) => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum CacheKey {
    Rel(SketchRel, Option<usize>),
    Spec(SketchSpec, RecordType, Option<usize>),
}

/// Internal candidate: the fragment with its type and factor list.
#[derive(Debug, Clone)]
pub(crate) struct Partial {
    fragment: Fragment,
    ty: RecordType,
    factors: Vec<f64>,
}

/// Instantiates sketches against one catalog, memoizing every subterm.
///
/// A `Completer` is meant to serve one synthesis run; it is not shared
/// between threads.
pub struct Completer<'a> {
    catalog: &'a Catalog,
    sim: &'a SimilarityProvider,
    cfg: &'a Config,
    cache: RefCell<BTreeMap<CacheKey, Rc<Vec<Partial>>>>,
    notes: RefCell<BTreeSet<String>>,
}

impl<'a> Completer<'a> {
    pub fn new(catalog: &'a Catalog, sim: &'a SimilarityProvider, cfg: &'a Config) -> Self {
        Completer {
            catalog,
            sim,
            cfg,
            cache: RefCell::new(BTreeMap::new()),
            notes: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn catalog(&self) -> &Catalog {
        self.catalog
    }

    pub fn config(&self) -> &Config {
        self.cfg
    }

    pub fn similarity(&self) -> &SimilarityProvider {
        self.sim
    }

    /// Diagnostics gathered so far (truncated hole lists, dropped terms).
    pub fn notes(&self) -> Vec<String> {
        self.notes.borrow().iter().cloned().collect()
    }

    pub(crate) fn note(&self, text: String) {
        self.notes.borrow_mut().insert(text);
    }

    fn score_of(&self, factors: &[f64]) -> f64 {
        combine(factors).unwrap_or(self.cfg.neutral_score)
    }

    /// All completions of a relation sketch, best first.
    ///
    /// Partial completions that cannot reach the pruning threshold are
    /// abandoned. If that leaves fewer than `results` candidates the sketch is
    /// re-enumerated keeping everything with a non-zero score, so the top of
    /// the list is always exact. A completion with a zero factor is never a
    /// candidate.
    pub fn instantiate_rel(&self, rel: &SketchRel) -> Vec<ScoredCandidate> {
        let n = factor_count(rel);
        let pruned = self.rel(rel, Some(n));
        self.finish(pruned, || self.rel(rel, None))
    }

    /// All completions of a specifier under the parent record type `tau`.
    pub fn instantiate_spec(&self, spec: &SketchSpec, tau: &RecordType) -> Vec<ScoredCandidate> {
        let n = spec_factor_count(spec);
        let pruned = self.spec(spec, tau, Some(n));
        self.finish(pruned, || self.spec(spec, tau, None))
    }

    /// Completions of any subterm; specifiers and values need `tau`.
    pub fn instantiate_term(&self, term: &SketchTerm, tau: Option<&RecordType>) -> Vec<ScoredCandidate> {
        match (term, tau) {
            (SketchTerm::Rel(r), _) => self.instantiate_rel(r),
            (SketchTerm::Spec(s), Some(t)) => self.instantiate_spec(s, t),
            (SketchTerm::Value(v), Some(t)) => {
                let mut out: Vec<ScoredCandidate> = self.lift(v, t).into_iter().map(|p| self.scored(p)).collect();
                rank(&mut out);
                out
            }
            _ => Vec::new(),
        }
    }

    /// Every completion with a non-zero score, without pruning.
    pub fn instantiate_exhaustive(&self, rel: &SketchRel) -> Vec<ScoredCandidate> {
        let all: Vec<Partial> = self
            .rel(rel, None)
            .iter()
            .filter(|p| p.factors.iter().all(|f| *f > 0.0))
            .cloned()
            .collect();
        self.finish_all(&all)
    }

    fn finish(&self, pruned: Rc<Vec<Partial>>, unpruned: impl FnOnce() -> Rc<Vec<Partial>>) -> Vec<ScoredCandidate> {
        let threshold = self.cfg.prune_threshold;
        let kept: Vec<Partial> = pruned
            .iter()
            .filter(|p| self.score_of(&p.factors) >= threshold)
            .cloned()
            .collect();
        let kept = self.finish_all(&kept);
        if kept.len() >= self.cfg.results {
            return kept;
        }
        let all: Vec<Partial> = unpruned()
            .iter()
            .filter(|p| p.factors.iter().all(|f| *f > 0.0))
            .cloned()
            .collect();
        self.finish_all(&all)
    }

    fn finish_all(&self, partials: &[Partial]) -> Vec<ScoredCandidate> {
        let mut out = Vec::with_capacity(partials.len());
        for p in partials {
            if self.cfg.no_type {
                if let Fragment::Relation(q) = &p.fragment {
                    if let Err(e) = type_of(q, self.catalog) {
                        self.note(alloc::format!("dropped ill-typed completion: {}", e));
                        continue;
                    }
                }
            }
            out.push(self.scored(p.clone()));
        }
        rank(&mut out);
        out
    }

    fn scored(&self, p: Partial) -> ScoredCandidate {
        let score = self.score_of(&p.factors);
        ScoredCandidate {
            fragment: p.fragment,
            ty: p.ty,
            factors: p.factors,
            score,
        }
    }

    /// Could a partial with these factors still reach the threshold when the
    /// full completion carries `n` factors? Without `n`, only a zero factor
    /// rules a partial out.
    fn viable(&self, factors: &[f64], n: Option<usize>) -> bool {
        let Some(n) = n else {
            return factors.iter().all(|f| *f > 0.0);
        };
        if n == 0 {
            return self.cfg.neutral_score >= self.cfg.prune_threshold;
        }
        let product: f64 = factors.iter().product();
        libm::pow(product, 1.0 / n as f64) >= self.cfg.prune_threshold
    }

    pub(crate) fn rel(&self, rel: &SketchRel, n: Option<usize>) -> Rc<Vec<Partial>> {
        let key = CacheKey::Rel(rel.clone(), n);
        if let Some(hit) = self.cache.borrow().get(&key) {
            return hit.clone();
        }
        let out = Rc::new(rules::relation(self, rel, n));
        self.cache.borrow_mut().insert(key, out.clone());
        out
    }

    pub(crate) fn spec(&self, spec: &SketchSpec, tau: &RecordType, n: Option<usize>) -> Rc<Vec<Partial>> {
        let key = CacheKey::Spec(spec.clone(), tau.clone(), n);
        if let Some(hit) = self.cache.borrow().get(&key) {
            return hit.clone();
        }
        let out = Rc::new(rules::specifier(self, spec, tau, n));
        self.cache.borrow_mut().insert(key, out.clone());
        out
    }

    pub(crate) fn lift(&self, value: &Value, tau: &RecordType) -> Vec<Partial> {
        rules::lift(self, value, tau)
    }
}
