//! Query sketches: relational terms whose table and column names are holes,
//! each optionally carrying a natural-language hint.

mod parse;
mod print;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{AggFunc, CmpOp, Value};

pub use parse::{parse_sketch, ParseError};
pub use print::{print_sketch, print_spec};

/// Hint attached to a hole. The empty hint is written `ε` in prose and is
/// simply absent in text.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hint(Option<String>);

impl Hint {
    pub fn new(text: &str) -> Self {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            Hint(None)
        } else {
            Hint(Some(trimmed.to_string()))
        }
    }

    pub fn none() -> Self {
        Hint(None)
    }

    pub fn text(&self) -> Option<&str> {
        self.0.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    /// Lowercased form used for matching.
    pub fn key(&self) -> Option<String> {
        self.0.as_ref().map(|s| s.to_lowercase())
    }
}

impl From<&str> for Hint {
    fn from(s: &str) -> Self {
        Hint::new(s)
    }
}

/// Relation sketches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SketchRel {
    Table(Hint),
    Project(SketchSpec, Box<SketchRel>),
    Select(SketchSpec, Box<SketchRel>),
    Join {
        left: Box<SketchRel>,
        left_col: Hint,
        right_col: Hint,
        right: Box<SketchRel>,
    },
}

/// Specifier sketches: column lists and predicates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SketchSpec {
    Col(Hint),
    Agg(AggFunc, Hint),
    /// `f(?target) BY ?key`
    Group(AggFunc, Hint, Hint),
    List(Box<SketchSpec>, Box<SketchSpec>),
    Atom(Hint, CmpOp, Operand),
    And(Box<SketchSpec>, Box<SketchSpec>),
    Or(Box<SketchSpec>, Box<SketchSpec>),
    Not(Box<SketchSpec>),
}

/// Right-hand side of a predicate atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operand {
    Rel(Box<SketchRel>),
    Col(Hint),
    Value(Value),
}

/// Any subterm addressable by a [`SketchPath`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SketchTerm {
    Rel(SketchRel),
    Spec(SketchSpec),
    Value(Value),
}

impl SketchTerm {
    pub fn is_relation(&self) -> bool {
        matches!(self, SketchTerm::Rel(_))
    }
}

impl fmt::Display for SketchTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SketchTerm::Rel(r) => f.write_str(&print_sketch(r)),
            SketchTerm::Spec(s) => f.write_str(&print_spec(s)),
            SketchTerm::Value(v) => write!(f, "{}", v),
        }
    }
}

impl fmt::Display for SketchRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_sketch(self))
    }
}

impl fmt::Display for SketchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_spec(self))
    }
}

/// Child indices from the root to a subterm.
///
/// Projection and selection: 0 is the specifier, 1 the input. Join: 0 left
/// input, 1 left column hole, 2 right column hole, 3 right input. Group: 0 is
/// the aggregate `f(?h1)`, 1 the key hole. Aggregate: 0 is its column hole.
/// Lists and binary connectives: 0 and 1. Negation: 0. Atom: 0 the column
/// hole, 1 the operand.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SketchPath(pub Vec<usize>);

impl SketchPath {
    pub fn root() -> Self {
        SketchPath(Vec::new())
    }

    pub fn child(&self, index: usize) -> Self {
        let mut v = self.0.clone();
        v.push(index);
        SketchPath(v)
    }

    pub fn is_prefix_of(&self, other: &SketchPath) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for SketchPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("/")?;
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{}", idx)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathError {
    NoSuchPath(SketchPath),
    SlotMismatch { path: SketchPath, replacement: String },
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathError::NoSuchPath(p) => write!(f, "no subterm at {}", p),
            PathError::SlotMismatch { path, replacement } => {
                write!(f, "`{}` cannot be placed at {}", replacement, path)
            }
        }
    }
}

impl core::error::Error for PathError {}

/// What may occupy a child position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Rel,
    ColumnList,
    Predicate,
    ColHole,
    Aggregate,
    Operand,
}

fn fits(slot: Slot, term: &SketchTerm) -> bool {
    match (slot, term) {
        (Slot::Rel, SketchTerm::Rel(_)) => true,
        (Slot::ColumnList, SketchTerm::Spec(s)) => s.is_column_list(),
        (Slot::Predicate, SketchTerm::Spec(s)) => s.is_predicate(),
        (Slot::ColHole, SketchTerm::Spec(SketchSpec::Col(_))) => true,
        (Slot::Aggregate, SketchTerm::Spec(SketchSpec::Agg(..))) => true,
        (Slot::Operand, SketchTerm::Rel(_) | SketchTerm::Value(_)) => true,
        (Slot::Operand, SketchTerm::Spec(SketchSpec::Col(_))) => true,
        _ => false,
    }
}

impl SketchSpec {
    pub fn is_column_list(&self) -> bool {
        matches!(
            self,
            SketchSpec::Col(_) | SketchSpec::Agg(..) | SketchSpec::Group(..) | SketchSpec::List(..)
        )
    }

    pub fn is_predicate(&self) -> bool {
        !self.is_column_list()
    }

    pub fn list(a: SketchSpec, b: SketchSpec) -> Self {
        SketchSpec::List(Box::new(a), Box::new(b))
    }

    pub fn and(a: SketchSpec, b: SketchSpec) -> Self {
        SketchSpec::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: SketchSpec, b: SketchSpec) -> Self {
        SketchSpec::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: SketchSpec) -> Self {
        SketchSpec::Not(Box::new(a))
    }

    pub fn atom(hint: impl Into<Hint>, op: CmpOp, operand: Operand) -> Self {
        SketchSpec::Atom(hint.into(), op, operand)
    }
}

impl SketchRel {
    pub fn table(hint: impl Into<Hint>) -> Self {
        SketchRel::Table(hint.into())
    }

    pub fn project(spec: SketchSpec, input: SketchRel) -> Self {
        SketchRel::Project(spec, Box::new(input))
    }

    pub fn select(spec: SketchSpec, input: SketchRel) -> Self {
        SketchRel::Select(spec, Box::new(input))
    }

    pub fn join(left: SketchRel, left_col: Hint, right_col: Hint, right: SketchRel) -> Self {
        SketchRel::Join {
            left: Box::new(left),
            left_col,
            right_col,
            right: Box::new(right),
        }
    }

    /// The subterm at `path`, if any.
    pub fn get(&self, path: &SketchPath) -> Option<SketchTerm> {
        let mut current = SketchTerm::Rel(self.clone());
        for &idx in &path.0 {
            current = children(&current).into_iter().nth(idx)?.1;
        }
        Some(current)
    }

    /// Replaces the subterm at `path`, checking that the replacement is
    /// allowed in that position.
    pub fn replace_at(&self, path: &SketchPath, replacement: SketchTerm) -> Result<SketchRel, PathError> {
        if path.0.is_empty() {
            return match replacement {
                SketchTerm::Rel(r) => Ok(r),
                other => Err(PathError::SlotMismatch {
                    path: path.clone(),
                    replacement: other.to_string(),
                }),
            };
        }
        let root = SketchTerm::Rel(self.clone());
        match replace_in(&root, &path.0, replacement, path)? {
            SketchTerm::Rel(r) => Ok(r),
            _ => Err(PathError::NoSuchPath(path.clone())),
        }
    }

    /// Every path in the term, in pre-order.
    pub fn paths(&self) -> Vec<SketchPath> {
        let mut out = Vec::new();
        collect_paths(&SketchTerm::Rel(self.clone()), SketchPath::root(), &mut out);
        out
    }

    /// Number of holes (table and column) in the sketch.
    pub fn hole_count(&self) -> usize {
        fn count(term: &SketchTerm) -> usize {
            let own = match term {
                SketchTerm::Rel(SketchRel::Table(_)) | SketchTerm::Spec(SketchSpec::Col(_)) => 1,
                _ => 0,
            };
            own + children(term).iter().map(|(_, c)| count(c)).sum::<usize>()
        }
        count(&SketchTerm::Rel(self.clone()))
    }
}

fn collect_paths(term: &SketchTerm, path: SketchPath, out: &mut Vec<SketchPath>) {
    out.push(path.clone());
    for (i, (_, child)) in children(term).iter().enumerate() {
        collect_paths(child, path.child(i), out);
    }
}

/// Children of a subterm with the slot each occupies.
fn children(term: &SketchTerm) -> Vec<(Slot, SketchTerm)> {
    match term {
        SketchTerm::Rel(rel) => match rel {
            SketchRel::Table(_) => vec![],
            SketchRel::Project(spec, input) => vec![
                (Slot::ColumnList, SketchTerm::Spec(spec.clone())),
                (Slot::Rel, SketchTerm::Rel((**input).clone())),
            ],
            SketchRel::Select(spec, input) => vec![
                (Slot::Predicate, SketchTerm::Spec(spec.clone())),
                (Slot::Rel, SketchTerm::Rel((**input).clone())),
            ],
            SketchRel::Join {
                left,
                left_col,
                right_col,
                right,
            } => vec![
                (Slot::Rel, SketchTerm::Rel((**left).clone())),
                (Slot::ColHole, SketchTerm::Spec(SketchSpec::Col(left_col.clone()))),
                (Slot::ColHole, SketchTerm::Spec(SketchSpec::Col(right_col.clone()))),
                (Slot::Rel, SketchTerm::Rel((**right).clone())),
            ],
        },
        SketchTerm::Spec(spec) => match spec {
            SketchSpec::Col(_) => vec![],
            SketchSpec::Agg(_, h) => vec![(Slot::ColHole, SketchTerm::Spec(SketchSpec::Col(h.clone())))],
            SketchSpec::Group(f, target, key) => vec![
                (Slot::Aggregate, SketchTerm::Spec(SketchSpec::Agg(*f, target.clone()))),
                (Slot::ColHole, SketchTerm::Spec(SketchSpec::Col(key.clone()))),
            ],
            SketchSpec::List(a, b) => vec![
                (Slot::ColumnList, SketchTerm::Spec((**a).clone())),
                (Slot::ColumnList, SketchTerm::Spec((**b).clone())),
            ],
            SketchSpec::Atom(h, _, operand) => vec![
                (Slot::ColHole, SketchTerm::Spec(SketchSpec::Col(h.clone()))),
                (Slot::Operand, operand_term(operand)),
            ],
            SketchSpec::And(a, b) | SketchSpec::Or(a, b) => vec![
                (Slot::Predicate, SketchTerm::Spec((**a).clone())),
                (Slot::Predicate, SketchTerm::Spec((**b).clone())),
            ],
            SketchSpec::Not(a) => vec![(Slot::Predicate, SketchTerm::Spec((**a).clone()))],
        },
        SketchTerm::Value(_) => vec![],
    }
}

pub(crate) fn operand_term(operand: &Operand) -> SketchTerm {
    match operand {
        Operand::Rel(r) => SketchTerm::Rel((**r).clone()),
        Operand::Col(h) => SketchTerm::Spec(SketchSpec::Col(h.clone())),
        Operand::Value(v) => SketchTerm::Value(v.clone()),
    }
}

fn term_operand(term: SketchTerm) -> Option<Operand> {
    match term {
        SketchTerm::Rel(r) => Some(Operand::Rel(Box::new(r))),
        SketchTerm::Spec(SketchSpec::Col(h)) => Some(Operand::Col(h)),
        SketchTerm::Value(v) => Some(Operand::Value(v)),
        _ => None,
    }
}

fn col_hint(term: SketchTerm) -> Hint {
    match term {
        SketchTerm::Spec(SketchSpec::Col(h)) => h,
        _ => Hint::none(),
    }
}

fn replace_in(
    term: &SketchTerm,
    rest: &[usize],
    replacement: SketchTerm,
    full: &SketchPath,
) -> Result<SketchTerm, PathError> {
    let Some((&idx, tail)) = rest.split_first() else {
        return Ok(replacement);
    };
    let mut kids = children(term);
    let Some((slot, child)) = kids.get(idx).cloned() else {
        return Err(PathError::NoSuchPath(full.clone()));
    };
    let new_child = replace_in(&child, tail, replacement, full)?;
    if !fits(slot, &new_child) {
        return Err(PathError::SlotMismatch {
            path: full.clone(),
            replacement: new_child.to_string(),
        });
    }
    kids[idx].1 = new_child;
    let mut it = kids.into_iter().map(|(_, t)| t);
    let mut next = || it.next().expect("arity preserved");
    let rel = |t: SketchTerm| match t {
        SketchTerm::Rel(r) => Box::new(r),
        _ => unreachable!("slot checked"),
    };
    let spec = |t: SketchTerm| match t {
        SketchTerm::Spec(s) => s,
        _ => unreachable!("slot checked"),
    };
    Ok(match term {
        SketchTerm::Rel(r) => SketchTerm::Rel(match r {
            SketchRel::Table(_) => unreachable!("leaf"),
            SketchRel::Project(..) => {
                let s = spec(next());
                SketchRel::Project(s, rel(next()))
            }
            SketchRel::Select(..) => {
                let s = spec(next());
                SketchRel::Select(s, rel(next()))
            }
            SketchRel::Join { .. } => {
                let left = rel(next());
                let left_col = col_hint(next());
                let right_col = col_hint(next());
                SketchRel::Join {
                    left,
                    left_col,
                    right_col,
                    right: rel(next()),
                }
            }
        }),
        SketchTerm::Spec(s) => SketchTerm::Spec(match s {
            SketchSpec::Col(_) => unreachable!("leaf"),
            SketchSpec::Agg(f, _) => SketchSpec::Agg(*f, col_hint(next())),
            SketchSpec::Group(..) => {
                let (f, target) = match spec(next()) {
                    SketchSpec::Agg(f, h) => (f, h),
                    _ => unreachable!("slot checked"),
                };
                SketchSpec::Group(f, target, col_hint(next()))
            }
            SketchSpec::List(..) => {
                let a = spec(next());
                SketchSpec::list(a, spec(next()))
            }
            SketchSpec::Atom(_, op, _) => {
                let h = col_hint(next());
                let operand = term_operand(next()).expect("slot checked");
                SketchSpec::Atom(h, *op, operand)
            }
            SketchSpec::And(..) => {
                let a = spec(next());
                SketchSpec::and(a, spec(next()))
            }
            SketchSpec::Or(..) => {
                let a = spec(next());
                SketchSpec::or(a, spec(next()))
            }
            SketchSpec::Not(_) => SketchSpec::not(spec(next())),
        }),
        SketchTerm::Value(_) => unreachable!("leaf"),
    })
}

/// Pairs of (input relation, specifier instantiated under it), with the
/// child index of each. Empty for a table hole.
pub fn sub_relation_indices(rel: &SketchRel) -> Vec<(usize, usize)> {
    match rel {
        SketchRel::Table(_) => vec![],
        SketchRel::Project(..) | SketchRel::Select(..) => vec![(1, 0)],
        SketchRel::Join { .. } => vec![(0, 1), (3, 2)],
    }
}

/// Child indices of the sub-specifiers of a specifier.
pub fn sub_specifier_indices(spec: &SketchSpec) -> Vec<usize> {
    match spec {
        SketchSpec::Col(_) | SketchSpec::Agg(..) => vec![],
        SketchSpec::Not(_) => vec![0],
        _ => vec![0, 1],
    }
}

/// `Π_κ(χ) ↦ [(χ, κ)]`, `σ_ψ(χ) ↦ [(χ, ψ)]`,
/// `χ1 ⋈ χ2 on ?h1 = ?h2 ↦ [(χ1, ?h1), (χ2, ?h2)]`.
pub fn sub_relations(rel: &SketchRel) -> Vec<(SketchRel, SketchSpec)> {
    let kids = children(&SketchTerm::Rel(rel.clone()));
    sub_relation_indices(rel)
        .into_iter()
        .map(|(r, s)| match (&kids[r].1, &kids[s].1) {
            (SketchTerm::Rel(r), SketchTerm::Spec(s)) => (r.clone(), s.clone()),
            _ => unreachable!("relation children are typed"),
        })
        .collect()
}

/// Direct sub-specifiers. An atom's operand may be a relation or a value,
/// so the result is a list of general subterms.
pub fn sub_specifiers(spec: &SketchSpec) -> Vec<SketchTerm> {
    let kids = children(&SketchTerm::Spec(spec.clone()));
    sub_specifier_indices(spec)
        .into_iter()
        .map(|i| kids[i].1.clone())
        .collect()
}
