//! One function per sketch form. Each returns every completion whose own
//! factors still allow the full term to reach the pruning threshold.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{p_join, p_pred, Completer, Fragment, Partial};
use crate::algebra::{
    evaluate, AggFunc, Attr, BaseType, CmpOp, Expr, Field, Predicate, QueryTerm, RecordType, SpecItem, Value,
};
use crate::sketch::{Hint, Operand, SketchRel, SketchSpec};

fn concat(parts: &[&[f64]]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn sort_and_cap(cx: &Completer<'_>, mut out: Vec<Partial>, what: &str) -> Vec<Partial> {
    out.sort_by(|a, b| {
        let sa = cx.score_of(&a.factors);
        let sb = cx.score_of(&b.factors);
        sb.total_cmp(&sa)
            .then_with(|| a.fragment.to_string().cmp(&b.fragment.to_string()))
    });
    let cap = cx.cfg.candidate_cap;
    if out.len() > cap {
        cx.note(format!("{} candidates for {} truncated to {}", out.len(), what, cap));
        out.truncate(cap);
    }
    out
}

/// Collects the candidates of a composite subterm, keeping only the best
/// `subterm_cap` so that nested cross products stay bounded.
struct Capped<'c, 'a> {
    cx: &'c Completer<'a>,
    out: Vec<Partial>,
    dropped: usize,
    /// Score of the last candidate kept by the latest trim.
    floor: Option<f64>,
}

impl<'c, 'a> Capped<'c, 'a> {
    fn new(cx: &'c Completer<'a>) -> Self {
        Capped {
            cx,
            out: Vec::new(),
            dropped: 0,
            floor: None,
        }
    }

    /// False when a candidate with these factors could not survive a trim.
    fn admits(&mut self, factors: &[f64]) -> bool {
        match self.floor {
            Some(floor) if self.cx.score_of(factors) < floor => {
                self.dropped += 1;
                false
            }
            _ => true,
        }
    }

    fn push(&mut self, p: Partial) {
        self.out.push(p);
        if self.out.len() >= self.cx.cfg.subterm_cap.max(1).saturating_mul(2) {
            self.trim();
        }
    }

    /// Keeps the best `subterm_cap` in final ranking order.
    fn trim(&mut self) {
        let cap = self.cx.cfg.subterm_cap.max(1);
        if self.out.len() <= cap {
            return;
        }
        let mut keyed: Vec<(f64, alloc::string::String, Partial)> = self
            .out
            .drain(..)
            .map(|p| (self.cx.score_of(&p.factors), p.fragment.to_string(), p))
            .collect();
        keyed.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(a.1.len().cmp(&b.1.len()))
                .then_with(|| a.1.cmp(&b.1))
        });
        self.dropped += keyed.len() - cap;
        keyed.truncate(cap);
        self.floor = keyed.last().map(|k| k.0);
        self.out = keyed.into_iter().map(|(_, _, p)| p).collect();
    }

    fn finish(mut self, what: &str) -> Vec<Partial> {
        self.trim();
        if self.dropped > 0 {
            self.cx.note(format!(
                "{} candidates for {} dropped beyond {}",
                self.dropped, what, self.cx.cfg.subterm_cap
            ));
        }
        self.out
    }
}

pub(super) fn relation(cx: &Completer<'_>, rel: &SketchRel, n: Option<usize>) -> Vec<Partial> {
    match rel {
        SketchRel::Table(hint) => table_hole(cx, hint, n),
        SketchRel::Project(spec, input) => {
            let mut out = Capped::new(cx);
            for child in cx.rel(input, n).iter() {
                for items in cx.spec(spec, &child.ty, n).iter() {
                    let Fragment::Items(list) = &items.fragment else {
                        continue;
                    };
                    let factors = concat(&[&child.factors, &items.factors]);
                    if !cx.viable(&factors, n) || !out.admits(&factors) {
                        continue;
                    }
                    let Fragment::Relation(q) = &child.fragment else {
                        continue;
                    };
                    out.push(Partial {
                        fragment: Fragment::Relation(QueryTerm::project(list.clone(), q.clone())),
                        ty: items.ty.clone(),
                        factors,
                    });
                }
            }
            out.finish("a projection")
        }
        SketchRel::Select(spec, input) => {
            let mut out = Capped::new(cx);
            for child in cx.rel(input, n).iter() {
                let Fragment::Relation(q) = &child.fragment else {
                    continue;
                };
                for pred in cx.spec(spec, &child.ty, n).iter() {
                    let Fragment::Predicate(p) = &pred.fragment else {
                        continue;
                    };
                    let factors = concat(&[&child.factors, &pred.factors]);
                    if !cx.viable(&factors, n) || !out.admits(&factors) {
                        continue;
                    }
                    out.push(Partial {
                        fragment: Fragment::Relation(QueryTerm::select(p.clone(), q.clone())),
                        ty: child.ty.clone(),
                        factors,
                    });
                }
            }
            out.finish("a selection")
        }
        SketchRel::Join {
            left,
            left_col,
            right_col,
            right,
        } => join(cx, left, left_col, right_col, right, n),
    }
}

fn table_hole(cx: &Completer<'_>, hint: &Hint, n: Option<usize>) -> Vec<Partial> {
    let mut out = Vec::new();
    for table in cx.catalog.tables() {
        let factors = if hint.is_empty() {
            Vec::new()
        } else {
            vec![cx.sim.sim(hint, table.name())]
        };
        if !cx.viable(&factors, n) {
            continue;
        }
        out.push(Partial {
            fragment: Fragment::Relation(QueryTerm::table(table.name())),
            ty: table.record_type().clone(),
            factors,
        });
    }
    sort_and_cap(cx, out, "a table hole")
}

fn join(
    cx: &Completer<'_>,
    left: &SketchRel,
    left_col: &Hint,
    right_col: &Hint,
    right: &SketchRel,
    n: Option<usize>,
) -> Vec<Partial> {
    let lefts = cx.rel(left, n);
    let rights = cx.rel(right, n);
    let right_cols: Vec<_> = rights.iter().map(|r| column_hole(cx, right_col, &r.ty, n)).collect();
    let mut out = Capped::new(cx);
    for l in lefts.iter() {
        let Fragment::Relation(lq) = &l.fragment else {
            continue;
        };
        let mut left_cols = None;
        for (r, r_cols) in rights.iter().zip(&right_cols) {
            let Fragment::Relation(rq) = &r.fragment else {
                continue;
            };
            let Some(ty) = l.ty.union(&r.ty) else {
                continue;
            };
            let inputs = concat(&[&l.factors, &r.factors]);
            if !cx.viable(&inputs, n) {
                continue;
            }
            let left_cols = left_cols.get_or_insert_with(|| column_hole(cx, left_col, &l.ty, n));
            for (a, a_ty, a_factors) in left_cols.iter() {
                for (b, b_ty, b_factors) in r_cols {
                    if a_ty != b_ty && !cx.cfg.no_type {
                        continue;
                    }
                    let pj = p_join(cx.catalog, cx.cfg, a, b);
                    let factors = concat(&[&inputs, a_factors, b_factors, &[pj]]);
                    if !cx.viable(&factors, n) || !out.admits(&factors) {
                        continue;
                    }
                    out.push(Partial {
                        fragment: Fragment::Relation(QueryTerm::join(lq.clone(), a.clone(), b.clone(), rq.clone())),
                        ty: ty.clone(),
                        factors,
                    });
                }
            }
        }
    }
    out.finish("a join")
}

fn column_name(attr: &Attr) -> (alloc::string::String, alloc::string::String) {
    match attr {
        Attr::Column { table, column } => (table.clone(), column.clone()),
        Attr::Aggregate { func, of } => {
            let (table, column) = of.base();
            (table.into(), format!("{} {}", func.name(), column))
        }
    }
}

/// Candidates for a column hole as `(attribute, type, factors)`.
pub(super) fn column_hole(
    cx: &Completer<'_>,
    hint: &Hint,
    tau: &RecordType,
    n: Option<usize>,
) -> Vec<(Attr, BaseType, Vec<f64>)> {
    let mut fields: Vec<Field> = tau.fields().to_vec();
    if cx.cfg.no_type {
        for table in cx.catalog.tables() {
            for field in table.record_type().fields() {
                if tau.type_of(&field.attr).is_none() {
                    fields.push(field.clone());
                }
            }
        }
    }
    let mut out: Vec<(Attr, BaseType, Vec<f64>, f64)> = Vec::new();
    for field in fields {
        let factors = if hint.is_empty() {
            Vec::new()
        } else {
            let (table, column) = column_name(&field.attr);
            vec![cx.sim.column_score(hint, &table, &column, cx.cfg.table_context)]
        };
        if !cx.viable(&factors, n) {
            continue;
        }
        let score = cx.score_of(&factors);
        out.push((field.attr, field.ty, factors, score));
    }
    out.sort_by(|a, b| b.3.total_cmp(&a.3).then_with(|| a.0.cmp(&b.0)));
    let cap = cx.cfg.candidate_cap;
    if out.len() > cap {
        cx.note(format!(
            "{} candidates for a column hole truncated to {}",
            out.len(),
            cap
        ));
        out.truncate(cap);
    }
    out.into_iter().map(|(a, t, f, _)| (a, t, f)).collect()
}

fn aggregate_type(cx: &Completer<'_>, func: AggFunc, input: BaseType) -> Option<BaseType> {
    match func.result_type(input) {
        Some(t) => Some(t),
        None if cx.cfg.no_type => Some(BaseType::Number),
        None => None,
    }
}

/// Column lists where any two items would clash are rejected: a group must
/// stand alone, and plain columns cannot sit beside aggregates.
fn items_compatible(items: &[SpecItem]) -> bool {
    let groups = items.iter().filter(|i| matches!(i, SpecItem::Group { .. })).count();
    let plain = items.iter().filter(|i| matches!(i, SpecItem::Column(_))).count();
    !((groups > 0 && items.len() > 1) || (plain > 0 && plain < items.len()))
}

pub(super) fn specifier(cx: &Completer<'_>, spec: &SketchSpec, tau: &RecordType, n: Option<usize>) -> Vec<Partial> {
    match spec {
        SketchSpec::Col(hint) => column_hole(cx, hint, tau, n)
            .into_iter()
            .map(|(attr, ty, factors)| Partial {
                fragment: Fragment::Items(vec![SpecItem::Column(attr.clone())]),
                ty: RecordType::single(attr, ty),
                factors,
            })
            .collect(),
        SketchSpec::Agg(func, hint) => column_hole(cx, hint, tau, n)
            .into_iter()
            .filter_map(|(attr, ty, factors)| {
                let out_ty = aggregate_type(cx, *func, ty)?;
                Some(Partial {
                    fragment: Fragment::Items(vec![SpecItem::Aggregate(*func, attr.clone())]),
                    ty: RecordType::single(Attr::aggregate(*func, attr), out_ty),
                    factors,
                })
            })
            .collect(),
        SketchSpec::Group(func, target, key) => {
            let targets = column_hole(cx, target, tau, n);
            let keys = column_hole(cx, key, tau, n);
            let mut out = Capped::new(cx);
            for (t_attr, t_ty, t_factors) in &targets {
                let Some(out_ty) = aggregate_type(cx, *func, *t_ty) else {
                    continue;
                };
                for (k_attr, k_ty, k_factors) in &keys {
                    let factors = concat(&[t_factors, k_factors]);
                    if !cx.viable(&factors, n) || !out.admits(&factors) {
                        continue;
                    }
                    let ty = RecordType::new(vec![
                        Field {
                            attr: k_attr.clone(),
                            ty: *k_ty,
                        },
                        Field {
                            attr: Attr::aggregate(*func, t_attr.clone()),
                            ty: out_ty,
                        },
                    ]);
                    let Some(ty) = ty else {
                        continue;
                    };
                    out.push(Partial {
                        fragment: Fragment::Items(vec![SpecItem::Group {
                            func: *func,
                            target: t_attr.clone(),
                            key: k_attr.clone(),
                        }]),
                        ty,
                        factors,
                    });
                }
            }
            out.finish("a group")
        }
        SketchSpec::List(a, b) => {
            let firsts = cx.spec(a, tau, n);
            let seconds = cx.spec(b, tau, n);
            let mut out = Capped::new(cx);
            for x in firsts.iter() {
                let Fragment::Items(xs) = &x.fragment else {
                    continue;
                };
                for y in seconds.iter() {
                    let Fragment::Items(ys) = &y.fragment else {
                        continue;
                    };
                    let Some(ty) = x.ty.union(&y.ty) else {
                        continue;
                    };
                    let items: Vec<SpecItem> = xs.iter().chain(ys).cloned().collect();
                    if !items_compatible(&items) {
                        continue;
                    }
                    let factors = concat(&[&x.factors, &y.factors]);
                    if !cx.viable(&factors, n) || !out.admits(&factors) {
                        continue;
                    }
                    out.push(Partial {
                        fragment: Fragment::Items(items),
                        ty,
                        factors,
                    });
                }
            }
            out.finish("a column list")
        }
        SketchSpec::Atom(hint, op, operand) => atom(cx, hint, *op, operand, tau, n),
        SketchSpec::And(a, b) | SketchSpec::Or(a, b) => {
            let is_and = matches!(spec, SketchSpec::And(..));
            let firsts = cx.spec(a, tau, n);
            let seconds = cx.spec(b, tau, n);
            let mut out = Capped::new(cx);
            for x in firsts.iter() {
                let Fragment::Predicate(p) = &x.fragment else {
                    continue;
                };
                for y in seconds.iter() {
                    let Fragment::Predicate(q) = &y.fragment else {
                        continue;
                    };
                    let factors = concat(&[&x.factors, &y.factors]);
                    if !cx.viable(&factors, n) || !out.admits(&factors) {
                        continue;
                    }
                    let pred = if is_and {
                        Predicate::and(p.clone(), q.clone())
                    } else {
                        Predicate::or(p.clone(), q.clone())
                    };
                    out.push(Partial {
                        fragment: Fragment::Predicate(pred),
                        ty: RecordType::default(),
                        factors,
                    });
                }
            }
            out.finish("a connective")
        }
        SketchSpec::Not(a) => cx
            .spec(a, tau, n)
            .iter()
            .filter_map(|x| match &x.fragment {
                Fragment::Predicate(p) => Some(Partial {
                    fragment: Fragment::Predicate(Predicate::not(p.clone())),
                    ty: RecordType::default(),
                    factors: x.factors.clone(),
                }),
                _ => None,
            })
            .collect(),
    }
}

/// A right-hand side choice: the expression, its type when fixed, its
/// factors, and for subqueries the value it evaluates to.
struct Rhs {
    expr: Expr,
    ty: Option<BaseType>,
    factors: Vec<f64>,
    scalar: Option<Option<Value>>,
}

fn atom(
    cx: &Completer<'_>,
    hint: &Hint,
    op: CmpOp,
    operand: &Operand,
    tau: &RecordType,
    n: Option<usize>,
) -> Vec<Partial> {
    let lhs = column_hole(cx, hint, tau, n);
    let rhs: Vec<Rhs> = match operand {
        Operand::Col(h) => column_hole(cx, h, tau, n)
            .into_iter()
            .map(|(attr, ty, factors)| Rhs {
                expr: Expr::Column(attr),
                ty: Some(ty),
                factors,
                scalar: None,
            })
            .collect(),
        Operand::Value(v) => vec![Rhs {
            expr: Expr::Value(v.clone()),
            ty: None,
            factors: vec![1.0],
            scalar: None,
        }],
        Operand::Rel(sub) => cx
            .rel(sub, n)
            .iter()
            .filter_map(|c| {
                let q = c.fragment.as_query()?;
                if !q.is_scalar() || c.ty.len() != 1 {
                    return None;
                }
                let value = evaluate(q, cx.catalog).ok().and_then(|t| t.scalar().cloned());
                Some(Rhs {
                    expr: Expr::Query(Box::new(q.clone())),
                    ty: Some(c.ty.fields()[0].ty),
                    factors: c.factors.clone(),
                    scalar: Some(value),
                })
            })
            .collect(),
    };
    let mut out = Capped::new(cx);
    for (column, col_ty, col_factors) in &lhs {
        for r in &rhs {
            let expr = match (&r.expr, r.ty) {
                (Expr::Value(v), None) => match lift_value(cx, v, *col_ty) {
                    Some(v) => Expr::Value(v),
                    None => continue,
                },
                (e, Some(t)) if t == *col_ty || cx.cfg.no_type => e.clone(),
                _ => continue,
            };
            let score = match &r.scalar {
                // The subquery was evaluated once above; probe with its value.
                Some(Some(v)) => p_pred(cx.catalog, cx.cfg, column, op, &Expr::Value(v.clone())),
                Some(None) if column.is_base() && !cx.cfg.no_data => cx.cfg.pred_epsilon,
                _ => p_pred(cx.catalog, cx.cfg, column, op, &expr),
            };
            let factors = concat(&[col_factors, &r.factors, &[score]]);
            if !cx.viable(&factors, n) || !out.admits(&factors) {
                continue;
            }
            out.push(Partial {
                fragment: Fragment::Predicate(Predicate::compare(column.clone(), op, expr)),
                ty: RecordType::default(),
                factors,
            });
        }
    }
    out.finish("an atom")
}

/// Types a literal against the column it is compared with, reading numeric
/// text as a number when the column is numeric.
fn lift_value(cx: &Completer<'_>, value: &Value, column_ty: BaseType) -> Option<Value> {
    if value.base_type() == column_ty {
        return Some(value.clone());
    }
    if cx.cfg.no_type {
        return Some(value.clone());
    }
    match (value, column_ty) {
        (Value::Str(_), BaseType::Number) => value.coerce_to(BaseType::Number),
        _ => None,
    }
}

pub(super) fn lift(cx: &Completer<'_>, value: &Value, tau: &RecordType) -> Vec<Partial> {
    let mut types: Vec<BaseType> = tau.fields().iter().map(|f| f.ty).collect();
    types.sort();
    types.dedup();
    types
        .into_iter()
        .filter_map(|ty| lift_value(cx, value, ty))
        .map(|v| Partial {
            ty: RecordType::default(),
            fragment: Fragment::Value(v),
            factors: vec![1.0],
        })
        .fold(Vec::new(), |mut acc, p| {
            if !acc.iter().any(|q: &Partial| q.fragment == p.fragment) {
                acc.push(p);
            }
            acc
        })
}
