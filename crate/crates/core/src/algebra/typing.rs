use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{render, AggFunc, Attr, BaseType, ColumnSpec, Expr, Field, Predicate, QueryTerm, RecordType, SpecItem};
use crate::catalog::Catalog;

/// Why a term has no record type. Every variant names the offending subterm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeError {
    UnknownTable {
        table: String,
    },
    UnknownColumn {
        column: String,
        term: String,
    },
    AggregateTypeMismatch {
        func: AggFunc,
        column: String,
        found: BaseType,
    },
    PredicateTypeMismatch {
        predicate: String,
        left: BaseType,
        right: BaseType,
    },
    NonScalarSubquery {
        subquery: String,
    },
    DuplicateColumn {
        column: String,
        term: String,
    },
    MixedAggregation {
        spec: String,
    },
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::UnknownTable { table } => write!(f, "unknown table `{}`", table),
            TypeError::UnknownColumn { column, term } => {
                write!(f, "unknown column `{}` in `{}`", column, term)
            }
            TypeError::AggregateTypeMismatch { func, column, found } => {
                write!(f, "`{}` cannot be applied to `{}` of type {}", func, column, found)
            }
            TypeError::PredicateTypeMismatch { predicate, left, right } => {
                write!(f, "type mismatch in `{}`: {} compared with {}", predicate, left, right)
            }
            TypeError::NonScalarSubquery { subquery } => {
                write!(f, "subquery `{}` does not yield a single value", subquery)
            }
            TypeError::DuplicateColumn { column, term } => {
                write!(f, "column `{}` appears twice in `{}`", column, term)
            }
            TypeError::MixedAggregation { spec } => write!(
                f,
                "`{}` mixes aggregated and plain columns or has several groupings",
                spec
            ),
        }
    }
}

impl core::error::Error for TypeError {}

/// Record type of `term` under `catalog`.
///
/// Column references are resolved before join disjointness is checked, so a
/// projection over a self-join reports the column it cannot find rather than
/// the overlap.
pub fn type_of(term: &QueryTerm, catalog: &Catalog) -> Result<RecordType, TypeError> {
    infer(term, catalog, false)?;
    infer(term, catalog, true)
}

fn infer(term: &QueryTerm, catalog: &Catalog, strict: bool) -> Result<RecordType, TypeError> {
    match term {
        QueryTerm::Table(name) => catalog
            .table_type(name)
            .cloned()
            .ok_or_else(|| TypeError::UnknownTable { table: name.clone() }),
        QueryTerm::Project { spec, input } => {
            let tau = infer(input, catalog, strict)?;
            spec_type(spec, &tau, term)
        }
        QueryTerm::Select { pred, input } => {
            let tau = infer(input, catalog, strict)?;
            check_predicate(pred, &tau, catalog, strict, term)?;
            Ok(tau)
        }
        QueryTerm::Join {
            left,
            left_col,
            right_col,
            right,
        } => {
            let left_ty = infer(left, catalog, strict)?;
            let right_ty = infer(right, catalog, strict)?;
            let lb = left_ty.type_of(left_col).ok_or_else(|| unknown(left_col, term))?;
            let rb = right_ty.type_of(right_col).ok_or_else(|| unknown(right_col, term))?;
            if lb != rb {
                return Err(TypeError::PredicateTypeMismatch {
                    predicate: alloc::format!("{} = {}", left_col, right_col),
                    left: lb,
                    right: rb,
                });
            }
            match left_ty.union(&right_ty) {
                Some(ty) => Ok(ty),
                None if strict => {
                    let dup = left_ty
                        .fields()
                        .iter()
                        .find(|f| right_ty.type_of(&f.attr).is_some())
                        .map(|f| render(&f.attr))
                        .unwrap_or_default();
                    Err(TypeError::DuplicateColumn {
                        column: dup,
                        term: render(term),
                    })
                }
                None => {
                    let mut fields: Vec<Field> = left_ty.fields().to_vec();
                    for f in right_ty.fields() {
                        if left_ty.type_of(&f.attr).is_none() {
                            fields.push(f.clone());
                        }
                    }
                    Ok(RecordType::new(fields).unwrap_or_default())
                }
            }
        }
    }
}

fn unknown(attr: &Attr, term: &QueryTerm) -> TypeError {
    TypeError::UnknownColumn {
        column: render(attr),
        term: render(term),
    }
}

/// Type of a projection list under the input type `tau`.
pub(crate) fn spec_type(spec: &ColumnSpec, tau: &RecordType, term: &QueryTerm) -> Result<RecordType, TypeError> {
    let mut fields = Vec::new();
    for item in spec.items() {
        match item {
            SpecItem::Column(attr) => {
                let ty = tau.type_of(attr).ok_or_else(|| unknown(attr, term))?;
                fields.push(Field { attr: attr.clone(), ty });
            }
            SpecItem::Aggregate(func, attr) => {
                fields.push(aggregate_field(*func, attr, tau, term)?);
            }
            SpecItem::Group { func, target, key } => {
                let key_ty = tau.type_of(key).ok_or_else(|| unknown(key, term))?;
                fields.push(Field {
                    attr: key.clone(),
                    ty: key_ty,
                });
                fields.push(aggregate_field(*func, target, tau, term)?);
            }
        }
    }
    let groups = spec
        .items()
        .iter()
        .filter(|i| matches!(i, SpecItem::Group { .. }))
        .count();
    let plain = spec.items().iter().filter(|i| matches!(i, SpecItem::Column(_))).count();
    if (groups > 0 && spec.items().len() > 1) || (spec.has_aggregation() && plain > 0) {
        return Err(TypeError::MixedAggregation { spec: render(spec) });
    }
    let dup = fields
        .iter()
        .enumerate()
        .find(|(i, f)| fields[..*i].iter().any(|g| g.attr == f.attr))
        .map(|(_, f)| render(&f.attr));
    match dup {
        Some(column) => Err(TypeError::DuplicateColumn {
            column,
            term: render(term),
        }),
        None => Ok(RecordType::new(fields).unwrap_or_default()),
    }
}

fn aggregate_field(func: AggFunc, attr: &Attr, tau: &RecordType, term: &QueryTerm) -> Result<Field, TypeError> {
    let input = tau.type_of(attr).ok_or_else(|| unknown(attr, term))?;
    let ty = func
        .result_type(input)
        .ok_or_else(|| TypeError::AggregateTypeMismatch {
            func,
            column: render(attr),
            found: input,
        })?;
    Ok(Field {
        attr: Attr::aggregate(func, attr.clone()),
        ty,
    })
}

fn check_predicate(
    pred: &Predicate,
    tau: &RecordType,
    catalog: &Catalog,
    strict: bool,
    term: &QueryTerm,
) -> Result<(), TypeError> {
    match pred {
        Predicate::And(a, b) | Predicate::Or(a, b) => {
            check_predicate(a, tau, catalog, strict, term)?;
            check_predicate(b, tau, catalog, strict, term)
        }
        Predicate::Not(p) => check_predicate(p, tau, catalog, strict, term),
        Predicate::Compare { column, rhs, .. } => {
            let left = tau.type_of(column).ok_or_else(|| unknown(column, term))?;
            let right = expr_type(rhs, tau, catalog, strict, term)?;
            if left != right {
                return Err(TypeError::PredicateTypeMismatch {
                    predicate: render(pred),
                    left,
                    right,
                });
            }
            Ok(())
        }
    }
}

fn expr_type(
    expr: &Expr,
    tau: &RecordType,
    catalog: &Catalog,
    strict: bool,
    term: &QueryTerm,
) -> Result<BaseType, TypeError> {
    match expr {
        Expr::Column(attr) => tau.type_of(attr).ok_or_else(|| unknown(attr, term)),
        Expr::Value(v) => Ok(v.base_type()),
        Expr::Query(q) => {
            let ty = infer(q, catalog, strict)?;
            if !q.is_scalar() || ty.len() != 1 {
                return Err(TypeError::NonScalarSubquery {
                    subquery: render(q.as_ref()),
                });
            }
            Ok(ty.fields()[0].ty)
        }
    }
}
