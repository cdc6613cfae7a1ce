use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::{type_of, AggFunc, Attr, ColumnSpec, Expr, Predicate, QueryTerm, RecordType, SpecItem, TypeError, Value};
use crate::catalog::Catalog;

/// A materialized relation. `None` cells only arise from aggregates over
/// empty input.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: RecordType,
    pub rows: Vec<Vec<Option<Value>>>,
}

impl Table {
    pub fn column(&self, attr: &Attr) -> Option<Vec<Option<Value>>> {
        let idx = self.header.position(attr)?;
        Some(self.rows.iter().map(|r| r[idx].clone()).collect())
    }

    /// The single cell of a one-row, one-column result.
    pub fn scalar(&self) -> Option<&Value> {
        match self.rows.as_slice() {
            [row] if row.len() == 1 => row[0].as_ref(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    Type(TypeError),
    MissingData { table: String },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Type(e) => write!(f, "ill-typed term: {}", e),
            EvalError::MissingData { table } => write!(f, "no rows loaded for table `{}`", table),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<TypeError> for EvalError {
    fn from(e: TypeError) -> Self {
        EvalError::Type(e)
    }
}

/// Evaluates `term` over the catalog's contents with bag semantics.
pub fn evaluate(term: &QueryTerm, catalog: &Catalog) -> Result<Table, EvalError> {
    type_of(term, catalog)?;
    eval(term, catalog)
}

fn eval(term: &QueryTerm, catalog: &Catalog) -> Result<Table, EvalError> {
    match term {
        QueryTerm::Table(name) => {
            let data = catalog
                .table(name)
                .ok_or_else(|| EvalError::MissingData { table: name.clone() })?;
            Ok(Table {
                header: data.record_type().clone(),
                rows: data
                    .rows()
                    .iter()
                    .map(|r| r.iter().cloned().map(Some).collect())
                    .collect(),
            })
        }
        QueryTerm::Select { pred, input } => {
            let mut table = eval(input, catalog)?;
            let bound = bind(pred, catalog)?;
            table.rows.retain(|row| test(&bound, &table.header, row) == Truth::True);
            Ok(table)
        }
        QueryTerm::Project { spec, input } => {
            let table = eval(input, catalog)?;
            project(spec, table, term)
        }
        QueryTerm::Join {
            left,
            left_col,
            right_col,
            right,
        } => {
            let l = eval(left, catalog)?;
            let r = eval(right, catalog)?;
            let li = position(&l.header, left_col)?;
            let ri = position(&r.header, right_col)?;
            let header = l.header.union(&r.header).unwrap_or_default();
            let mut rows = Vec::new();
            for lrow in &l.rows {
                for rrow in &r.rows {
                    if compare(&lrow[li], &rrow[ri]) == Some(Ordering::Equal) {
                        let mut row = lrow.clone();
                        row.extend(rrow.iter().cloned());
                        rows.push(row);
                    }
                }
            }
            Ok(Table { header, rows })
        }
    }
}

fn position(header: &RecordType, attr: &Attr) -> Result<usize, EvalError> {
    header.position(attr).ok_or_else(|| {
        EvalError::Type(TypeError::UnknownColumn {
            column: alloc::format!("{}", attr),
            term: alloc::format!("{}", header),
        })
    })
}

fn project(spec: &ColumnSpec, table: Table, term: &QueryTerm) -> Result<Table, EvalError> {
    let header = super::typing::spec_type(spec, &table.header, term)?;
    if let Some(SpecItem::Group { func, target, key }) = spec.items().first() {
        let ki = position(&table.header, key)?;
        let ti = position(&table.header, target)?;
        // groups in order of first appearance; string keys fold case
        let mut groups: Vec<(Option<Value>, Vec<Option<Value>>)> = Vec::new();
        for row in &table.rows {
            let folded = row[ki].as_ref().map(Value::folded);
            match groups.iter_mut().find(|(k, _)| *k == folded) {
                Some((_, members)) => members.push(row[ti].clone()),
                None => groups.push((folded, alloc::vec![row[ti].clone()])),
            }
        }
        let rows = groups
            .into_iter()
            .map(|(k, members)| {
                let original = table
                    .rows
                    .iter()
                    .find(|r| r[ki].as_ref().map(Value::folded) == k)
                    .and_then(|r| r[ki].clone());
                alloc::vec![original, fold(*func, &members)]
            })
            .collect();
        return Ok(Table { header, rows });
    }
    if spec.has_aggregation() {
        let mut row = Vec::new();
        for item in spec.items() {
            if let SpecItem::Aggregate(func, attr) = item {
                let idx = position(&table.header, attr)?;
                let cells: Vec<_> = table.rows.iter().map(|r| r[idx].clone()).collect();
                row.push(fold(*func, &cells));
            }
        }
        return Ok(Table {
            header,
            rows: alloc::vec![row],
        });
    }
    let mut indices = Vec::new();
    for item in spec.items() {
        if let SpecItem::Column(attr) = item {
            indices.push(position(&table.header, attr)?);
        }
    }
    let rows = table
        .rows
        .iter()
        .map(|r| indices.iter().map(|&i| r[i].clone()).collect())
        .collect();
    Ok(Table { header, rows })
}

/// SQL aggregate semantics: NULL inputs are ignored; `count` of nothing is 0,
/// every other aggregate of nothing is NULL.
fn fold(func: AggFunc, cells: &[Option<Value>]) -> Option<Value> {
    let present: Vec<&Value> = cells.iter().flatten().collect();
    match func {
        AggFunc::Count => Some(Value::number(present.len() as f64)),
        _ if present.is_empty() => None,
        AggFunc::Sum | AggFunc::Avg => {
            let total: f64 = present.iter().filter_map(|v| v.as_number()).sum();
            if func == AggFunc::Sum {
                Some(Value::number(total))
            } else {
                Some(Value::number(total / present.len() as f64))
            }
        }
        AggFunc::Max | AggFunc::Min => {
            let mut best = present[0];
            for v in &present[1..] {
                let ord = v.sql_cmp(best).unwrap_or(Ordering::Equal);
                if (func == AggFunc::Max && ord == Ordering::Greater) || (func == AggFunc::Min && ord == Ordering::Less)
                {
                    best = v;
                }
            }
            Some(best.clone())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Truth {
    True,
    False,
    Unknown,
}

/// A predicate whose subqueries have already been reduced to values.
enum Bound {
    And(Box<Bound>, Box<Bound>),
    Or(Box<Bound>, Box<Bound>),
    Not(Box<Bound>),
    Compare(Attr, super::CmpOp, Operand),
}

enum Operand {
    Column(Attr),
    Value(Option<Value>),
}

use alloc::boxed::Box;

fn bind(pred: &Predicate, catalog: &Catalog) -> Result<Bound, EvalError> {
    Ok(match pred {
        Predicate::And(a, b) => Bound::And(bind(a, catalog)?.into(), bind(b, catalog)?.into()),
        Predicate::Or(a, b) => Bound::Or(bind(a, catalog)?.into(), bind(b, catalog)?.into()),
        Predicate::Not(p) => Bound::Not(bind(p, catalog)?.into()),
        Predicate::Compare { column, op, rhs } => {
            let operand = match rhs {
                Expr::Column(a) => Operand::Column(a.clone()),
                Expr::Value(v) => Operand::Value(Some(v.clone())),
                Expr::Query(q) => {
                    let result = eval(q, catalog)?;
                    Operand::Value(result.rows.first().and_then(|r| r[0].clone()))
                }
            };
            Bound::Compare(column.clone(), *op, operand)
        }
    })
}

fn test(pred: &Bound, header: &RecordType, row: &[Option<Value>]) -> Truth {
    match pred {
        Bound::And(a, b) => match (test(a, header, row), test(b, header, row)) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        },
        Bound::Or(a, b) => match (test(a, header, row), test(b, header, row)) {
            (Truth::True, _) | (_, Truth::True) => Truth::True,
            (Truth::False, Truth::False) => Truth::False,
            _ => Truth::Unknown,
        },
        Bound::Not(p) => match test(p, header, row) {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        },
        Bound::Compare(column, op, rhs) => {
            let lhs = header.position(column).and_then(|i| row[i].clone());
            let rhs = match rhs {
                Operand::Column(a) => header.position(a).and_then(|i| row[i].clone()),
                Operand::Value(v) => v.clone(),
            };
            match compare(&lhs, &rhs) {
                Some(ord) if op.holds(ord) => Truth::True,
                Some(_) => Truth::False,
                None => Truth::Unknown,
            }
        }
    }
}

fn compare(a: &Option<Value>, b: &Option<Value>) -> Option<Ordering> {
    match (a, b) {
        (Some(x), Some(y)) => x.sql_cmp(y),
        _ => None,
    }
}
