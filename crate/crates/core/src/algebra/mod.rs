//! Extended relational algebra: projection (with aggregates and group-by),
//! selection, equi-join and base tables.
//!
//! Terms are plain immutable values. [`type_of`] computes the record type of a
//! term against a [`Catalog`], [`emit_sql`] renders it as SQL text and
//! [`evaluate`] runs it in-process with bag semantics.

mod eval;
mod sql;
mod typing;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};

pub use eval::{evaluate, EvalError, Table};
pub use sql::{emit_sql, quote_ident, sql_literal};
pub use typing::{type_of, TypeError};

#[cfg(doc)]
use crate::catalog::Catalog;

/// Scalar type of a column or literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseType {
    Number,
    Bool,
    String,
}

impl BaseType {
    pub fn name(self) -> &'static str {
        match self {
            BaseType::Number => "number",
            BaseType::Bool => "bool",
            BaseType::String => "string",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "number" | "num" | "int" | "integer" | "real" | "float" | "double" | "numeric" => Some(BaseType::Number),
            "bool" | "boolean" => Some(BaseType::Bool),
            "string" | "str" | "text" | "varchar" | "char" => Some(BaseType::String),
            _ => None,
        }
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseType::Number => "Number",
            BaseType::Bool => "Bool",
            BaseType::String => "String",
        })
    }
}

/// A literal value.
///
/// Structural equality and ordering are total (numbers compare with
/// `f64::total_cmp`, strings exactly). SQL comparison semantics, which fold
/// string case, live in [`Value::sql_cmp`].
#[derive(Debug, Clone)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Str(String),
}

impl Value {
    pub fn number(n: f64) -> Self {
        // -0.0 and 0.0 are the same literal
        Value::Number(if n == 0.0 { 0.0 } else { n })
    }

    pub fn string(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn base_type(&self) -> BaseType {
        match self {
            Value::Number(_) => BaseType::Number,
            Value::Bool(_) => BaseType::Bool,
            Value::Str(_) => BaseType::String,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    /// Source text of the literal without quoting.
    pub fn text(&self) -> String {
        match self {
            Value::Number(n) => format_number(*n),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => s.clone(),
        }
    }

    /// Reinterpret the literal as `ty` where that is lossless: numeric-looking
    /// strings become numbers, and any value keeps its own type.
    pub fn coerce_to(&self, ty: BaseType) -> Option<Value> {
        if self.base_type() == ty {
            return Some(self.clone());
        }
        match (self, ty) {
            (Value::Str(s), BaseType::Number) => parse_number(s.trim()).map(Value::number),
            (Value::Str(s), BaseType::Bool) => match s.trim().to_ascii_lowercase().as_str() {
                "true" => Some(Value::Bool(true)),
                "false" => Some(Value::Bool(false)),
                _ => None,
            },
            _ => None,
        }
    }

    /// SQL-style comparison: `None` when the types differ. Strings compare
    /// case-insensitively (ASCII folding).
    pub fn sql_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.partial_cmp(b),
            (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
            (Value::Str(a), Value::Str(b)) => Some(cmp_folded(a, b)),
            _ => None,
        }
    }

    /// Key used for grouping and content indexing: strings are case-folded.
    pub fn folded(&self) -> Value {
        match self {
            Value::Str(s) => Value::Str(s.to_ascii_lowercase()),
            other => other.clone(),
        }
    }
}

fn cmp_folded(a: &str, b: &str) -> Ordering {
    a.bytes()
        .map(|c| c.to_ascii_lowercase())
        .cmp(b.bytes().map(|c| c.to_ascii_lowercase()))
}

/// Parse a bare numeric literal. Rejects NaN and infinities.
pub fn parse_number(s: &str) -> Option<f64> {
    if s.is_empty() {
        return None;
    }
    let ok = s
        .bytes()
        .all(|c| c.is_ascii_digit() || matches!(c, b'.' | b'-' | b'+' | b'e' | b'E'));
    if !ok || !s.bytes().any(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse::<f64>().ok().filter(|n| n.is_finite())
}

/// Shortest round-tripping decimal form; integral values print without `.0`.
pub fn format_number(n: f64) -> String {
    format!("{}", n)
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => self.base_type().cmp(&other.base_type()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Number(n) => {
                0u8.hash(state);
                n.to_bits().hash(state);
            }
            Value::Bool(b) => {
                1u8.hash(state);
                b.hash(state);
            }
            Value::Str(s) => {
                2u8.hash(state);
                s.hash(state);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => f.write_str(&format_number(*n)),
            Value::Bool(b) => write!(f, "{}", b),
            Value::Str(s) => {
                f.write_str("\"")?;
                f.write_str(&s.replace('"', "\"\""))?;
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AggFunc {
    Max,
    Min,
    Avg,
    Sum,
    Count,
}

impl AggFunc {
    pub const ALL: [AggFunc; 5] = [AggFunc::Max, AggFunc::Min, AggFunc::Avg, AggFunc::Sum, AggFunc::Count];

    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Max => "max",
            AggFunc::Min => "min",
            AggFunc::Avg => "avg",
            AggFunc::Sum => "sum",
            AggFunc::Count => "count",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        AggFunc::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s))
    }

    /// Result type when applied to a column of type `input`, or `None` if the
    /// function does not accept it.
    pub fn result_type(self, input: BaseType) -> Option<BaseType> {
        match self {
            AggFunc::Count => Some(BaseType::Number),
            _ if input == BaseType::Number => Some(BaseType::Number),
            _ => None,
        }
    }
}

impl fmt::Display for AggFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Le,
    Lt,
    Eq,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 5] = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Gt, CmpOp::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Identity of a column in a record type.
///
/// Base columns are identified by their owning table, which makes column
/// names globally unique. Aggregated columns produced by a projection keep a
/// reference to the column they fold.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attr {
    Column { table: String, column: String },
    Aggregate { func: AggFunc, of: Box<Attr> },
}

impl Attr {
    pub fn column(table: impl Into<String>, column: impl Into<String>) -> Self {
        Attr::Column {
            table: table.into(),
            column: column.into(),
        }
    }

    pub fn aggregate(func: AggFunc, of: Attr) -> Self {
        Attr::Aggregate { func, of: Box::new(of) }
    }

    /// Owning base table and column name, following aggregates down to the
    /// folded column.
    pub fn base(&self) -> (&str, &str) {
        match self {
            Attr::Column { table, column } => (table, column),
            Attr::Aggregate { of, .. } => of.base(),
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Attr::Column { .. })
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attr::Column { table, column } => write!(f, "{}.{}", table, column),
            Attr::Aggregate { func, of } => write!(f, "{}({})", func, of),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Field {
    pub attr: Attr,
    pub ty: BaseType,
}

/// Ordered record type `{(c1: b1), ..., (cn: bn)}` with unique attributes.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordType {
    fields: Vec<Field>,
}

impl RecordType {
    /// Builds a record type; `None` if an attribute repeats.
    pub fn new(fields: Vec<Field>) -> Option<Self> {
        for (i, f) in fields.iter().enumerate() {
            if fields[..i].iter().any(|g| g.attr == f.attr) {
                return None;
            }
        }
        Some(RecordType { fields })
    }

    pub fn single(attr: Attr, ty: BaseType) -> Self {
        RecordType {
            fields: alloc::vec![Field { attr, ty }],
        }
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn type_of(&self, attr: &Attr) -> Option<BaseType> {
        self.fields.iter().find(|f| &f.attr == attr).map(|f| f.ty)
    }

    pub fn position(&self, attr: &Attr) -> Option<usize> {
        self.fields.iter().position(|f| &f.attr == attr)
    }

    pub fn is_disjoint(&self, other: &RecordType) -> bool {
        self.fields
            .iter()
            .all(|f| other.fields.iter().all(|g| g.attr != f.attr))
    }

    /// `self ∪ other`, defined only for disjoint attribute sets.
    pub fn union(&self, other: &RecordType) -> Option<RecordType> {
        if !self.is_disjoint(other) {
            return None;
        }
        let mut fields = self.fields.clone();
        fields.extend(other.fields.iter().cloned());
        Some(RecordType { fields })
    }
}

impl fmt::Display for RecordType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, field) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}: {})", field.attr, field.ty)?;
        }
        f.write_str("}")
    }
}

/// One entry of a projection list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpecItem {
    Column(Attr),
    Aggregate(AggFunc, Attr),
    /// `g(f(target), key)`: partition on `key`, fold `target` per group.
    Group {
        func: AggFunc,
        target: Attr,
        key: Attr,
    },
}

impl fmt::Display for SpecItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecItem::Column(a) => write!(f, "{}", a),
            SpecItem::Aggregate(func, a) => write!(f, "{}({})", func, a),
            SpecItem::Group { func, target, key } => write!(f, "g({}({}), {})", func, target, key),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnSpec(pub Vec<SpecItem>);

impl ColumnSpec {
    pub fn items(&self) -> &[SpecItem] {
        &self.0
    }

    pub fn has_aggregation(&self) -> bool {
        self.0.iter().any(|i| !matches!(i, SpecItem::Column(_)))
    }

    pub fn group_key(&self) -> Option<&Attr> {
        self.0.iter().find_map(|i| match i {
            SpecItem::Group { key, .. } => Some(key),
            _ => None,
        })
    }
}

impl fmt::Display for ColumnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", item)?;
        }
        Ok(())
    }
}

/// Right-hand side of a comparison.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Column(Attr),
    Value(Value),
    /// Scalar subquery: a projection of exactly one aggregate.
    Query(Box<QueryTerm>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Column(a) => write!(f, "{}", a),
            Expr::Value(v) => write!(f, "{}", v),
            Expr::Query(q) => write!(f, "{}", q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
    Compare { column: Attr, op: CmpOp, rhs: Expr },
}

impl Predicate {
    pub fn and(a: Predicate, b: Predicate) -> Self {
        Predicate::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Predicate, b: Predicate) -> Self {
        Predicate::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Predicate) -> Self {
        Predicate::Not(Box::new(p))
    }

    pub fn compare(column: Attr, op: CmpOp, rhs: Expr) -> Self {
        Predicate::Compare { column, op, rhs }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::And(a, b) => write!(f, "({} ∧ {})", a, b),
            Predicate::Or(a, b) => write!(f, "({} ∨ {})", a, b),
            Predicate::Not(p) => write!(f, "¬{}", p),
            Predicate::Compare { column, op, rhs } => write!(f, "{} {} {}", column, op, rhs),
        }
    }
}

/// A relation term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueryTerm {
    Table(String),
    Project {
        spec: ColumnSpec,
        input: Box<QueryTerm>,
    },
    Select {
        pred: Predicate,
        input: Box<QueryTerm>,
    },
    Join {
        left: Box<QueryTerm>,
        left_col: Attr,
        right_col: Attr,
        right: Box<QueryTerm>,
    },
}

impl QueryTerm {
    pub fn table(name: impl Into<String>) -> Self {
        QueryTerm::Table(name.into())
    }

    pub fn project(items: Vec<SpecItem>, input: QueryTerm) -> Self {
        QueryTerm::Project {
            spec: ColumnSpec(items),
            input: Box::new(input),
        }
    }

    pub fn select(pred: Predicate, input: QueryTerm) -> Self {
        QueryTerm::Select {
            pred,
            input: Box::new(input),
        }
    }

    pub fn join(left: QueryTerm, left_col: Attr, right_col: Attr, right: QueryTerm) -> Self {
        QueryTerm::Join {
            left: Box::new(left),
            left_col,
            right_col,
            right: Box::new(right),
        }
    }

    /// A term usable as a scalar subquery yields exactly one row and one
    /// column: a projection of a single aggregate without grouping.
    pub fn is_scalar(&self) -> bool {
        matches!(self, QueryTerm::Project { spec, .. }
            if spec.0.len() == 1 && matches!(spec.0[0], SpecItem::Aggregate(..)))
    }

    /// Base tables referenced anywhere in the term, including subqueries.
    pub fn tables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_tables(&mut out);
        out
    }

    fn collect_tables(&self, out: &mut Vec<String>) {
        match self {
            QueryTerm::Table(t) => {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
            QueryTerm::Project { input, .. } => input.collect_tables(out),
            QueryTerm::Select { pred, input } => {
                input.collect_tables(out);
                pred_tables(pred, out);
            }
            QueryTerm::Join { left, right, .. } => {
                left.collect_tables(out);
                right.collect_tables(out);
            }
        }
    }
}

fn pred_tables(p: &Predicate, out: &mut Vec<String>) {
    match p {
        Predicate::And(a, b) | Predicate::Or(a, b) => {
            pred_tables(a, out);
            pred_tables(b, out);
        }
        Predicate::Not(a) => pred_tables(a, out),
        Predicate::Compare { rhs, .. } => {
            if let Expr::Query(q) = rhs {
                q.collect_tables(out);
            }
        }
    }
}

impl fmt::Display for QueryTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryTerm::Table(t) => f.write_str(t),
            QueryTerm::Project { spec, input } => write!(f, "Π[{}]({})", spec, input),
            QueryTerm::Select { pred, input } => write!(f, "σ[{}]({})", pred, input),
            QueryTerm::Join {
                left,
                left_col,
                right_col,
                right,
            } => write!(f, "({} ⋈[{} = {}] {})", left, left_col, right_col, right),
        }
    }
}

/// Display helper used in error messages.
pub(crate) fn render<T: fmt::Display>(t: &T) -> String {
    t.to_string()
}
