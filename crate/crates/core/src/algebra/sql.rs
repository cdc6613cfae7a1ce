use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Attr, Expr, Predicate, QueryTerm, SpecItem, Value};

const RESERVED: &[&str] = &[
    "ALL",
    "AND",
    "AS",
    "ASC",
    "BETWEEN",
    "BY",
    "CASE",
    "CROSS",
    "DESC",
    "DISTINCT",
    "ELSE",
    "END",
    "EXCEPT",
    "EXISTS",
    "FALSE",
    "FROM",
    "FULL",
    "GROUP",
    "HAVING",
    "IN",
    "INDEX",
    "INNER",
    "INTERSECT",
    "INTO",
    "IS",
    "JOIN",
    "KEY",
    "LEFT",
    "LIKE",
    "LIMIT",
    "NATURAL",
    "NOT",
    "NULL",
    "ON",
    "OR",
    "ORDER",
    "OUTER",
    "PRIMARY",
    "REFERENCES",
    "RIGHT",
    "SELECT",
    "SET",
    "TABLE",
    "THEN",
    "TO",
    "TRUE",
    "UNION",
    "UPDATE",
    "USING",
    "VALUES",
    "WHEN",
    "WHERE",
    "WITH",
];

/// Quotes an identifier unless it is a plain, non-reserved word.
pub fn quote_ident(name: &str) -> String {
    let simple = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.iter().any(|r| r.eq_ignore_ascii_case(name));
    if simple {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

pub fn sql_literal(value: &Value) -> String {
    match value {
        Value::Number(_) => value.text(),
        Value::Bool(true) => "TRUE".into(),
        Value::Bool(false) => "FALSE".into(),
        Value::Str(s) => format!("'{}'", s.replace('\'', "''")),
    }
}

/// Renders a well-typed term as a single SQL statement.
pub fn emit_sql(term: &QueryTerm) -> String {
    Emitter { next_alias: 0 }.statement(term, false)
}

struct Emitter {
    next_alias: usize,
}

/// A FROM clause under construction together with the selections hoisted
/// out of it and the names under which derived columns are visible.
struct FromClause {
    from: String,
    conds: Vec<String>,
    scope: BTreeMap<Attr, String>,
}

impl Emitter {
    fn statement(&mut self, term: &QueryTerm, alias_items: bool) -> String {
        match term {
            QueryTerm::Project { spec, input } => {
                let clause = self.source_clause(input);
                let mut items = Vec::new();
                let mut group_key = None;
                for item in spec.items() {
                    match item {
                        SpecItem::Column(a) => items.push(with_alias(column(a, &clause.scope), a, alias_items)),
                        SpecItem::Aggregate(f, a) => {
                            let out = Attr::aggregate(*f, a.clone());
                            let text = format!("{}({})", f, column(a, &clause.scope));
                            items.push(with_alias(text, &out, alias_items));
                        }
                        SpecItem::Group { func, target, key } => {
                            let k = column(key, &clause.scope);
                            items.push(with_alias(k.clone(), key, alias_items));
                            let out = Attr::aggregate(*func, target.clone());
                            let text = format!("{}({})", func, column(target, &clause.scope));
                            items.push(with_alias(text, &out, alias_items));
                            group_key = Some(k);
                        }
                    }
                }
                let mut sql = format!("SELECT {} FROM {}", items.join(", "), clause.from);
                push_where(&mut sql, &clause.conds);
                if let Some(k) = group_key {
                    sql.push_str(" GROUP BY ");
                    sql.push_str(&k);
                }
                sql
            }
            _ => {
                let clause = self.source_clause(term);
                let mut sql = format!("SELECT * FROM {}", clause.from);
                push_where(&mut sql, &clause.conds);
                sql
            }
        }
    }

    fn source_clause(&mut self, term: &QueryTerm) -> FromClause {
        match term {
            QueryTerm::Table(name) => FromClause {
                from: quote_ident(name),
                conds: Vec::new(),
                scope: BTreeMap::new(),
            },
            QueryTerm::Select { pred, input } => {
                let mut clause = self.source_clause(input);
                let text = self.predicate(pred, &clause.scope, true);
                clause.conds.push(text);
                clause
            }
            QueryTerm::Join {
                left,
                left_col,
                right_col,
                right,
            } => {
                let l = self.source_clause(left);
                let r = self.source_clause(right);
                let mut scope = l.scope;
                scope.extend(r.scope);
                let right_from = if matches!(right.as_ref(), QueryTerm::Join { .. }) {
                    format!("({})", r.from)
                } else {
                    r.from
                };
                let from = format!(
                    "{} JOIN {} ON {} = {}",
                    l.from,
                    right_from,
                    column(left_col, &scope),
                    column(right_col, &scope)
                );
                let mut conds = l.conds;
                conds.extend(r.conds);
                FromClause { from, conds, scope }
            }
            QueryTerm::Project { spec, .. } => {
                self.next_alias += 1;
                let alias = format!("d{}", self.next_alias);
                let inner = self.statement(term, true);
                let mut scope = BTreeMap::new();
                for item in spec.items() {
                    let outs = match item {
                        SpecItem::Column(a) => alloc::vec![a.clone()],
                        SpecItem::Aggregate(f, a) => alloc::vec![Attr::aggregate(*f, a.clone())],
                        SpecItem::Group { func, target, key } => {
                            alloc::vec![key.clone(), Attr::aggregate(*func, target.clone())]
                        }
                    };
                    for a in outs {
                        let name = format!("{}.{}", alias, quote_display(&a));
                        scope.insert(a, name);
                    }
                }
                FromClause {
                    from: format!("({}) AS {}", inner, alias),
                    conds: Vec::new(),
                    scope,
                }
            }
        }
    }

    fn predicate(&mut self, pred: &Predicate, scope: &BTreeMap<Attr, String>, top: bool) -> String {
        match pred {
            Predicate::And(a, b) => {
                let text = format!(
                    "{} AND {}",
                    self.predicate(a, scope, false),
                    self.predicate(b, scope, false)
                );
                if top {
                    text
                } else {
                    format!("({})", text)
                }
            }
            Predicate::Or(a, b) => format!(
                "({} OR {})",
                self.predicate(a, scope, false),
                self.predicate(b, scope, false)
            ),
            Predicate::Not(p) => format!("NOT ({})", self.predicate(p, scope, true)),
            Predicate::Compare { column: c, op, rhs } => {
                let rhs = match rhs {
                    Expr::Column(a) => column(a, scope),
                    Expr::Value(v) => sql_literal(v),
                    Expr::Query(q) => format!("({})", self.statement(q, false)),
                };
                format!("{} {} {}", column(c, scope), op, rhs)
            }
        }
    }
}

fn push_where(sql: &mut String, conds: &[String]) {
    if !conds.is_empty() {
        sql.push_str(" WHERE ");
        sql.push_str(&conds.join(" AND "));
    }
}

fn column(attr: &Attr, scope: &BTreeMap<Attr, String>) -> String {
    if let Some(name) = scope.get(attr) {
        return name.clone();
    }
    match attr {
        Attr::Column { table, column } => format!("{}.{}", quote_ident(table), quote_ident(column)),
        Attr::Aggregate { func, of } => format!("{}({})", func, column(of, scope)),
    }
}

fn quote_display(attr: &Attr) -> String {
    format!("\"{}\"", attr.to_string().replace('"', "\"\""))
}

fn with_alias(text: String, attr: &Attr, alias: bool) -> String {
    if alias {
        format!("{} AS {}", text, quote_display(attr))
    } else {
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AggFunc, CmpOp};
    use alloc::vec;

    fn col(t: &str, c: &str) -> Attr {
        Attr::column(t, c)
    }

    #[test]
    fn plain_projection() {
        let term = QueryTerm::project(
            vec![SpecItem::Column(col("Grades", "name"))],
            QueryTerm::table("Grades"),
        );
        assert_eq!(emit_sql(&term), "SELECT Grades.name FROM Grades");
    }

    #[test]
    fn motivating_query() {
        let join = QueryTerm::join(
            QueryTerm::table("Publication"),
            col("Publication", "cid"),
            col("Conference", "cid"),
            QueryTerm::table("Conference"),
        );
        let pred = Predicate::and(
            Predicate::compare(col("Conference", "name"), CmpOp::Eq, Expr::Value(Value::string("VLDB"))),
            Predicate::compare(
                col("Publication", "year"),
                CmpOp::Eq,
                Expr::Value(Value::number(2010.0)),
            ),
        );
        let term = QueryTerm::project(
            vec![SpecItem::Aggregate(AggFunc::Count, col("Publication", "pid"))],
            QueryTerm::select(pred, join),
        );
        assert_eq!(
            emit_sql(&term),
            "SELECT count(Publication.pid) FROM Publication JOIN Conference \
             ON Publication.cid = Conference.cid \
             WHERE Conference.name = 'VLDB' AND Publication.year = 2010"
        );
    }

    #[test]
    fn scalar_subquery_in_where() {
        let sub = QueryTerm::project(
            vec![SpecItem::Aggregate(AggFunc::Max, col("Grades", "score"))],
            QueryTerm::table("Grades"),
        );
        let term = QueryTerm::project(
            vec![SpecItem::Column(col("Grades", "name"))],
            QueryTerm::select(
                Predicate::compare(col("Grades", "score"), CmpOp::Eq, Expr::Query(sub.into())),
                QueryTerm::table("Grades"),
            ),
        );
        assert_eq!(
            emit_sql(&term),
            "SELECT Grades.name FROM Grades WHERE Grades.score = \
             (SELECT max(Grades.score) FROM Grades)"
        );
    }

    #[test]
    fn group_by_clause() {
        let term = QueryTerm::project(
            vec![SpecItem::Group {
                func: AggFunc::Avg,
                target: col("Grades", "score"),
                key: col("Courses", "dept"),
            }],
            QueryTerm::join(
                QueryTerm::table("Grades"),
                col("Grades", "cid_fk"),
                col("Courses", "cid"),
                QueryTerm::table("Courses"),
            ),
        );
        assert_eq!(
            emit_sql(&term),
            "SELECT Courses.dept, avg(Grades.score) FROM Grades JOIN Courses \
             ON Grades.cid_fk = Courses.cid GROUP BY Courses.dept"
        );
    }

    #[test]
    fn derived_table_is_aliased() {
        let inner = QueryTerm::project(
            vec![SpecItem::Aggregate(AggFunc::Count, col("T", "x"))],
            QueryTerm::table("T"),
        );
        let term = QueryTerm::select(
            Predicate::compare(
                Attr::aggregate(AggFunc::Count, col("T", "x")),
                CmpOp::Gt,
                Expr::Value(Value::number(1.0)),
            ),
            inner,
        );
        assert_eq!(
            emit_sql(&term),
            "SELECT * FROM (SELECT count(T.x) AS \"count(T.x)\" FROM T) AS d1 \
             WHERE d1.\"count(T.x)\" > 1"
        );
    }

    #[test]
    fn literals_and_identifiers_are_escaped() {
        assert_eq!(sql_literal(&Value::string("O'Brien")), "'O''Brien'");
        assert_eq!(quote_ident("order"), "\"order\"");
        assert_eq!(quote_ident("first name"), "\"first name\"");
        assert_eq!(quote_ident("cid_fk"), "cid_fk");
    }

    #[test]
    fn disjunction_is_parenthesized() {
        let a = Predicate::compare(col("T", "a"), CmpOp::Eq, Expr::Value(Value::number(1.0)));
        let b = Predicate::compare(col("T", "b"), CmpOp::Lt, Expr::Value(Value::number(2.0)));
        let term = QueryTerm::select(
            Predicate::and(Predicate::or(a.clone(), b.clone()), Predicate::not(a)),
            QueryTerm::table("T"),
        );
        assert_eq!(
            emit_sql(&term),
            "SELECT * FROM T WHERE (T.a = 1 OR T.b < 2) AND NOT (T.a = 1)"
        );
    }
}
