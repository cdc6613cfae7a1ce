//! Running emitted SQL on SQLite and comparing results.

#![allow(dead_code)]

use rusqlite::types::ValueRef;
use sketchql_core::algebra::BaseType;
use sketchql_core::Value;

/// Rows of `sql`, read back as values of the given column types.
pub fn sqlite_rows(
    conn: &rusqlite::Connection,
    sql: &str,
    types: &[BaseType],
) -> rusqlite::Result<Vec<Vec<Option<Value>>>> {
    let mut stmt = conn.prepare(sql)?;
    let rows = stmt.query_map([], |row| {
        (0..types.len())
            .map(|i| {
                Ok(match row.get_ref(i)? {
                    ValueRef::Null => None,
                    ValueRef::Integer(n) if types[i] == BaseType::Bool => Some(Value::Bool(n != 0)),
                    ValueRef::Integer(n) => Some(Value::number(n as f64)),
                    ValueRef::Real(x) => Some(Value::number(x)),
                    ValueRef::Text(t) => Some(Value::string(String::from_utf8_lossy(t).into_owned())),
                    ValueRef::Blob(_) => None,
                })
            })
            .collect()
    })?;
    rows.collect()
}

/// Sorted rows with strings case-folded: a case-insensitive group may
/// report any member's spelling.
pub fn canonical(rows: &[Vec<Option<Value>>]) -> Vec<String> {
    let mut out: Vec<String> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|v| match v {
                    None => "NULL".into(),
                    Some(Value::Number(n)) => format!("{:.9}", n),
                    Some(v) => format!("{:?}", v.folded()),
                })
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect();
    out.sort();
    out
}
