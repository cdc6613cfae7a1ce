//! SQLite databases as a data source, and as an independent engine for
//! checking emitted SQL.

use std::path::Path;

use rusqlite::types::ValueRef;
use rusqlite::{Connection, OpenFlags};
use sketchql_core::algebra::quote_ident as quote;
use sketchql_core::algebra::{parse_number, BaseType, Value};
use sketchql_core::catalog::{CatalogBuilder, LoadError};
use sketchql_core::Catalog;

use crate::{Error, Result};

/// Maps a declared SQLite column type to a base type following SQLite's
/// affinity rules, with `BOOL*` read as booleans.
pub fn declared_type(declared: &str) -> Option<BaseType> {
    if let Some(ty) = BaseType::parse(declared.trim()) {
        return Some(ty);
    }
    let upper = declared.to_ascii_uppercase();
    if upper.contains("BOOL") {
        Some(BaseType::Bool)
    } else if ["INT", "REAL", "FLOA", "DOUB", "NUM", "DEC"]
        .iter()
        .any(|k| upper.contains(k))
    {
        Some(BaseType::Number)
    } else if ["CHAR", "CLOB", "TEXT"].iter().any(|k| upper.contains(k)) || upper.is_empty() {
        Some(BaseType::String)
    } else {
        None
    }
}

fn cell(value: ValueRef<'_>, ty: BaseType) -> Option<Option<Value>> {
    Some(Some(match (value, ty) {
        (ValueRef::Null, _) => return Some(None),
        (ValueRef::Integer(i), BaseType::Number) => Value::number(i as f64),
        (ValueRef::Real(r), BaseType::Number) => Value::number(r),
        (ValueRef::Text(t), BaseType::Number) => Value::number(parse_number(std::str::from_utf8(t).ok()?.trim())?),
        (ValueRef::Integer(i), BaseType::Bool) if i == 0 || i == 1 => Value::Bool(i == 1),
        (ValueRef::Text(t), BaseType::String) => Value::string(std::str::from_utf8(t).ok()?),
        _ => return None,
    }))
}

fn raw_text(value: ValueRef<'_>) -> String {
    match value {
        ValueRef::Null => String::new(),
        ValueRef::Integer(i) => i.to_string(),
        ValueRef::Real(r) => r.to_string(),
        ValueRef::Text(t) => String::from_utf8_lossy(t).into_owned(),
        ValueRef::Blob(_) => "<blob>".into(),
    }
}

/// Reads schema, foreign keys and rows from a SQLite file.
pub fn load_sqlite_catalog(path: &Path, sample: Option<(usize, u64)>) -> Result<Catalog> {
    let err = |source| Error::Sqlite {
        path: path.into(),
        source,
    };
    let conn = Connection::open_with_flags(path, OpenFlags::SQLITE_OPEN_READ_ONLY).map_err(err)?;
    let mut names: Vec<String> = Vec::new();
    {
        let mut stmt = conn
            .prepare("SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name")
            .map_err(err)?;
        let rows = stmt.query_map([], |r| r.get::<_, String>(0)).map_err(err)?;
        for name in rows {
            names.push(name.map_err(err)?);
        }
    }
    let mut builder = CatalogBuilder::default();
    if let Some((limit, seed)) = sample {
        builder.sample_contents(limit, seed);
    }
    for table in &names {
        let mut columns = Vec::new();
        let mut keys: Vec<(i64, String)> = Vec::new();
        {
            let mut stmt = conn
                .prepare(&format!("PRAGMA table_info({})", quote(table)))
                .map_err(err)?;
            let info = stmt
                .query_map([], |r| {
                    Ok((r.get::<_, String>(1)?, r.get::<_, String>(2)?, r.get::<_, i64>(5)?))
                })
                .map_err(err)?;
            for row in info {
                let (name, declared, pk) = row.map_err(err)?;
                let ty = declared_type(&declared).ok_or_else(|| Error::ColumnType {
                    path: path.into(),
                    table: table.clone(),
                    column: name.clone(),
                    declared: declared.clone(),
                })?;
                if pk > 0 {
                    keys.push((pk, name.clone()));
                }
                columns.push((name, ty));
            }
        }
        keys.sort();
        let primary_key: Vec<String> = keys.into_iter().map(|(_, k)| k).collect();
        let list = columns.iter().map(|(c, _)| quote(c)).collect::<Vec<_>>().join(", ");
        let mut stmt = conn
            .prepare(&format!("SELECT {} FROM {} ORDER BY rowid", list, quote(table)))
            .or_else(|_| conn.prepare(&format!("SELECT {} FROM {}", list, quote(table))))
            .map_err(err)?;
        let mut rows = Vec::new();
        let mut cursor = stmt.query([]).map_err(err)?;
        let mut r = 0;
        while let Some(row) = cursor.next().map_err(err)? {
            r += 1;
            let mut out = Vec::with_capacity(columns.len());
            for (i, (column, ty)) in columns.iter().enumerate() {
                let value = row.get_ref(i).map_err(err)?;
                let parsed = cell(value, *ty).ok_or_else(|| LoadError::TypeMismatch {
                    table: table.clone(),
                    column: column.clone(),
                    row: r,
                    text: raw_text(value),
                    expected: *ty,
                })?;
                out.push(parsed);
            }
            rows.push(out);
        }
        builder.add_table(table, &columns, &primary_key, rows)?;
        let mut stmt = conn
            .prepare(&format!("PRAGMA foreign_key_list({})", quote(table)))
            .map_err(err)?;
        let fks = stmt
            .query_map([], |r| {
                Ok((
                    r.get::<_, String>(2)?,
                    r.get::<_, String>(3)?,
                    r.get::<_, Option<String>>(4)?,
                ))
            })
            .map_err(err)?;
        for fk in fks {
            let (ref_table, from, to) = fk.map_err(err)?;
            let to = match to {
                Some(to) => to,
                None => referenced_key(&conn, &ref_table).map_err(err)?.unwrap_or_default(),
            };
            builder.add_foreign_key(table, &from, &ref_table, &to);
        }
    }
    Ok(builder.build()?)
}

/// The single-column primary key of a table, used when a foreign key names
/// only the referenced table.
fn referenced_key(conn: &Connection, table: &str) -> rusqlite::Result<Option<String>> {
    let mut stmt = conn.prepare(&format!("PRAGMA table_info({})", quote(table)))?;
    let keys: Vec<String> = stmt
        .query_map([], |r| Ok((r.get::<_, String>(1)?, r.get::<_, i64>(5)?)))?
        .filter_map(|r| r.ok())
        .filter(|(_, pk)| *pk > 0)
        .map(|(name, _)| name)
        .collect();
    Ok((keys.len() == 1).then(|| keys[0].clone()))
}

fn sql_type(ty: BaseType) -> &'static str {
    match ty {
        BaseType::Number => "REAL",
        BaseType::Bool => "BOOLEAN",
        BaseType::String => "TEXT COLLATE NOCASE",
    }
}

/// Creates every table of `catalog` in `conn` and copies its rows. String
/// columns compare case-insensitively, matching the core evaluator. Foreign
/// keys are declared but not enforced, since the catalog does not require
/// referential integrity.
pub fn export_catalog(catalog: &Catalog, conn: &mut Connection) -> rusqlite::Result<()> {
    conn.pragma_update(None, "foreign_keys", false)?;
    let tx = conn.transaction()?;
    for table in catalog.tables() {
        let fields = table.record_type().fields();
        let mut defs: Vec<String> = fields
            .iter()
            .map(|f| format!("{} {}", quote(f.attr.base().1), sql_type(f.ty)))
            .collect();
        if !table.primary_key().is_empty() {
            let keys: Vec<String> = table.primary_key().iter().map(|k| quote(k)).collect();
            defs.push(format!("PRIMARY KEY ({})", keys.join(", ")));
        }
        for fk in catalog
            .foreign_keys()
            .iter()
            .filter(|fk| fk.from.base().0 == table.name())
        {
            defs.push(format!(
                "FOREIGN KEY ({}) REFERENCES {}({})",
                quote(fk.from.base().1),
                quote(fk.to.base().0),
                quote(fk.to.base().1)
            ));
        }
        tx.execute(
            &format!("CREATE TABLE {} ({})", quote(table.name()), defs.join(", ")),
            [],
        )?;
        let marks = vec!["?"; fields.len()].join(", ");
        let mut insert = tx.prepare(&format!("INSERT INTO {} VALUES ({})", quote(table.name()), marks))?;
        for row in table.rows() {
            let params: Vec<rusqlite::types::Value> = row
                .iter()
                .map(|v| match v {
                    Value::Number(n) => rusqlite::types::Value::Real(*n),
                    Value::Bool(b) => rusqlite::types::Value::Integer(*b as i64),
                    Value::Str(s) => rusqlite::types::Value::Text(s.clone()),
                })
                .collect();
            insert.execute(rusqlite::params_from_iter(params))?;
        }
    }
    tx.commit()
}

/// An in-memory SQLite copy of `catalog`.
pub fn in_memory(catalog: &Catalog) -> rusqlite::Result<Connection> {
    let mut conn = Connection::open_in_memory()?;
    export_catalog(catalog, &mut conn)?;
    Ok(conn)
}
