//! JSON schema descriptors and per-table CSV data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sketchql_core::algebra::{parse_number, BaseType, Value};
use sketchql_core::catalog::{CatalogBuilder, LoadError};
use sketchql_core::Catalog;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaDescriptor {
    pub tables: Vec<TableSchema>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSchema {
    pub name: String,
    pub columns: Vec<ColumnSchema>,
    #[serde(default)]
    pub primary_key: Vec<String>,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKeySchema>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSchema {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForeignKeySchema {
    pub column: String,
    pub references: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl SchemaDescriptor {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })
    }

    /// The descriptor of an already loaded catalog.
    pub fn of(catalog: &Catalog) -> Self {
        let tables = catalog
            .tables()
            .iter()
            .map(|t| TableSchema {
                name: t.name().into(),
                columns: t
                    .record_type()
                    .fields()
                    .iter()
                    .map(|f| ColumnSchema {
                        name: f.attr.base().1.into(),
                        ty: f.ty.name().into(),
                    })
                    .collect(),
                primary_key: t.primary_key().to_vec(),
                foreign_keys: catalog
                    .foreign_keys()
                    .iter()
                    .filter(|fk| fk.from.base().0 == t.name())
                    .map(|fk| ForeignKeySchema {
                        column: fk.from.base().1.into(),
                        references: ColumnRef {
                            table: fk.to.base().0.into(),
                            column: fk.to.base().1.into(),
                        },
                    })
                    .collect(),
            })
            .collect();
        SchemaDescriptor { tables }
    }

    fn column_types(&self, path: &Path, table: &TableSchema) -> Result<Vec<(String, BaseType)>> {
        table
            .columns
            .iter()
            .map(|c| {
                BaseType::parse(&c.ty)
                    .map(|ty| (c.name.clone(), ty))
                    .ok_or_else(|| Error::ColumnType {
                        path: path.into(),
                        table: table.name.clone(),
                        column: c.name.clone(),
                        declared: c.ty.clone(),
                    })
            })
            .collect()
    }
}

/// Parses one CSV cell as a value of `ty`. An empty cell is a NULL.
pub fn parse_cell(text: &str, ty: BaseType) -> Option<Option<Value>> {
    if text.is_empty() {
        return Some(None);
    }
    let value = match ty {
        BaseType::Number => Value::number(parse_number(text.trim())?),
        BaseType::Bool => match text.trim().to_ascii_lowercase().as_str() {
            "true" | "t" | "1" => Value::Bool(true),
            "false" | "f" | "0" => Value::Bool(false),
            _ => return None,
        },
        BaseType::String => Value::string(text),
    };
    Some(Some(value))
}

fn table_file(dir: &Path, table: &str) -> Option<PathBuf> {
    let exact = dir.join(format!("{}.csv", table));
    if exact.is_file() {
        return Some(exact);
    }
    let lower = dir.join(format!("{}.csv", table.to_lowercase()));
    lower.is_file().then_some(lower)
}

/// Loads `<dir>/<table>.csv` for every table in the descriptor. Each file
/// needs a header row naming the columns in schema order.
pub fn load_csv_catalog(schema_path: &Path, dir: &Path) -> Result<Catalog> {
    let schema = SchemaDescriptor::read(schema_path)?;
    load_csv_with(&schema, schema_path, dir, None)
}

/// As [`load_csv_catalog`] with a parsed descriptor and optional content
/// sampling (`(limit, seed)`).
pub fn load_csv_with(
    schema: &SchemaDescriptor,
    schema_path: &Path,
    dir: &Path,
    sample: Option<(usize, u64)>,
) -> Result<Catalog> {
    let mut builder = CatalogBuilder::default();
    if let Some((limit, seed)) = sample {
        builder.sample_contents(limit, seed);
    }
    for table in &schema.tables {
        let columns = schema.column_types(schema_path, table)?;
        let Some(path) = table_file(dir, &table.name) else {
            return Err(LoadError::MissingTable {
                table: table.name.clone(),
            }
            .into());
        };
        let rows = read_rows(&path, &table.name, &columns)?;
        builder.add_table(&table.name, &columns, &table.primary_key, rows)?;
        for fk in &table.foreign_keys {
            builder.add_foreign_key(&table.name, &fk.column, &fk.references.table, &fk.references.column);
        }
    }
    Ok(builder.build()?)
}

fn read_rows(path: &Path, table: &str, columns: &[(String, BaseType)]) -> Result<Vec<Vec<Option<Value>>>> {
    let csv_err = |source| Error::Csv {
        path: path.into(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(csv_err)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let expected: Vec<String> = columns.iter().map(|(c, _)| c.clone()).collect();
    if header != expected {
        return Err(LoadError::HeaderMismatch {
            table: table.into(),
            expected,
            found: header,
        }
        .into());
    }
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != columns.len() {
            return Err(LoadError::ArityMismatch {
                table: table.into(),
                row: r + 1,
                expected: columns.len(),
                found: record.len(),
            }
            .into());
        }
        let mut row = Vec::with_capacity(columns.len());
        for (cell, (column, ty)) in record.iter().zip(columns) {
            let value = parse_cell(cell, *ty).ok_or_else(|| LoadError::TypeMismatch {
                table: table.into(),
                column: column.clone(),
                row: r + 1,
                text: cell.into(),
                expected: *ty,
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(rows)
}
