//! The database environment: table record types, foreign keys and a content
//! index per column used for data-directed scoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Attr, BaseType, CmpOp, Field, RecordType, Value};

/// Default bound on distinct values kept per column when sampling is on.
pub const DEFAULT_SAMPLE_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadError {
    MissingTable {
        table: String,
    },
    TypeMismatch {
        table: String,
        column: String,
        row: usize,
        text: String,
        expected: BaseType,
    },
    DanglingFk {
        from: String,
        to: String,
    },
    FkTypeMismatch {
        from: String,
        to: String,
    },
    NullCell {
        table: String,
        column: String,
        row: usize,
    },
    ArityMismatch {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    HeaderMismatch {
        table: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    DuplicateTable {
        table: String,
    },
    DuplicateColumn {
        table: String,
        column: String,
    },
    UnknownKeyColumn {
        table: String,
        column: String,
    },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::MissingTable { table } => write!(f, "missing data for table `{}`", table),
            LoadError::TypeMismatch {
                table,
                column,
                row,
                text,
                expected,
            } => write!(
                f,
                "{}.{} row {}: `{}` is not a {}",
                table,
                column,
                row,
                text,
                expected.name()
            ),
            LoadError::DanglingFk { from, to } => {
                write!(f, "foreign key {} -> {} references an unknown column", from, to)
            }
            LoadError::FkTypeMismatch { from, to } => {
                write!(f, "foreign key {} -> {} joins columns of different types", from, to)
            }
            LoadError::NullCell { table, column, row } => {
                write!(f, "{}.{} row {}: empty cell", table, column, row)
            }
            LoadError::ArityMismatch {
                table,
                row,
                expected,
                found,
            } => write!(
                f,
                "table `{}` row {}: expected {} cells, found {}",
                table, row, expected, found
            ),
            LoadError::HeaderMismatch { table, expected, found } => write!(
                f,
                "table `{}`: header {:?} does not match schema {:?}",
                table, found, expected
            ),
            LoadError::DuplicateTable { table } => write!(f, "table `{}` declared twice", table),
            LoadError::DuplicateColumn { table, column } => {
                write!(f, "column `{}` declared twice in `{}`", column, table)
            }
            LoadError::UnknownKeyColumn { table, column } => {
                write!(f, "key column `{}` is not a column of `{}`", column, table)
            }
        }
    }
}

impl core::error::Error for LoadError {}

/// Distinct values of one column with their multiplicities. Strings are
/// stored ASCII-lowercased so membership is case-insensitive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContentIndex {
    counts: BTreeMap<Value, usize>,
    rows: usize,
    sampled: bool,
}

impl ContentIndex {
    fn from_values<'a>(values: impl Iterator<Item = &'a Value>) -> Self {
        let mut counts = BTreeMap::new();
        let mut rows = 0;
        for v in values {
            *counts.entry(v.folded()).or_insert(0) += 1;
            rows += 1;
        }
        ContentIndex {
            counts,
            rows,
            sampled: false,
        }
    }

    fn sample(&mut self, limit: usize, rng: &mut ChaCha8Rng) {
        if self.counts.len() <= limit {
            return;
        }
        let mut keys: Vec<Value> = self.counts.keys().cloned().collect();
        keys.shuffle(rng);
        let keep: BTreeSet<Value> = keys.into_iter().take(limit).collect();
        self.counts.retain(|k, _| keep.contains(k));
        self.sampled = true;
    }

    pub fn contains(&self, value: &Value) -> bool {
        self.counts.contains_key(&value.folded())
    }

    pub fn count(&self, value: &Value) -> usize {
        self.counts.get(&value.folded()).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn is_sampled(&self) -> bool {
        self.sampled
    }

    pub fn min(&self) -> Option<&Value> {
        self.counts.keys().next()
    }

    pub fn max(&self) -> Option<&Value> {
        self.counts.keys().next_back()
    }

    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.counts.keys()
    }

    /// Is there a stored `v` with `v op probe`? The probe must already have
    /// the column's type.
    fn satisfies(&self, op: CmpOp, probe: &Value) -> bool {
        let probe = probe.folded();
        let (Some(min), Some(max)) = (self.min(), self.max()) else {
            return false;
        };
        match op {
            CmpOp::Eq => self.counts.contains_key(&probe),
            CmpOp::Lt => min < &probe,
            CmpOp::Le => min <= &probe,
            CmpOp::Gt => max > &probe,
            CmpOp::Ge => max >= &probe,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ForeignKey {
    pub from: Attr,
    pub to: Attr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableData {
    name: String,
    record_type: RecordType,
    rows: Vec<Vec<Value>>,
    primary_key: Vec<String>,
}

impl TableData {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn record_type(&self) -> &RecordType {
        &self.record_type
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn primary_key(&self) -> &[String] {
        &self.primary_key
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.record_type.fields().iter().map(|f| f.attr.base().1)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    tables: Vec<TableData>,
    by_name: BTreeMap<String, usize>,
    foreign_keys: Vec<ForeignKey>,
    contents: BTreeMap<Attr, ContentIndex>,
}

impl Catalog {
    pub fn builder() -> CatalogBuilder {
        CatalogBuilder::default()
    }

    pub fn tables(&self) -> &[TableData] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Option<&TableData> {
        self.by_name.get(name).map(|&i| &self.tables[i])
    }

    pub fn table_type(&self, name: &str) -> Option<&RecordType> {
        self.table(name).map(|t| &t.record_type)
    }

    pub fn foreign_keys(&self) -> &[ForeignKey] {
        &self.foreign_keys
    }

    pub fn column_type(&self, attr: &Attr) -> Option<BaseType> {
        match attr {
            Attr::Column { table, .. } => self.table_type(table)?.type_of(attr),
            Attr::Aggregate { .. } => None,
        }
    }

    pub fn contents(&self, attr: &Attr) -> Option<&ContentIndex> {
        self.contents.get(attr)
    }

    /// True iff some stored value `v` of `attr` satisfies `v op probe`.
    /// Numeric-looking string probes are read as numbers for Number columns;
    /// any other type mismatch is unsatisfiable.
    pub fn column_satisfies(&self, attr: &Attr, op: CmpOp, probe: &Value) -> bool {
        let (Some(ty), Some(index)) = (self.column_type(attr), self.contents(attr)) else {
            return false;
        };
        match probe.coerce_to(ty) {
            Some(p) => index.satisfies(op, &p),
            None => false,
        }
    }

    /// True iff some pair of stored values `(v1, v2)` satisfies `v1 op v2`.
    pub fn columns_satisfy(&self, left: &Attr, op: CmpOp, right: &Attr) -> bool {
        if self.column_type(left).is_none() || self.column_type(left) != self.column_type(right) {
            return false;
        }
        let (Some(a), Some(b)) = (self.contents(left), self.contents(right)) else {
            return false;
        };
        let (Some(amin), Some(amax), Some(bmin), Some(bmax)) = (a.min(), a.max(), b.min(), b.max()) else {
            return false;
        };
        match op {
            CmpOp::Eq => {
                let (small, large) = if a.distinct() <= b.distinct() { (a, b) } else { (b, a) };
                small.values().any(|v| large.counts.contains_key(v))
            }
            CmpOp::Lt => amin < bmax,
            CmpOp::Le => amin <= bmax,
            CmpOp::Gt => amax > bmin,
            CmpOp::Ge => amax >= bmin,
        }
    }

    /// True iff a declared foreign key connects the two columns, in either
    /// direction.
    pub fn is_fk_pair(&self, a: &Attr, b: &Attr) -> bool {
        self.foreign_keys
            .iter()
            .any(|fk| (&fk.from == a && &fk.to == b) || (&fk.from == b && &fk.to == a))
    }

    /// Share of distinct values common to both columns.
    pub fn content_overlap(&self, a: &Attr, b: &Attr) -> f64 {
        let (Some(x), Some(y)) = (self.contents(a), self.contents(b)) else {
            return 0.0;
        };
        let common = x.values().filter(|v| y.counts.contains_key(*v)).count();
        let total = x.distinct() + y.distinct() - common;
        if total == 0 {
            0.0
        } else {
            common as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CatalogBuilder {
    tables: Vec<TableData>,
    foreign_keys: Vec<(String, String, String, String)>,
    sample: Option<(usize, u64)>,
}

impl CatalogBuilder {
    /// Keep at most `limit` distinct values per column in the content index,
    /// chosen by a seeded shuffle.
    pub fn sample_contents(&mut self, limit: usize, seed: u64) -> &mut Self {
        self.sample = Some((limit, seed));
        self
    }

    /// Adds a table. Every cell must be present and match its column type.
    pub fn add_table(
        &mut self,
        name: &str,
        columns: &[(String, BaseType)],
        primary_key: &[String],
        rows: Vec<Vec<Option<Value>>>,
    ) -> Result<&mut Self, LoadError> {
        if self.tables.iter().any(|t| t.name == name) {
            return Err(LoadError::DuplicateTable { table: name.into() });
        }
        let mut fields = Vec::new();
        for (i, (col, ty)) in columns.iter().enumerate() {
            if columns[..i].iter().any(|(c, _)| c == col) {
                return Err(LoadError::DuplicateColumn {
                    table: name.into(),
                    column: col.clone(),
                });
            }
            fields.push(Field {
                attr: Attr::column(name, col.as_str()),
                ty: *ty,
            });
        }
        for key in primary_key {
            if !columns.iter().any(|(c, _)| c == key) {
                return Err(LoadError::UnknownKeyColumn {
                    table: name.into(),
                    column: key.clone(),
                });
            }
        }
        let mut checked = Vec::with_capacity(rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != columns.len() {
                return Err(LoadError::ArityMismatch {
                    table: name.into(),
                    row: r + 1,
                    expected: columns.len(),
                    found: row.len(),
                });
            }
            let mut out = Vec::with_capacity(row.len());
            for (cell, (col, ty)) in row.into_iter().zip(columns) {
                let value = cell.ok_or_else(|| LoadError::NullCell {
                    table: name.into(),
                    column: col.clone(),
                    row: r + 1,
                })?;
                if value.base_type() != *ty {
                    return Err(LoadError::TypeMismatch {
                        table: name.into(),
                        column: col.clone(),
                        row: r + 1,
                        text: value.text(),
                        expected: *ty,
                    });
                }
                out.push(value);
            }
            checked.push(out);
        }
        self.tables.push(TableData {
            name: name.into(),
            record_type: RecordType::new(fields).unwrap_or_default(),
            rows: checked,
            primary_key: primary_key.to_vec(),
        });
        Ok(self)
    }

    pub fn add_foreign_key(&mut self, table: &str, column: &str, ref_table: &str, ref_column: &str) -> &mut Self {
        self.foreign_keys
            .push((table.into(), column.into(), ref_table.into(), ref_column.into()));
        self
    }

    pub fn build(&self) -> Result<Catalog, LoadError> {
        let mut by_name = BTreeMap::new();
        for (i, t) in self.tables.iter().enumerate() {
            by_name.insert(t.name.clone(), i);
        }
        let mut catalog = Catalog {
            tables: self.tables.clone(),
            by_name,
            foreign_keys: Vec::new(),
            contents: BTreeMap::new(),
        };
        for (t, c, rt, rc) in &self.foreign_keys {
            let from = Attr::column(t.as_str(), c.as_str());
            let to = Attr::column(rt.as_str(), rc.as_str());
            let (Some(a), Some(b)) = (catalog.column_type(&from), catalog.column_type(&to)) else {
                return Err(LoadError::DanglingFk {
                    from: from.to_string(),
                    to: to.to_string(),
                });
            };
            if a != b {
                return Err(LoadError::FkTypeMismatch {
                    from: from.to_string(),
                    to: to.to_string(),
                });
            }
            let fk = ForeignKey { from, to };
            if !catalog.foreign_keys.contains(&fk) {
                catalog.foreign_keys.push(fk);
            }
        }
        let mut rng = self.sample.map(|(_, seed)| ChaCha8Rng::seed_from_u64(seed));
        for table in &catalog.tables {
            for (i, field) in table.record_type.fields().iter().enumerate() {
                let mut index = ContentIndex::from_values(table.rows.iter().map(|r| &r[i]));
                if let (Some((limit, _)), Some(rng)) = (self.sample, rng.as_mut()) {
                    index.sample(limit, rng);
                }
                catalog.contents.insert(field.attr.clone(), index);
            }
        }
        Ok(catalog)
    }
}
