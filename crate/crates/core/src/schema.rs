//! Spider-style schema catalog and sample ingestion.
//!
//! Column and table indices are kept exactly as they appear in the catalog:
//! foreign keys and primary keys are index based, so reordering anything here
//! would silently corrupt them.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value as JsonValue;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: expected a JSON array at the top level")]
    NotAnArray { path: PathBuf },
}

/// Why a single catalog descriptor was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("descriptor {position} is not a valid database descriptor: {reason}")]
    Malformed { position: usize, reason: String },
    #[error("{db_id}: column {column} refers to table {table}, but only {tables} tables exist")]
    ColumnTableOutOfRange {
        db_id: String,
        column: usize,
        table: i64,
        tables: usize,
    },
    #[error("{db_id}: foreign key ({from}, {to}) is out of range for {columns} columns")]
    ForeignKeyOutOfRange {
        db_id: String,
        from: usize,
        to: usize,
        columns: usize,
    },
    #[error("{db_id}: foreign key ({from}, {to}) is degenerate")]
    DegenerateForeignKey {
        db_id: String,
        from: usize,
        to: usize,
    },
    #[error("{db_id}: primary key column {column} is out of range")]
    PrimaryKeyOutOfRange { db_id: String, column: usize },
    #[error("{db_id}: column_types has {types} entries for {columns} columns")]
    TypeCountMismatch {
        db_id: String,
        types: usize,
        columns: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Text,
    Number,
    Time,
    Boolean,
    Others,
}

impl ColumnType {
    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => ColumnType::Text,
            "number" => ColumnType::Number,
            "time" => ColumnType::Time,
            "boolean" => ColumnType::Boolean,
            _ => ColumnType::Others,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Text => "text",
            ColumnType::Number => "number",
            ColumnType::Time => "time",
            ColumnType::Boolean => "boolean",
            ColumnType::Others => "others",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    /// Identifier as stored in the database.
    pub name: String,
    /// Human-readable name (`table_names` in the catalog); falls back to `name`.
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    /// `None` only for the synthetic `*` column at index 0.
    pub table: Option<usize>,
    pub name: String,
    pub display: String,
    pub ty: ColumnType,
}

impl Column {
    pub fn is_star(&self) -> bool {
        self.table.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatabaseSchema {
    pub db_id: String,
    pub tables: Vec<Table>,
    pub columns: Vec<Column>,
    pub primary_keys: Vec<usize>,
    /// `(column, referenced_column)` pairs.
    pub foreign_keys: Vec<(usize, usize)>,
}

impl DatabaseSchema {
    pub const STAR: usize = 0;

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables
            .iter()
            .position(|t| t.name.eq_ignore_ascii_case(name))
    }

    pub fn column_index(&self, table: usize, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.table == Some(table) && c.name.eq_ignore_ascii_case(name))
    }

    /// Column indices belonging to `table`, in catalog order.
    pub fn columns_of(&self, table: usize) -> impl Iterator<Item = usize> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.table == Some(table))
            .map(|(i, _)| i)
    }

    pub fn column_table(&self, column: usize) -> Option<usize> {
        self.columns.get(column).and_then(|c| c.table)
    }

    /// `Table.column`, or `*`.
    pub fn qualified_name(&self, column: usize) -> String {
        match self.columns.get(column) {
            Some(c) => match c.table {
                Some(t) => format!("{}.{}", self.tables[t].name, c.name),
                None => "*".to_string(),
            },
            None => format!("<column {column}>"),
        }
    }

    pub fn is_primary_key(&self, column: usize) -> bool {
        self.primary_keys.contains(&column)
    }

    /// Parses a single catalog descriptor, validating every index.
    pub fn from_catalog_value(position: usize, value: &JsonValue) -> Result<Self, SchemaError> {
        let raw: RawDescriptor =
            serde_json::from_value(value.clone()).map_err(|e| SchemaError::Malformed {
                position,
                reason: e.to_string(),
            })?;
        raw.into_schema()
    }

    /// Serializes back to the catalog descriptor layout.
    pub fn to_catalog_value(&self) -> JsonValue {
        let raw = RawDescriptor {
            db_id: self.db_id.clone(),
            table_names_original: self.tables.iter().map(|t| t.name.clone()).collect(),
            table_names: Some(self.tables.iter().map(|t| t.display.clone()).collect()),
            column_names_original: self
                .columns
                .iter()
                .map(|c| (c.table.map_or(-1, |t| t as i64), c.name.clone()))
                .collect(),
            column_names: Some(
                self.columns
                    .iter()
                    .map(|c| (c.table.map_or(-1, |t| t as i64), c.display.clone()))
                    .collect(),
            ),
            column_types: self
                .columns
                .iter()
                .map(|c| c.ty.as_str().to_string())
                .collect(),
            primary_keys: self
                .primary_keys
                .iter()
                .map(|&k| PrimaryKeyEntry::Single(k))
                .collect(),
            foreign_keys: self.foreign_keys.iter().map(|&(a, b)| (a, b)).collect(),
        };
        serde_json::to_value(raw).expect("descriptor serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawDescriptor {
    db_id: String,
    table_names_original: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table_names: Option<Vec<String>>,
    column_names_original: Vec<(i64, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    column_names: Option<Vec<(i64, String)>>,
    column_types: Vec<String>,
    #[serde(default)]
    primary_keys: Vec<PrimaryKeyEntry>,
    #[serde(default)]
    foreign_keys: Vec<(usize, usize)>,
}

/// Some catalog revisions list composite keys as nested arrays.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PrimaryKeyEntry {
    Single(usize),
    Composite(Vec<usize>),
}

impl RawDescriptor {
    fn into_schema(self) -> Result<DatabaseSchema, SchemaError> {
        let db_id = self.db_id;
        let n_tables = self.table_names_original.len();
        let displays = self
            .table_names
            .filter(|d| d.len() == n_tables)
            .unwrap_or_else(|| self.table_names_original.clone());
        let tables = self
            .table_names_original
            .into_iter()
            .zip(displays)
            .map(|(name, display)| Table { name, display })
            .collect();

        let n_columns = self.column_names_original.len();
        if self.column_types.len() != n_columns {
            return Err(SchemaError::TypeCountMismatch {
                db_id,
                types: self.column_types.len(),
                columns: n_columns,
            });
        }
        let column_displays = self
            .column_names
            .filter(|d| d.len() == n_columns)
            .map(|d| d.into_iter().map(|(_, n)| n).collect::<Vec<_>>());
        let mut columns = Vec::with_capacity(n_columns);
        for (i, ((table, name), ty)) in self
            .column_names_original
            .into_iter()
            .zip(&self.column_types)
            .enumerate()
        {
            let table = if table < 0 {
                None
            } else if (table as usize) < n_tables {
                Some(table as usize)
            } else {
                return Err(SchemaError::ColumnTableOutOfRange {
                    db_id,
                    column: i,
                    table,
                    tables: n_tables,
                });
            };
            let display = column_displays
                .as_ref()
                .map(|d| d[i].clone())
                .unwrap_or_else(|| name.clone());
            columns.push(Column {
                table,
                name,
                display,
                ty: ColumnType::parse(ty),
            });
        }

        let mut primary_keys = Vec::new();
        for entry in self.primary_keys {
            let keys = match entry {
                PrimaryKeyEntry::Single(k) => vec![k],
                PrimaryKeyEntry::Composite(ks) => ks,
            };
            for k in keys {
                if k >= n_columns || columns[k].is_star() {
                    return Err(SchemaError::PrimaryKeyOutOfRange { db_id, column: k });
                }
                if !primary_keys.contains(&k) {
                    primary_keys.push(k);
                }
            }
        }

        for &(from, to) in &self.foreign_keys {
            if from >= n_columns || to >= n_columns {
                return Err(SchemaError::ForeignKeyOutOfRange {
                    db_id,
                    from,
                    to,
                    columns: n_columns,
                });
            }
            if from == to || columns[from].is_star() || columns[to].is_star() {
                return Err(SchemaError::DegenerateForeignKey { db_id, from, to });
            }
        }

        Ok(DatabaseSchema {
            db_id,
            tables,
            columns,
            primary_keys,
            foreign_keys: self.foreign_keys,
        })
    }
}

/// All schemas from one catalog file, plus the descriptors that failed validation.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub schemas: Vec<DatabaseSchema>,
    pub rejected: Vec<SchemaError>,
    by_id: HashMap<String, usize>,
}

impl Catalog {
    pub fn new(schemas: Vec<DatabaseSchema>) -> Self {
        let by_id = schemas
            .iter()
            .enumerate()
            .map(|(i, s)| (s.db_id.clone(), i))
            .collect();
        Catalog {
            schemas,
            rejected: Vec::new(),
            by_id,
        }
    }

    pub fn get(&self, db_id: &str) -> Option<&DatabaseSchema> {
        self.by_id.get(db_id).map(|&i| &self.schemas[i])
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    pub fn to_json(&self) -> JsonValue {
        JsonValue::Array(self.schemas.iter().map(|s| s.to_catalog_value()).collect())
    }
}

fn read_json_array(path: &Path) -> Result<Vec<JsonValue>, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: JsonValue = serde_json::from_str(&text).map_err(|source| DataError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    match value {
        JsonValue::Array(items) => Ok(items),
        _ => Err(DataError::NotAnArray {
            path: path.to_path_buf(),
        }),
    }
}

/// Loads a `tables.json`-style catalog. Invalid descriptors are collected in
/// [`Catalog::rejected`] instead of failing the whole file.
pub fn load_schema_catalog(path: &Path) -> Result<Catalog, DataError> {
    let items = read_json_array(path)?;
    Ok(catalog_from_values(&items))
}

pub fn catalog_from_values(items: &[JsonValue]) -> Catalog {
    let mut schemas = Vec::new();
    let mut rejected = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match DatabaseSchema::from_catalog_value(i, item) {
            Ok(s) => schemas.push(s),
            Err(e) => {
                log::warn!("rejecting catalog descriptor: {e}");
                rejected.push(e);
            }
        }
    }
    let mut catalog = Catalog::new(schemas);
    catalog.rejected = rejected;
    catalog
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum SampleFlag {
    MissingField(String),
    UnknownDb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Position in the source file.
    pub id: usize,
    pub question: String,
    /// `question` with runs of whitespace collapsed to single spaces.
    pub normalized_question: String,
    pub gold_sql: String,
    pub db_id: String,
    pub flag: Option<SampleFlag>,
}

impl SampleRecord {
    pub fn new(id: usize, question: &str, gold_sql: &str, db_id: &str) -> Self {
        SampleRecord {
            id,
            question: question.to_string(),
            normalized_question: collapse_whitespace(question),
            gold_sql: gold_sql.to_string(),
            db_id: db_id.to_string(),
            flag: None,
        }
    }

    pub fn is_usable(&self) -> bool {
        self.flag.is_none()
    }
}

pub(crate) fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Loads a Spider split file (`question`, `query`, `db_id`; other fields ignored).
pub fn load_samples(path: &Path) -> Result<Vec<SampleRecord>, DataError> {
    let items = read_json_array(path)?;
    Ok(samples_from_values(&items))
}

pub fn samples_from_values(items: &[JsonValue]) -> Vec<SampleRecord> {
    items
        .iter()
        .enumerate()
        .map(|(id, item)| {
            let field = |name: &str| item.get(name).and_then(JsonValue::as_str);
            let mut record = SampleRecord::new(
                id,
                field("question").unwrap_or_default(),
                field("query").unwrap_or_default(),
                field("db_id").unwrap_or_default(),
            );
            for name in ["question", "query", "db_id"] {
                if field(name).is_none() {
                    record.flag = Some(SampleFlag::MissingField(name.to_string()));
                    break;
                }
            }
            record
        })
        .collect()
}

/// Flags records whose `db_id` is not in `catalog`. Returns how many were flagged.
pub fn flag_unknown_databases(samples: &mut [SampleRecord], catalog: &Catalog) -> usize {
    let mut flagged = 0;
    for s in samples.iter_mut().filter(|s| s.flag.is_none()) {
        if catalog.get(&s.db_id).is_none() {
            s.flag = Some(SampleFlag::UnknownDb);
            flagged += 1;
        }
    }
    flagged
}

/// `<db_dir>/<db_id>/<db_id>.sqlite`, the Spider database layout.
pub fn database_path(db_dir: &Path, db_id: &str) -> PathBuf {
    db_dir.join(db_id).join(format!("{db_id}.sqlite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn pets_descriptor() -> JsonValue {
        json!({
            "db_id": "pets_1",
            "table_names_original": ["Student", "Has_Pet", "Pets"],
            "table_names": ["student", "has pet", "pets"],
            "column_names_original": [[-1, "*"], [0, "StuID"], [0, "LName"], [0, "Age"],
                [1, "StuID"], [1, "PetID"], [2, "PetID"], [2, "PetType"]],
            "column_types": ["text", "number", "text", "number", "number", "number", "number", "text"],
            "primary_keys": [1, 6],
            "foreign_keys": [[4, 1], [5, 6]]
        })
    }

    #[test]
    fn parses_descriptor_preserving_indices() {
        let s = DatabaseSchema::from_catalog_value(0, &pets_descriptor()).unwrap();
        assert_eq!(s.tables.len(), 3);
        assert_eq!(s.tables[1].display, "has pet");
        assert!(s.columns[0].is_star());
        assert_eq!(s.column_table(5), Some(1));
        assert_eq!(s.foreign_keys, vec![(4, 1), (5, 6)]);
        assert_eq!(s.qualified_name(7), "Pets.PetType");
        assert_eq!(s.columns_of(0).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn foreign_key_out_of_range_is_rejected_per_descriptor() {
        let mut bad = pets_descriptor();
        bad["db_id"] = json!("broken");
        bad["foreign_keys"] = json!([[999, 1]]);
        let catalog = catalog_from_values(&[pets_descriptor(), bad]);
        assert_eq!(catalog.len(), 1);
        assert_eq!(catalog.rejected.len(), 1);
        assert!(matches!(
            &catalog.rejected[0],
            SchemaError::ForeignKeyOutOfRange { db_id, from: 999, .. } if db_id == "broken"
        ));
    }

    #[test]
    fn composite_primary_keys_are_flattened() {
        let mut d = pets_descriptor();
        d["primary_keys"] = json!([1, [4, 5]]);
        let s = DatabaseSchema::from_catalog_value(0, &d).unwrap();
        assert_eq!(s.primary_keys, vec![1, 4, 5]);
    }

    #[test]
    fn catalog_round_trip_is_identity() {
        let s = DatabaseSchema::from_catalog_value(0, &pets_descriptor()).unwrap();
        let back = DatabaseSchema::from_catalog_value(0, &s.to_catalog_value()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn empty_catalog() {
        assert!(catalog_from_values(&[]).is_empty());
    }

    #[test]
    fn samples_flag_missing_fields_and_unknown_dbs() {
        let items = vec![
            json!({"question": "How  many\tsingers?", "query": "SELECT count(*) FROM singer", "db_id": "concert_singer"}),
            json!({"question": "Broken", "db_id": "concert_singer"}),
            json!({"question": "Elsewhere", "query": "SELECT 1", "db_id": "nowhere"}),
        ];
        let mut samples = samples_from_values(&items);
        assert_eq!(samples[0].normalized_question, "How many singers?");
        assert_eq!(
            samples[1].flag,
            Some(SampleFlag::MissingField("query".into()))
        );
        let mut d = pets_descriptor();
        d["db_id"] = json!("concert_singer");
        let catalog = catalog_from_values(&[d]);
        assert_eq!(flag_unknown_databases(&mut samples, &catalog), 1);
        assert_eq!(samples[2].flag, Some(SampleFlag::UnknownDb));
        assert!(samples[0].is_usable());
    }
}
