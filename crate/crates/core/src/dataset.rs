//! Databases of a split prepared for translation: schema, join graph and
//! value index per db_id, with an optional on-disk index cache.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::graph::{build_schema_graph, SchemaGraph};
use crate::index::{build_value_index, IndexConfig, IndexError, ValueIndex};
use crate::pipeline::Resources;
use crate::schema::{database_path, Catalog, DatabaseSchema};
use crate::sqlite::open_read_only;

pub struct PreparedDatabase {
    pub schema: DatabaseSchema,
    pub graph: SchemaGraph,
    pub index: ValueIndex,
    pub path: PathBuf,
}

impl PreparedDatabase {
    pub fn resources<'a>(&'a self, conn: &'a rusqlite::Connection) -> Resources<'a> {
        Resources {
            schema: &self.schema,
            graph: &self.graph,
            index: &self.index,
            conn,
        }
    }

    pub fn connect(&self) -> rusqlite::Result<rusqlite::Connection> {
        open_read_only(&self.path)
    }
}

pub fn index_cache_path(cache_dir: &Path, db_id: &str) -> PathBuf {
    cache_dir.join(format!("{db_id}.index.json"))
}

/// Build the index of one database from its file.
pub fn index_database(
    schema: &DatabaseSchema,
    path: &Path,
    config: &IndexConfig,
) -> Result<ValueIndex, IndexError> {
    let conn = open_read_only(path)?;
    build_value_index(&conn, schema, config)
}

#[derive(Default)]
pub struct DatabaseSet {
    dbs: BTreeMap<String, PreparedDatabase>,
    /// db_id to the reason it could not be prepared.
    pub unavailable: BTreeMap<String, String>,
}

impl DatabaseSet {
    /// Prepare the catalog's databases, or only those in `wanted`. A cached
    /// index is used when it loads and belongs to the same db_id.
    pub fn load(
        catalog: &Catalog,
        db_dir: &Path,
        wanted: Option<&BTreeSet<String>>,
        cache_dir: Option<&Path>,
        config: &IndexConfig,
    ) -> Self {
        let schemas: Vec<&DatabaseSchema> = catalog
            .schemas
            .iter()
            .filter(|s| wanted.is_none_or(|w| w.contains(&s.db_id)))
            .collect();
        let prepared: Vec<(String, Result<PreparedDatabase, String>)> = schemas
            .par_iter()
            .map(|schema| {
                let path = database_path(db_dir, &schema.db_id);
                let result = if !path.is_file() {
                    Err(format!("database file {} not found", path.display()))
                } else {
                    let cached = cache_dir
                        .map(|d| index_cache_path(d, &schema.db_id))
                        .filter(|p| p.is_file())
                        .and_then(|p| match ValueIndex::load(&p) {
                            Ok(ix) if ix.db_id == schema.db_id => Some(ix),
                            Ok(_) => None,
                            Err(e) => {
                                warn!("ignoring index cache {}: {e}", p.display());
                                None
                            }
                        });
                    match cached {
                        Some(ix) => Ok(ix),
                        None => index_database(schema, &path, config).map_err(|e| e.to_string()),
                    }
                    .map(|index| PreparedDatabase {
                        schema: (*schema).clone(),
                        graph: build_schema_graph(schema),
                        index,
                        path,
                    })
                };
                (schema.db_id.clone(), result)
            })
            .collect();
        let mut set = DatabaseSet::default();
        for (id, r) in prepared {
            match r {
                Ok(db) => {
                    set.dbs.insert(id, db);
                }
                Err(e) => {
                    warn!("{id}: {e}");
                    set.unavailable.insert(id, e);
                }
            }
        }
        info!(
            "{} databases ready, {} unavailable",
            set.dbs.len(),
            set.unavailable.len()
        );
        set
    }

    pub fn get(&self, db_id: &str) -> Option<&PreparedDatabase> {
        self.dbs.get(db_id)
    }

    pub fn len(&self) -> usize {
        self.dbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dbs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PreparedDatabase> {
        self.dbs.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::schema::load_schema_catalog;

    #[test]
    fn loads_corpus_and_reports_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = fixtures::write_corpus(dir.path()).unwrap();
        let catalog = load_schema_catalog(&corpus.catalog).unwrap();
        std::fs::remove_file(database_path(&corpus.db_dir, "pets_1")).unwrap();
        let set = DatabaseSet::load(
            &catalog,
            &corpus.db_dir,
            None,
            None,
            &IndexConfig::default(),
        );
        assert_eq!(set.len() + 1, catalog.len());
        assert!(set.unavailable.contains_key("pets_1"));
        let flights = set.get("flight_4").unwrap();
        assert!(!flights.index.lookup_exact("JFK").is_empty());
    }

    #[test]
    fn cached_indexes_are_used() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = fixtures::write_corpus(dir.path()).unwrap();
        let catalog = load_schema_catalog(&corpus.catalog).unwrap();
        let cache = dir.path().join("cache");
        let schema = catalog.get("pets_1").unwrap();
        // A cache built from an emptied copy proves the file is read.
        let empty = ValueIndex::from_values("pets_1", std::iter::empty());
        empty.save(&index_cache_path(&cache, "pets_1")).unwrap();
        let wanted: BTreeSet<String> = ["pets_1".to_string()].into();
        let set = DatabaseSet::load(
            &catalog,
            &corpus.db_dir,
            Some(&wanted),
            Some(&cache),
            &IndexConfig::default(),
        );
        assert_eq!(set.len(), 1);
        assert!(set.get("pets_1").unwrap().index.is_empty());
        let fresh = index_database(
            schema,
            &database_path(&corpus.db_dir, "pets_1"),
            &IndexConfig::default(),
        )
        .unwrap();
        assert!(!fresh.is_empty());
    }
}
