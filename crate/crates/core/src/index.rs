//! Inverted index from normalized cell values to their locations.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use log::warn;
use rusqlite::Connection;
use serde::{Deserialize, Serialize};

use crate::distance::{damerau_levenshtein_bounded, ThresholdPolicy};
use crate::normalize::{canonical_number, normalize_value, value_tokens};
use crate::schema::DatabaseSchema;
use crate::sqlite::{quote_ident, table_exists, Cell};

pub const DEFAULT_DISTINCT_CAP: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("sqlite: {0}")]
    Sqlite(#[from] rusqlite::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexConfig {
    pub distinct_cap: usize,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            distinct_cap: DEFAULT_DISTINCT_CAP,
        }
    }
}

/// Where a value lives, with the value exactly as stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueLocation {
    pub table: usize,
    pub column: usize,
    pub raw: Cell,
}

impl ValueLocation {
    pub fn surface(&self) -> String {
        self.raw.render().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityHit {
    pub location: ValueLocation,
    pub normalized: String,
    pub distance: usize,
}

/// Serialized form; entries sorted by key so rebuilds are byte-identical.
#[derive(Serialize, Deserialize)]
struct IndexFile {
    db_id: String,
    distinct_cap: usize,
    overflow: Vec<(usize, usize)>,
    entries: Vec<(String, Vec<ValueLocation>)>,
}

type BigramKey = (char, char, u32);

#[derive(Debug, Clone, Default)]
pub struct ValueIndex {
    pub db_id: String,
    pub config: IndexConfig,
    keys: Vec<String>,
    locations: Vec<Vec<ValueLocation>>,
    by_key: HashMap<String, u32>,
    /// Constituent token -> entries of multi-token values.
    tokens: BTreeMap<String, Vec<u32>>,
    /// Columns whose distinct values exceeded the cap.
    overflow: Vec<(usize, usize)>,
    chars: Vec<Vec<char>>,
    by_len: Vec<Vec<u32>>,
    bigrams: HashMap<BigramKey, Vec<u32>>,
}

fn bigram_keys(chars: &[char]) -> Vec<BigramKey> {
    let mut seen: HashMap<(char, char), u32> = HashMap::new();
    chars
        .windows(2)
        .map(|w| {
            let n = seen.entry((w[0], w[1])).or_insert(0);
            *n += 1;
            (w[0], w[1], *n)
        })
        .collect()
}

impl ValueIndex {
    fn from_entries(
        db_id: String,
        config: IndexConfig,
        entries: BTreeMap<String, Vec<ValueLocation>>,
        overflow: Vec<(usize, usize)>,
    ) -> Self {
        let mut idx = ValueIndex {
            db_id,
            config,
            overflow,
            ..Default::default()
        };
        for (i, (key, locs)) in entries.into_iter().enumerate() {
            let id = i as u32;
            let chars: Vec<char> = key.chars().collect();
            if idx.by_len.len() <= chars.len() {
                idx.by_len.resize(chars.len() + 1, Vec::new());
            }
            idx.by_len[chars.len()].push(id);
            for b in bigram_keys(&chars) {
                idx.bigrams.entry(b).or_default().push(id);
            }
            let toks: Vec<&str> = value_tokens(&key).collect();
            if toks.len() > 1 {
                for t in toks {
                    let list = idx.tokens.entry(t.to_string()).or_default();
                    if list.last() != Some(&id) {
                        list.push(id);
                    }
                }
            }
            idx.by_key.insert(key.clone(), id);
            idx.keys.push(key);
            idx.chars.push(chars);
            idx.locations.push(locs);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn overflow_columns(&self) -> &[(usize, usize)] {
        &self.overflow
    }

    pub fn is_overflow(&self, table: usize, column: usize) -> bool {
        self.overflow.contains(&(table, column))
    }

    /// Normalized keys with their locations, in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &[ValueLocation])> {
        self.keys
            .iter()
            .zip(&self.locations)
            .map(|(k, l)| (k.as_str(), l.as_slice()))
    }

    /// Locations whose normalized value equals the normalization of `token`.
    pub fn lookup_exact(&self, token: &str) -> &[ValueLocation] {
        match self.by_key.get(&normalize_value(token)) {
            Some(&id) => &self.locations[id as usize],
            None => &[],
        }
    }

    /// [`Self::lookup_exact`] plus direct probes of overflow columns.
    pub fn lookup_exact_with(
        &self,
        conn: &Connection,
        schema: &DatabaseSchema,
        token: &str,
    ) -> Result<Vec<ValueLocation>, rusqlite::Error> {
        let mut out = self.lookup_exact(token).to_vec();
        for &(t, c) in &self.overflow {
            if let Some(raw) = probe_column(conn, schema, t, c, token)? {
                out.push(ValueLocation {
                    table: t,
                    column: c,
                    raw,
                });
            }
        }
        Ok(out)
    }

    /// Multi-token values containing `token` as one of their tokens.
    pub fn lookup_partial(&self, token: &str) -> Vec<(&str, &[ValueLocation])> {
        let key = normalize_value(token);
        self.tokens
            .get(&key)
            .into_iter()
            .flatten()
            .map(|&id| {
                (
                    self.keys[id as usize].as_str(),
                    self.locations[id as usize].as_slice(),
                )
            })
            .collect()
    }

    /// Every indexed value within the policy's distance of `probe`, with
    /// blocking that never drops a qualifying value.
    pub fn similarity_search(&self, probe: &str, policy: &ThresholdPolicy) -> Vec<SimilarityHit> {
        let norm = normalize_value(probe);
        let pc: Vec<char> = norm.chars().collect();
        let t = policy.threshold(pc.len());
        let mut hits = Vec::new();
        for id in self.blocked_candidates(&pc, t) {
            if let Some(d) = damerau_levenshtein_bounded(&pc, &self.chars[id as usize], t) {
                for loc in &self.locations[id as usize] {
                    hits.push(SimilarityHit {
                        location: loc.clone(),
                        normalized: self.keys[id as usize].clone(),
                        distance: d,
                    });
                }
            }
        }
        hits.sort_by(|a, b| {
            (
                a.distance,
                &a.normalized,
                a.location.table,
                a.location.column,
            )
                .cmp(&(
                    b.distance,
                    &b.normalized,
                    b.location.table,
                    b.location.column,
                ))
        });
        hits
    }

    /// Same answer as [`Self::similarity_search`] by scanning every entry.
    pub fn similarity_scan(&self, probe: &str, policy: &ThresholdPolicy) -> Vec<SimilarityHit> {
        let norm = normalize_value(probe);
        let pc: Vec<char> = norm.chars().collect();
        let t = policy.threshold(pc.len());
        let mut hits = Vec::new();
        for (id, chars) in self.chars.iter().enumerate() {
            if let Some(d) = damerau_levenshtein_bounded(&pc, chars, t) {
                for loc in &self.locations[id] {
                    hits.push(SimilarityHit {
                        location: loc.clone(),
                        normalized: self.keys[id].clone(),
                        distance: d,
                    });
                }
            }
        }
        hits.sort_by(|a, b| {
            (
                a.distance,
                &a.normalized,
                a.location.table,
                a.location.column,
            )
                .cmp(&(
                    b.distance,
                    &b.normalized,
                    b.location.table,
                    b.location.column,
                ))
        });
        hits
    }

    /// Entry ids that survive the length band and the bigram count filter.
    ///
    /// One edit operation destroys at most three bigrams (an adjacent
    /// transposition touches three), so two strings within distance `t`
    /// share at least `max(la, lb) - 1 - 3t` bigrams counted as multisets.
    fn blocked_candidates(&self, probe: &[char], t: usize) -> Vec<u32> {
        let lp = probe.len();
        if t == 0 {
            let key: String = probe.iter().collect();
            return self.by_key.get(&key).copied().into_iter().collect();
        }
        let lo = lp.saturating_sub(t);
        let hi = (lp + t).min(self.by_len.len().saturating_sub(1));
        if lo > hi {
            return Vec::new();
        }
        // The weakest bound over the band comes from its shortest length.
        let weakest = lp.max(lo) as isize - 1 - 3 * t as isize;
        if weakest <= 0 {
            return (lo..=hi)
                .flat_map(|l| self.by_len[l].iter().copied())
                .collect();
        }
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for b in bigram_keys(probe) {
            if let Some(list) = self.bigrams.get(&b) {
                for &id in list {
                    *counts.entry(id).or_insert(0) += 1;
                }
            }
        }
        let mut out: Vec<u32> = counts
            .into_iter()
            .filter(|&(id, shared)| {
                let l = self.chars[id as usize].len();
                if l < lo || l > hi {
                    return false;
                }
                let need = lp.max(l) as isize - 1 - 3 * t as isize;
                shared as isize >= need
            })
            .map(|(id, _)| id)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let file = IndexFile {
            db_id: self.db_id.clone(),
            distinct_cap: self.config.distinct_cap,
            overflow: self.overflow.clone(),
            entries: self
                .keys
                .iter()
                .cloned()
                .zip(self.locations.iter().cloned())
                .collect(),
        };
        serde_json::to_string(&file)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        let file: IndexFile = serde_json::from_str(s)?;
        Ok(Self::from_entries(
            file.db_id,
            IndexConfig {
                distinct_cap: file.distinct_cap,
            },
            file.entries.into_iter().collect(),
            file.overflow,
        ))
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        Ok(Self::from_json(&std::fs::read_to_string(path)?)?)
    }

    /// In-memory index over arbitrary values, for tests and benchmarks.
    pub fn from_values<I>(db_id: &str, values: I) -> Self
    where
        I: IntoIterator<Item = ValueLocation>,
    {
        let mut entries: BTreeMap<String, Vec<ValueLocation>> = BTreeMap::new();
        for loc in values {
            let Some(s) = loc.raw.render() else { continue };
            let list = entries.entry(normalize_value(&s)).or_default();
            if !list.contains(&loc) {
                list.push(loc);
            }
        }
        Self::from_entries(
            db_id.to_string(),
            IndexConfig::default(),
            entries,
            Vec::new(),
        )
    }
}

fn probe_column(
    conn: &Connection,
    schema: &DatabaseSchema,
    table: usize,
    column: usize,
    token: &str,
) -> rusqlite::Result<Option<Cell>> {
    let t = quote_ident(&schema.tables[table].name);
    let c = quote_ident(&schema.columns[column].name);
    let trimmed = token.trim();
    let row = if let Some(n) = canonical_number(trimmed) {
        let sql =
            format!("SELECT {c} FROM {t} WHERE {c} = CAST(?1 AS NUMERIC) OR {c} = ?2 LIMIT 1");
        conn.prepare_cached(&sql)?
            .query_row(rusqlite::params![n, trimmed], |r| {
                Ok(Cell::from_ref(r.get_ref(0)?))
            })
    } else {
        let sql = format!("SELECT {c} FROM {t} WHERE {c} = ?1 COLLATE NOCASE LIMIT 1");
        conn.prepare_cached(&sql)?
            .query_row([trimmed], |r| Ok(Cell::from_ref(r.get_ref(0)?)))
    };
    match row {
        Ok(cell) => Ok(Some(cell)),
        Err(rusqlite::Error::QueryReturnedNoRows) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Index every distinct non-null value of every column. Tables missing
/// from the database are skipped with a warning.
pub fn build_value_index(
    conn: &Connection,
    schema: &DatabaseSchema,
    config: &IndexConfig,
) -> Result<ValueIndex, IndexError> {
    let mut entries: BTreeMap<String, Vec<ValueLocation>> = BTreeMap::new();
    let mut overflow = Vec::new();
    for (ti, table) in schema.tables.iter().enumerate() {
        if !table_exists(conn, &table.name)? {
            warn!(
                "{}: table {} missing from database, skipped",
                schema.db_id, table.name
            );
            continue;
        }
        for ci in schema.columns_of(ti) {
            let sql = format!(
                "SELECT DISTINCT {} FROM {} LIMIT {}",
                quote_ident(&schema.columns[ci].name),
                quote_ident(&table.name),
                config.distinct_cap as u64 + 1
            );
            let mut stmt = match conn.prepare(&sql) {
                Ok(s) => s,
                Err(e) => {
                    warn!(
                        "{}: column {} unreadable: {e}",
                        schema.db_id,
                        schema.qualified_name(ci)
                    );
                    continue;
                }
            };
            let mut rows = stmt.query([])?;
            let mut values = Vec::new();
            while let Some(row) = rows.next()? {
                values.push(Cell::from_ref(row.get_ref(0)?));
            }
            if values.len() > config.distinct_cap {
                overflow.push((ti, ci));
                continue;
            }
            for raw in values {
                let Some(s) = raw.render() else { continue };
                let key = normalize_value(&s);
                if key.is_empty() {
                    continue;
                }
                let loc = ValueLocation {
                    table: ti,
                    column: ci,
                    raw,
                };
                let list = entries.entry(key).or_default();
                if !list.contains(&loc) {
                    list.push(loc);
                }
            }
        }
    }
    for list in entries.values_mut() {
        list.sort_by(|a, b| {
            (a.table, a.column)
                .cmp(&(b.table, b.column))
                .then_with(|| a.surface().cmp(&b.surface()))
        });
    }
    Ok(ValueIndex::from_entries(
        schema.db_id.clone(),
        config.clone(),
        entries,
        overflow,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pets_index() -> (ValueIndex, DatabaseSchema, Connection) {
        let db = fixtures::pets();
        let conn = db.open_in_memory();
        let idx = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        (idx, db.schema, conn)
    }

    #[test]
    fn exact_lookup_is_case_insensitive() {
        let (idx, schema, _) = pets_index();
        let hits = idx.lookup_exact("FRANCE");
        assert_eq!(hits.len(), 1);
        assert_eq!(
            schema.qualified_name(hits[0].column),
            "Student.home_country"
        );
        assert_eq!(hits[0].raw, Cell::Text("France".into()));
        assert!(idx.lookup_exact("zzz-not-present").is_empty());
    }

    #[test]
    fn numbers_use_canonical_keys() {
        let (idx, schema, _) = pets_index();
        let cols: Vec<String> = idx
            .lookup_exact("20")
            .iter()
            .map(|l| schema.qualified_name(l.column))
            .collect();
        assert!(cols.contains(&"Student.age".to_string()));
        assert!(
            !idx.lookup_exact("12.0").is_empty(),
            "real weight 12.0 under key 12"
        );
    }

    #[test]
    fn partial_lookup_reaches_multi_token_values() {
        let db = fixtures::flights();
        let conn = db.open_in_memory();
        let idx = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        let hits = idx.lookup_partial("Kennedy");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, "john f kennedy international");
    }

    #[test]
    fn empty_database_gives_empty_index() {
        let db = fixtures::path_graph();
        let conn = db.open_in_memory();
        let idx = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        assert!(idx.is_empty());
    }

    #[test]
    fn missing_table_is_skipped() {
        let db = fixtures::pets();
        let conn = Connection::open_in_memory().unwrap();
        conn.execute_batch(&db.ddl[0]).unwrap();
        conn.execute_batch("INSERT INTO Student VALUES (1, 'Ann', 20, 'Peru')")
            .unwrap();
        let idx = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        assert_eq!(idx.lookup_exact("peru").len(), 1);
    }

    #[test]
    fn overflow_columns_answer_by_direct_query() {
        let db = fixtures::pets();
        let conn = db.open_in_memory();
        let idx = build_value_index(&conn, &db.schema, &IndexConfig { distinct_cap: 4 }).unwrap();
        let name = db.schema.column_index(0, "Name").unwrap();
        assert!(idx.is_overflow(0, name));
        assert!(idx.lookup_exact("Linda").is_empty());
        let found = idx.lookup_exact_with(&conn, &db.schema, "LINDA").unwrap();
        assert!(found
            .iter()
            .any(|l| l.column == name && l.raw == Cell::Text("Linda".into())));
        let age = db.schema.column_index(0, "age").unwrap();
        assert!(idx.is_overflow(0, age));
        let found = idx.lookup_exact_with(&conn, &db.schema, "26.0").unwrap();
        assert!(found.iter().any(|l| l.column == age));
    }

    #[test]
    fn similarity_finds_typos() {
        let (idx, _, _) = pets_index();
        let hits = idx.similarity_search("Frence", &ThresholdPolicy::Fixed(2));
        assert_eq!(hits[0].normalized, "france");
        assert_eq!(hits[0].distance, 1);
        let exact = idx.similarity_search("Germany", &ThresholdPolicy::LengthScaled);
        assert_eq!(exact[0].distance, 0);
        let none = idx.similarity_search("Gxrmxnx", &ThresholdPolicy::Fixed(2));
        assert!(none.iter().all(|h| h.normalized != "germany"));
    }

    #[test]
    fn cache_round_trip_is_byte_identical() {
        let (idx, _, _) = pets_index();
        let json = idx.to_json().unwrap();
        let back = ValueIndex::from_json(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
        assert_eq!(back.lookup_exact("france"), idx.lookup_exact("france"));
    }
}
