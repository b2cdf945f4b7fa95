//! Database validation of candidates, key aliases and the size cap.

use log::warn;
use rusqlite::{Connection, OptionalExtension};

use crate::index::{ValueIndex, ValueLocation};
use crate::schema::{ColumnType, DatabaseSchema};
use crate::sqlite::{quote_ident, Cell};

use super::candidate::{CandidateSet, Origin, ValueCandidate};

pub const DEFAULT_CANDIDATE_CAP: usize = 50;

fn located(c: &ValueCandidate, loc: &ValueLocation) -> ValueCandidate {
    let mut v = c.clone();
    v.surface = loc.surface();
    v.location = Some((loc.table, loc.column));
    v.other_locations.clear();
    v.stored = Some(loc.raw.clone());
    v.validated = true;
    v.unverified = false;
    v
}

/// Locate candidates by exact lookup. Non-exempt candidates are dropped
/// when nothing matches and split into one candidate per location when
/// something does; exempt ones are kept either way. Wildcard patterns are
/// probed with LIKE and never dropped. Database errors keep the candidate,
/// flagged unverified.
pub fn validate_candidates(
    cands: Vec<ValueCandidate>,
    index: &ValueIndex,
    conn: &Connection,
    schema: &DatabaseSchema,
) -> Vec<ValueCandidate> {
    let mut out = Vec::new();
    for c in cands {
        if c.is_wildcard() {
            match like_probe(conn, schema, &c.surface) {
                Ok(locs) if !locs.is_empty() => {
                    for (t, col) in locs {
                        let mut v = c.clone();
                        v.location = Some((t, col));
                        v.validated = true;
                        out.push(v);
                    }
                }
                Ok(_) => out.push(c),
                Err(e) => {
                    warn!("LIKE probe for {:?} failed: {e}", c.surface);
                    let mut v = c;
                    v.unverified = true;
                    out.push(v);
                }
            }
            continue;
        }
        let locs = match index.lookup_exact_with(conn, schema, &c.surface) {
            Ok(l) => l,
            Err(e) => {
                warn!("validation of {:?} failed: {e}", c.surface);
                let mut v = c;
                v.unverified = true;
                out.push(v);
                continue;
            }
        };
        if let Some(want) = c.location {
            match locs.iter().find(|l| (l.table, l.column) == want) {
                Some(l) => out.push(located(&c, l)),
                None if c.exempt => {
                    let mut v = c;
                    v.location = None;
                    v.stored = None;
                    out.push(v);
                }
                None => {}
            }
        } else if !locs.is_empty() {
            out.extend(locs.iter().map(|l| located(&c, l)));
        } else if c.exempt {
            out.push(c);
        }
    }
    out
}

/// Columns with a value matching the LIKE pattern.
fn like_probe(
    conn: &Connection,
    schema: &DatabaseSchema,
    pattern: &str,
) -> rusqlite::Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (ci, col) in schema.columns.iter().enumerate() {
        let Some(t) = col.table else { continue };
        if col.ty == ColumnType::Number {
            continue;
        }
        let sql = format!(
            "SELECT 1 FROM {} WHERE CAST({} AS TEXT) LIKE ?1 LIMIT 1",
            quote_ident(&schema.tables[t].name),
            quote_ident(&col.name)
        );
        let found: Option<i64> = conn.query_row(&sql, [pattern], |r| r.get(0)).optional()?;
        if found.is_some() {
            out.push((t, ci));
        }
    }
    Ok(out)
}

/// Text primary keys standing for validated values of their row
/// ("John F Kennedy International" -> "JFK"). They are what foreign keys
/// store, so questions naming the entity usually need the key.
pub fn key_aliases(
    cands: &[ValueCandidate],
    schema: &DatabaseSchema,
    conn: &Connection,
) -> Vec<ValueCandidate> {
    let mut out = Vec::new();
    for c in cands.iter().filter(|c| c.validated) {
        let (Some((t, col)), Some(stored)) = (c.location, c.stored.as_ref()) else {
            continue;
        };
        if schema.is_primary_key(col) {
            continue;
        }
        let keys: Vec<usize> = schema
            .primary_keys
            .iter()
            .copied()
            .filter(|&k| schema.column_table(k) == Some(t))
            .collect();
        let [key] = keys[..] else { continue };
        let referenced = schema.foreign_keys.iter().any(|&(_, to)| to == key);
        if schema.columns[key].ty != ColumnType::Text || !referenced {
            continue;
        }
        let sql = format!(
            "SELECT DISTINCT {} FROM {} WHERE {} = ?1 LIMIT 5",
            quote_ident(&schema.columns[key].name),
            quote_ident(&schema.tables[t].name),
            quote_ident(&schema.columns[col].name)
        );
        let rows = conn.prepare(&sql).and_then(|mut s| {
            let vals = s
                .query_map([stored], |r| Ok(Cell::from_ref(r.get_ref(0)?)))?
                .collect::<rusqlite::Result<Vec<_>>>();
            vals
        });
        match rows {
            Ok(vals) => {
                for v in vals {
                    let Some(surface) = v.render() else { continue };
                    let mut a = ValueCandidate::new(surface, Origin::KeyAlias).with_span(c.span);
                    a.distance = c.distance;
                    out.push(a);
                }
            }
            Err(e) => warn!("key alias lookup failed: {e}"),
        }
    }
    out
}

/// Keep at most `cap` candidates, preferring lower origin priority, then
/// smaller distance, then question order; the survivors in canonical order.
pub fn cap_candidates(mut cands: Vec<ValueCandidate>, cap: usize) -> CandidateSet {
    let set = CandidateSet::from_unordered(std::mem::take(&mut cands));
    let mut ranked: Vec<(usize, ValueCandidate)> = set.candidates.into_iter().enumerate().collect();
    ranked.sort_by_key(|(i, c)| (c.origin.priority(), c.distance, *i));
    ranked.truncate(cap);
    ranked.sort_by_key(|(i, _)| *i);
    CandidateSet {
        candidates: ranked.into_iter().map(|(_, c)| c).collect(),
    }
}
