//! Dataset statistics: how many literals gold queries carry, and how many
//! of them the value pipeline finds.

use serde::{Deserialize, Serialize};

use crate::dataset::DatabaseSet;
use crate::hints::annotate_question;
use crate::normalize::canonical_number;
use crate::schema::{Catalog, SampleRecord};
use crate::sql::{gold_literals, parse_query, Literal, LiteralCounts};
use crate::values::{lookup_values, ValueConfig};

/// Queries bucketed by literal count; the last bucket is "4 or more".
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueHistogram {
    pub buckets: [usize; 5],
    pub queries_with_values: usize,
    pub total_values: usize,
}

impl ValueHistogram {
    pub fn add(&mut self, n: usize) {
        self.buckets[n.min(4)] += 1;
        self.queries_with_values += usize::from(n > 0);
        self.total_values += n;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueDistribution {
    pub samples: usize,
    /// Gold queries that did not parse; not counted in the histograms.
    pub unparsed: usize,
    pub with_limit: ValueHistogram,
    pub without_limit: ValueHistogram,
}

/// Literal counts of every parseable gold query, with and without LIMIT
/// operands. The schema, when known, lets quoted column names be told
/// apart from string literals.
pub fn value_distribution(samples: &[SampleRecord], catalog: &Catalog) -> ValueDistribution {
    let mut out = ValueDistribution::default();
    for s in samples {
        out.samples += 1;
        let Ok(q) = parse_query(&s.gold_sql) else {
            out.unparsed += 1;
            continue;
        };
        let counts = LiteralCounts::of(&q, catalog.get(&s.db_id));
        out.with_limit.add(counts.total(true));
        out.without_limit.add(counts.total(false));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecallReport {
    /// Samples whose gold query has at least one non-LIMIT literal.
    pub samples: usize,
    pub gold_values: usize,
    pub found: usize,
    pub recall: f64,
    pub skipped: usize,
}

fn comparable(s: &str) -> String {
    let t = s.trim().trim_matches('%').trim();
    canonical_number(t).unwrap_or_else(|| t.to_lowercase())
}

/// Whether any candidate surface equals the gold literal, ignoring case,
/// LIKE wildcards and number formatting.
pub fn literal_found(gold: &Literal, surfaces: &[String]) -> bool {
    let want = comparable(&gold.text);
    surfaces.iter().any(|s| comparable(s) == want)
}

/// Fraction of gold condition literals present in the candidate set that
/// the value pipeline builds without an entity recognizer.
pub fn candidate_recall(
    samples: &[SampleRecord],
    dbs: &DatabaseSet,
    config: &ValueConfig,
) -> RecallReport {
    let mut r = RecallReport::default();
    for s in samples {
        let (Some(db), Ok(q)) = (dbs.get(&s.db_id), parse_query(&s.gold_sql)) else {
            r.skipped += 1;
            continue;
        };
        if LiteralCounts::of(&q, Some(&db.schema)).total(false) == 0 {
            continue;
        }
        let Ok(conn) = db.connect() else {
            r.skipped += 1;
            continue;
        };
        // LIMIT operands are dropped by value; a condition "1" equal to a
        // LIMIT is rare enough to ignore.
        let limits = limit_literals(&s.gold_sql);
        let gold: Vec<Literal> = gold_literals(&q, Some(&db.schema))
            .into_iter()
            .filter(|l| !limits.contains(&l.text))
            .collect();
        if gold.is_empty() {
            continue;
        }
        let ann = annotate_question(&s.question, &db.schema, &db.index);
        let lookup = lookup_values(
            &s.question,
            &ann,
            &db.schema,
            &db.index,
            &conn,
            None,
            config,
        );
        let surfaces: Vec<String> = lookup
            .candidates
            .iter()
            .map(|c| c.surface.clone())
            .collect();
        r.samples += 1;
        r.gold_values += gold.len();
        r.found += gold.iter().filter(|g| literal_found(g, &surfaces)).count();
    }
    r.recall = if r.gold_values == 0 {
        0.0
    } else {
        r.found as f64 / r.gold_values as f64
    };
    r
}

fn limit_literals(sql: &str) -> Vec<String> {
    let words: Vec<&str> = sql.split_whitespace().collect();
    words
        .windows(2)
        .filter(|w| w[0].eq_ignore_ascii_case("limit"))
        .map(|w| w[1].trim_end_matches([';', ')']).to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::catalog_from_values;

    #[test]
    fn histogram_buckets() {
        let mut samples = Vec::new();
        for (i, sql) in [
            "SELECT name FROM t",
            "SELECT name FROM t WHERE a = 1",
            "SELECT name FROM t WHERE a = 1 AND b = 'x'",
            "SELECT name FROM t WHERE a = 1 AND b = 'x' ORDER BY c LIMIT 3",
            "SELECT name FROM t WHERE a BETWEEN 1 AND 2 OR b = 'x' OR c = 'y' OR d = 'z'",
            "SELECT name FROM t ORDER BY c LIMIT 1",
            "not sql at all",
        ]
        .iter()
        .enumerate()
        {
            samples.push(SampleRecord::new(i, "q", sql, "db"));
        }
        let d = value_distribution(&samples, &catalog_from_values(&[]));
        assert_eq!(d.unparsed, 1);
        assert_eq!(d.with_limit.buckets, [1, 2, 1, 1, 1]);
        assert_eq!(d.without_limit.buckets, [2, 1, 2, 0, 1]);
        assert_eq!(d.with_limit.total_values, 1 + 2 + 3 + 5 + 1);
        assert_eq!(d.without_limit.queries_with_values, 4);
    }

    #[test]
    fn literal_matching_ignores_case_wildcards_and_format() {
        let s = vec!["France".to_string(), "20".to_string(), "Ha".to_string()];
        assert!(literal_found(&Literal::text("france"), &s));
        assert!(literal_found(&Literal::number("20.0"), &s));
        assert!(literal_found(&Literal::text("%Ha%"), &s));
        assert!(!literal_found(&Literal::text("Germany"), &s));
    }

    #[test]
    fn recall_on_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let c = crate::fixtures::write_corpus(dir.path()).unwrap();
        let catalog = crate::schema::load_schema_catalog(&c.catalog).unwrap();
        let samples = crate::schema::load_samples(&c.samples).unwrap();
        let dbs = DatabaseSet::load(&catalog, &c.db_dir, None, None, &Default::default());
        let r = candidate_recall(&samples, &dbs, &ValueConfig::default());
        assert!(r.samples > 0 && r.gold_values >= r.samples);
        assert!(r.recall > 0.5, "{r:?}");
    }
}
