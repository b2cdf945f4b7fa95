//! Gold SQL -> SemQL -> SQL audits.

use std::collections::BTreeMap;

use rusqlite::Connection;
use serde::{Deserialize, Serialize};

use crate::compile::{compile, joins_have_on};
use crate::eval::{execute, results_equivalent, ExecLimits};
use crate::graph::SchemaGraph;
use crate::normalize::canonical_number;
use crate::schema::DatabaseSchema;
use crate::semql::{sql_to_semql, ConvertedQuery};
use crate::sql::{literal_tokens, Literal, LiteralKind};
use crate::values::ValueCandidate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RoundTrip {
    /// Converted and compiled; `equivalent` compares execution results.
    Accepted {
        compiled: String,
        equivalent: bool,
        literals_preserved: bool,
        gold_error: Option<String>,
        compiled_error: Option<String>,
    },
    Rejected {
        code: String,
        detail: String,
    },
    /// Converted, but the compiler refused the tree (a converter bug).
    CompileFailed {
        error: String,
    },
}

impl RoundTrip {
    pub fn is_accepted(&self) -> bool {
        matches!(self, RoundTrip::Accepted { .. })
    }

    /// Accepted and execution-equivalent.
    pub fn is_sound(&self) -> bool {
        matches!(
            self,
            RoundTrip::Accepted {
                equivalent: true,
                ..
            }
        )
    }
}

/// Light-mode candidates for a converted query: one per gold literal.
pub fn gold_candidates(converted: &ConvertedQuery) -> Vec<ValueCandidate> {
    converted
        .values
        .iter()
        .map(ValueCandidate::from_literal)
        .collect()
}

fn literal_key(l: &Literal) -> (LiteralKind, String) {
    let text = match l.kind {
        LiteralKind::Number => canonical_number(&l.text).unwrap_or_else(|| l.text.clone()),
        LiteralKind::Text => l.text.clone(),
    };
    (l.kind, text)
}

/// Whether the literals of `compiled` are exactly the V payload values.
pub fn literals_preserved(converted: &ConvertedQuery, compiled: &str) -> bool {
    let Ok(found) = literal_tokens(compiled) else {
        return false;
    };
    let mut want: Vec<_> = converted
        .tree
        .value_payloads()
        .iter()
        .filter_map(|&i| converted.values.get(i))
        .map(literal_key)
        .collect();
    let mut got: Vec<_> = found.iter().map(literal_key).collect();
    want.sort();
    got.sort();
    want == got
}

pub fn roundtrip(
    gold_sql: &str,
    schema: &DatabaseSchema,
    graph: &SchemaGraph,
    conn: &Connection,
    limits: ExecLimits,
) -> RoundTrip {
    let converted = match sql_to_semql(gold_sql, schema) {
        Ok(c) => c,
        Err(u) => {
            return RoundTrip::Rejected {
                code: u.code,
                detail: u.detail,
            }
        }
    };
    let candidates = gold_candidates(&converted);
    let compiled = match compile(&converted.tree, schema, graph, &candidates, "") {
        Ok(c) => c.sql,
        Err(e) => {
            return RoundTrip::CompileFailed {
                error: e.to_string(),
            }
        }
    };
    let gold = execute(conn, gold_sql, limits);
    let pred = execute(conn, &compiled, limits);
    RoundTrip::Accepted {
        equivalent: results_equivalent(&pred, &gold) && joins_have_on(&compiled),
        literals_preserved: literals_preserved(&converted, &compiled),
        gold_error: gold.error,
        compiled_error: pred.error,
        compiled,
    }
}

/// Acceptance rate and rejection histogram over many round trips.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundTripSummary {
    pub total: usize,
    pub accepted: usize,
    pub equivalent: usize,
    pub compile_failures: usize,
    pub literal_mismatches: usize,
    pub reasons: BTreeMap<String, usize>,
}

impl RoundTripSummary {
    pub fn add(&mut self, r: &RoundTrip) {
        self.total += 1;
        match r {
            RoundTrip::Accepted {
                equivalent,
                literals_preserved,
                ..
            } => {
                self.accepted += 1;
                self.equivalent += usize::from(*equivalent);
                self.literal_mismatches += usize::from(!literals_preserved);
            }
            RoundTrip::Rejected { code, .. } => *self.reasons.entry(code.clone()).or_default() += 1,
            RoundTrip::CompileFailed { .. } => self.compile_failures += 1,
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.accepted as f64 / self.total as f64
        }
    }

    /// Every accepted query compiled, executed equivalently and kept its literals.
    pub fn is_sound(&self) -> bool {
        self.compile_failures == 0
            && self.equivalent == self.accepted
            && self.literal_mismatches == 0
    }
}
