//! What a policy sees: question, hints, schema and value candidates.

use rusqlite::Connection;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as JsonValue};

use crate::hints::{annotate_question, annotate_schema, QuestionAnnotation, SchemaAnnotation};
use crate::index::ValueIndex;
use crate::schema::DatabaseSchema;
use crate::sql::Literal;
use crate::values::{
    lookup_values, CandidateSet, ExtractedValue, NerClient, ValueCandidate, ValueConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "options", rename_all = "snake_case")]
pub enum ContextMode {
    /// Run the value pipeline.
    Full,
    /// Install the given ground-truth values as the whole candidate set.
    Light(Vec<Literal>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingContext {
    pub question: String,
    pub annotation: QuestionAnnotation,
    pub schema: DatabaseSchema,
    pub schema_hints: SchemaAnnotation,
    /// V payloads index into this list.
    pub candidates: CandidateSet,
    pub extracted: Vec<ExtractedValue>,
    pub light: bool,
}

impl EncodingContext {
    pub fn new(
        question: &str,
        schema: &DatabaseSchema,
        annotation: QuestionAnnotation,
        candidates: CandidateSet,
        extracted: Vec<ExtractedValue>,
        light: bool,
    ) -> Self {
        let schema_hints = annotate_schema(question, schema, &candidates.candidates);
        EncodingContext {
            question: question.to_string(),
            annotation,
            schema: schema.clone(),
            schema_hints,
            candidates,
            extracted,
            light,
        }
    }

    /// Compact JSON handed to external policies: hint classes, schema
    /// items with their classes, and candidates with their locations.
    pub fn digest(&self) -> JsonValue {
        let tokens: Vec<JsonValue> = self
            .annotation
            .tokens
            .iter()
            .map(|t| json!({"text": t.token.text, "class": t.class, "target": t.target}))
            .collect();
        let tables: Vec<JsonValue> = self
            .schema
            .tables
            .iter()
            .zip(&self.schema_hints.tables)
            .map(|(t, c)| json!({"name": t.name, "class": c}))
            .collect();
        let columns: Vec<JsonValue> = self
            .schema
            .columns
            .iter()
            .zip(&self.schema_hints.columns)
            .map(|(col, c)| json!({"name": col.name, "table": col.table, "type": col.ty.as_str(), "class": c}))
            .collect();
        let candidates: Vec<JsonValue> = self
            .candidates
            .iter()
            .map(|c| {
                let locations: Vec<String> = c
                    .locations()
                    .map(|(_, col)| self.schema.qualified_name(col))
                    .collect();
                json!({"surface": c.surface, "origin": c.origin, "locations": locations})
            })
            .collect();
        json!({
            "question": self.question,
            "tokens": tokens,
            "tables": tables,
            "columns": columns,
            "candidates": candidates,
        })
    }
}

/// Ground-truth options in their given order, each located by exact lookup
/// and tied to its first mention in the question when there is one.
pub fn light_candidates(question: &str, options: &[Literal], index: &ValueIndex) -> CandidateSet {
    let lower = question.to_lowercase();
    let candidates = options
        .iter()
        .map(|lit| {
            let mut c = ValueCandidate::from_literal(lit);
            let mut locs = index
                .lookup_exact(&lit.text)
                .iter()
                .map(|l| (l.table, l.column));
            c.location = locs.next();
            c.other_locations = locs.collect();
            c.validated = c.location.is_some();
            let needle = lit.text.to_lowercase();
            if !needle.is_empty() {
                if let Some(b) = lower.find(&needle) {
                    let start = lower[..b].chars().count();
                    c.span = Some((start, start + needle.chars().count()));
                }
            }
            c
        })
        .collect();
    CandidateSet { candidates }
}

pub fn build_context(
    question: &str,
    schema: &DatabaseSchema,
    index: &ValueIndex,
    conn: &Connection,
    mode: &ContextMode,
    ner: Option<&mut NerClient>,
    config: &ValueConfig,
) -> EncodingContext {
    let annotation = annotate_question(question, schema, index);
    match mode {
        ContextMode::Full => {
            let lookup = lookup_values(question, &annotation, schema, index, conn, ner, config);
            EncodingContext::new(
                question,
                schema,
                annotation,
                lookup.candidates,
                lookup.extracted,
                false,
            )
        }
        ContextMode::Light(options) => {
            let candidates = light_candidates(question, options, index);
            EncodingContext::new(question, schema, annotation, candidates, Vec::new(), true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::index::{build_value_index, IndexConfig};

    #[test]
    fn light_mode_installs_exactly_the_options() {
        let db = fixtures::flights();
        let conn = db.open_in_memory();
        let index = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        let mode = ContextMode::Light(vec![Literal::text("JFK"), Literal::number("6")]);
        let q = "Which flights go to John F Kennedy International Airport?";
        let ctx = build_context(
            q,
            &db.schema,
            &index,
            &conn,
            &mode,
            None,
            &ValueConfig::default(),
        );
        let s: Vec<&str> = ctx.candidates.iter().map(|c| c.surface.as_str()).collect();
        assert_eq!(s, ["JFK", "6"]);
        let (_, col) = ctx.candidates.get(0).unwrap().location.unwrap();
        assert_eq!(db.schema.qualified_name(col), "flight.Destination");
        assert!(ctx.light);
        let digest = ctx.digest();
        assert_eq!(
            digest["candidates"][0]["locations"][0],
            "flight.Destination"
        );
    }

    #[test]
    fn full_mode_without_values_is_valid() {
        let db = fixtures::airport_directory();
        let conn = db.open_in_memory();
        let index = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        let ctx = build_context(
            "Show all airports.",
            &db.schema,
            &index,
            &conn,
            &ContextMode::Full,
            None,
            &ValueConfig::default(),
        );
        assert!(ctx.candidates.is_empty());
        assert_eq!(ctx.schema_hints.columns.len(), db.schema.columns.len());
    }
}
