//! The full value lookup for one question.

use rusqlite::Connection;
use serde::{Deserialize, Serialize};

use crate::distance::ThresholdPolicy;
use crate::hints::QuestionAnnotation;
use crate::index::ValueIndex;
use crate::schema::DatabaseSchema;

use super::candidate::CandidateSet;
use super::extract::{extract_values, ExtractedValue};
use super::generate::generate_candidates;
use super::ner::NerClient;
use super::validate::{cap_candidates, key_aliases, validate_candidates, DEFAULT_CANDIDATE_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueConfig {
    pub threshold: ThresholdPolicy,
    pub cap: usize,
}

impl Default for ValueConfig {
    fn default() -> Self {
        ValueConfig {
            threshold: ThresholdPolicy::LengthScaled,
            cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueLookup {
    pub extracted: Vec<ExtractedValue>,
    pub candidates: CandidateSet,
}

pub fn lookup_values(
    question: &str,
    annotation: &QuestionAnnotation,
    schema: &DatabaseSchema,
    index: &ValueIndex,
    conn: &Connection,
    ner: Option<&mut NerClient>,
    config: &ValueConfig,
) -> ValueLookup {
    let entities = ner.map(|n| n.entities(question)).unwrap_or_default();
    let extracted = extract_values(question, &entities);
    let generated = generate_candidates(question, &extracted, annotation, index, &config.threshold);
    let mut validated = validate_candidates(generated, index, conn, schema);
    let aliases = key_aliases(&validated, schema, conn);
    validated.extend(validate_candidates(aliases, index, conn, schema));
    ValueLookup {
        extracted,
        candidates: cap_candidates(validated, config.cap),
    }
}
