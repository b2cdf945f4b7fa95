//! Value candidates: extraction, generation and database validation.

pub mod candidate;
pub mod extract;
pub mod generate;
pub mod ner;
pub mod pipeline;
pub mod validate;

pub use candidate::{CandidateSet, Origin, ValueCandidate};
pub use extract::{extract_values, merge_overlaps, Entity, ExtractedValue, ExtractionSource};
pub use generate::{all_ngrams, generate_candidates, ngram_expand};
pub use ner::{NerClient, NER_TIMEOUT};
pub use pipeline::{lookup_values, ValueConfig, ValueLookup};
pub use validate::{cap_candidates, key_aliases, validate_candidates, DEFAULT_CANDIDATE_CAP};
