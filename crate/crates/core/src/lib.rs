//! Core library: dataset loading, value index, SemQL IR, value pipeline,
//! synthesis, SQL compilation and execution-accuracy evaluation.

pub mod compile;
pub mod dataset;
pub mod distance;
pub mod eval;
pub mod fixtures;
pub mod graph;
pub mod hints;
pub mod index;
pub mod jsonl;
pub mod normalize;
pub mod pipeline;
pub mod roundtrip;
pub mod schema;
pub mod semql;
pub mod sql;
pub mod sqlite;
pub mod stats;
pub mod synth;
pub mod text;
pub mod values;
