//! SQL generation: join inference, value formatting and tree compilation.

pub mod compiler;
pub mod format;
pub mod joins;

pub use compiler::{
    block_aggs, block_terminals, compile, fnv1a, joins_have_on, reconstructed_group_by,
    CompileError, CompiledQuery,
};
pub use format::{format_value, like_cue, FormatError, LikeCue, ValueUse};
pub use joins::{infer_joins, JoinError, JoinPlan, JoinStep};
