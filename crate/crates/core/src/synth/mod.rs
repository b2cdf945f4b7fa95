//! Grammar-constrained synthesis of SemQL trees.

pub mod baseline;
pub mod context;
pub mod policy;
pub mod search;

pub use baseline::{hint_scores, plan_tree, BaselinePolicy};
pub use context::{build_context, light_candidates, ContextMode, EncodingContext};
pub use policy::{
    ExternalPolicy, Policy, PolicyDecision, PolicyError, ScriptedPolicy, EXTERNAL_POLICY_TIMEOUT,
};
pub use search::{synthesize, SearchConfig, Synthesis, SynthesisError, DEFAULT_MAX_DEPTH};
