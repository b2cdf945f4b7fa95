//! Scoring policies: the scripted replay and the external child process.
//! The hint-driven baseline lives in its own module.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::context::EncodingContext;
use crate::jsonl::{ChannelError, JsonLineChannel};
use crate::semql::{Action, GrammarState};

pub const EXTERNAL_POLICY_TIMEOUT: Duration = Duration::from_secs(5);

/// Scores aligned with the legal templates of one decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub scores: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("policy protocol error: {0}")]
    Protocol(String),
    #[error("policy channel: {0}")]
    Channel(#[from] ChannelError),
    #[error("scripted action {action} is not legal at step {step}")]
    ScriptDiverged { step: usize, action: Action },
    #[error("script ended at step {0}")]
    ScriptExhausted(usize),
}

pub trait Policy: Send {
    fn decide(
        &mut self,
        state: &GrammarState,
        legal: &[Action],
        ctx: &EncodingContext,
    ) -> Result<PolicyDecision, PolicyError>;
}

/// Replays a fixed action sequence.
pub struct ScriptedPolicy {
    actions: Vec<Action>,
}

impl ScriptedPolicy {
    pub fn new(actions: Vec<Action>) -> Self {
        ScriptedPolicy { actions }
    }
}

impl Policy for ScriptedPolicy {
    fn decide(
        &mut self,
        state: &GrammarState,
        legal: &[Action],
        _: &EncodingContext,
    ) -> Result<PolicyDecision, PolicyError> {
        let step = state.history().len();
        let want = *self
            .actions
            .get(step)
            .ok_or(PolicyError::ScriptExhausted(step))?;
        if !legal.contains(&want) {
            return Err(PolicyError::ScriptDiverged { step, action: want });
        }
        Ok(PolicyDecision {
            scores: legal
                .iter()
                .map(|a| if *a == want { 1.0 } else { 0.0 })
                .collect(),
        })
    }
}

#[derive(Serialize)]
struct PolicyRequest<'a> {
    frontier: &'a str,
    legal: &'a [Action],
    history: &'a [Action],
    context: &'a serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyResponse {
    scores: Vec<f64>,
}

/// A child process answering one JSON line per decision.
pub struct ExternalPolicy {
    channel: JsonLineChannel,
    /// Digest of the last context, keyed by its question.
    cached: Option<(String, serde_json::Value)>,
}

impl ExternalPolicy {
    pub fn new(command: impl Into<String>) -> Self {
        Self::with_timeout(command, EXTERNAL_POLICY_TIMEOUT)
    }

    pub fn with_timeout(command: impl Into<String>, timeout: Duration) -> Self {
        ExternalPolicy {
            channel: JsonLineChannel::new(command, timeout),
            cached: None,
        }
    }
}

impl Policy for ExternalPolicy {
    fn decide(
        &mut self,
        state: &GrammarState,
        legal: &[Action],
        ctx: &EncodingContext,
    ) -> Result<PolicyDecision, PolicyError> {
        if self.cached.as_ref().is_none_or(|(q, _)| *q != ctx.question) {
            self.cached = Some((ctx.question.clone(), ctx.digest()));
        }
        let digest = &self.cached.as_ref().expect("digest cached").1;
        let frontier = state.head().map_or("", |s| s.kind.as_str());
        let request = PolicyRequest {
            frontier,
            legal,
            history: state.history(),
            context: digest,
        };
        let response: PolicyResponse = self.channel.request(&request)?;
        if response.scores.len() != legal.len() {
            return Err(PolicyError::Protocol(format!(
                "{} scores for {} legal templates",
                response.scores.len(),
                legal.len()
            )));
        }
        Ok(PolicyDecision {
            scores: response.scores,
        })
    }
}
