//! Grammar-constrained greedy and beam search over policy scores.

use serde::{Deserialize, Serialize};

use super::context::EncodingContext;
use super::policy::{Policy, PolicyError};
use crate::semql::{valid_next_actions, Action, GrammarError, GrammarState, Kind, SemQlTree};

pub const DEFAULT_MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// 1 is greedy.
    pub beam: usize,
    pub max_depth: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            beam: 1,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("dead end at step {step}: no legal action for {kind}")]
    DeadEnd { kind: Kind, step: usize },
    #[error("derivation exceeded {0} actions")]
    DepthExceeded(usize),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub tree: SemQlTree,
    pub actions: Vec<Action>,
    pub score: f64,
}

#[derive(Clone)]
struct Hypothesis {
    state: GrammarState,
    score: f64,
    /// Template index chosen at each step; breaks score ties.
    ranks: Vec<usize>,
}

/// Derive a complete tree. Every action comes from `valid_next_actions`, so
/// whatever the policy does the result is in the grammar. Ties go to the
/// earlier template.
pub fn synthesize(
    ctx: &EncodingContext,
    policy: &mut dyn Policy,
    config: &SearchConfig,
) -> Result<Synthesis, SynthesisError> {
    let width = config.beam.max(1);
    let mut beam = vec![Hypothesis {
        state: GrammarState::new(),
        score: 0.0,
        ranks: Vec::new(),
    }];
    let mut last_error = None;
    loop {
        if beam.iter().all(|h| h.state.is_complete()) {
            break;
        }
        let mut next: Vec<Hypothesis> = Vec::new();
        for h in beam {
            if h.state.is_complete() {
                next.push(h);
                continue;
            }
            if h.state.history().len() >= config.max_depth {
                last_error = Some(SynthesisError::DepthExceeded(config.max_depth));
                continue;
            }
            let legal = match valid_next_actions(&h.state, &ctx.schema, ctx.candidates.len()) {
                Ok(l) if !l.is_empty() => l,
                Ok(_) | Err(GrammarError::NoValueCandidates { .. }) => {
                    let kind = h.state.head().map_or(Kind::V, |s| s.kind);
                    last_error = Some(SynthesisError::DeadEnd {
                        kind,
                        step: h.state.history().len(),
                    });
                    continue;
                }
                Err(e) => unreachable!("legal set computation failed: {e}"),
            };
            let decision = policy.decide(&h.state, &legal, ctx)?;
            if decision.scores.len() != legal.len() {
                return Err(PolicyError::Protocol(format!(
                    "{} scores for {} legal templates",
                    decision.scores.len(),
                    legal.len()
                ))
                .into());
            }
            if !decision.scores.iter().any(|s| s.is_finite()) {
                return Err(PolicyError::Protocol("no finite score".into()).into());
            }
            let mut scored: Vec<(usize, f64)> = decision
                .scores
                .iter()
                .enumerate()
                .filter(|(_, s)| s.is_finite())
                .map(|(i, &s)| (i, s))
                .collect();
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            for &(i, s) in scored.iter().take(width) {
                let mut state = h.state.clone();
                state.apply(legal[i]).expect("legal action applies");
                let mut ranks = h.ranks.clone();
                ranks.push(i);
                next.push(Hypothesis {
                    state,
                    score: h.score + s,
                    ranks,
                });
            }
        }
        if next.is_empty() {
            return Err(last_error.unwrap_or(SynthesisError::DepthExceeded(config.max_depth)));
        }
        next.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.ranks.cmp(&b.ranks))
        });
        next.truncate(width);
        beam = next;
    }
    let best = beam.into_iter().next().expect("non-empty beam");
    let actions = best.state.history().to_vec();
    let tree = SemQlTree::from_actions(&actions).expect("complete derivation parses");
    Ok(Synthesis {
        tree,
        actions,
        score: best.score,
    })
}
