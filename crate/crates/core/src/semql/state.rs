//! Incremental derivation state and the dynamically legal action set.

use serde::{Deserialize, Serialize};

use super::grammar::{productions, Kind};
use super::tree::Action;
use crate::schema::DatabaseSchema;

/// Position of a pending slot below an expanded node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub kind: Kind,
    pub production: usize,
    pub child: usize,
}

/// A non-terminal waiting to be expanded, with its ancestry from the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub kind: Kind,
    pub path: Vec<PathStep>,
}

impl Slot {
    pub fn parent(&self) -> Option<&PathStep> {
        self.path.last()
    }

    /// The step `n` levels above the immediate parent (0 = parent).
    pub fn ancestor(&self, n: usize) -> Option<&PathStep> {
        self.path.len().checked_sub(n + 1).map(|i| &self.path[i])
    }

    /// Whether the slot sits under a Filter/Superlative/Order, at any depth
    /// within the current SELECT block.
    pub fn enclosing_clause(&self) -> Option<Kind> {
        self.path.iter().rev().map(|s| s.kind).find(|k| {
            matches!(
                k,
                Kind::Select | Kind::Filter | Kind::Order | Kind::Superlative | Kind::R
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrammarError {
    #[error("no value candidates for V at step {step}")]
    NoValueCandidates { step: usize },
    #[error("action {action} is not legal at step {step} (expected {expected:?})")]
    IllegalAction {
        step: usize,
        action: Action,
        expected: Option<Kind>,
    },
}

/// Left-to-right, depth-first derivation in progress.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarState {
    /// Pending slots; the next one to expand is last.
    frontier: Vec<Slot>,
    history: Vec<Action>,
}

impl Default for GrammarState {
    fn default() -> Self {
        Self::new()
    }
}

impl GrammarState {
    pub fn new() -> Self {
        GrammarState {
            frontier: vec![Slot {
                kind: Kind::Z,
                path: Vec::new(),
            }],
            history: Vec::new(),
        }
    }

    pub fn head(&self) -> Option<&Slot> {
        self.frontier.last()
    }

    pub fn frontier(&self) -> impl Iterator<Item = &Slot> {
        self.frontier.iter().rev()
    }

    pub fn history(&self) -> &[Action] {
        &self.history
    }

    pub fn is_complete(&self) -> bool {
        self.frontier.is_empty()
    }

    /// Expand the head slot. Payload bounds are the caller's concern; use
    /// [`valid_next_actions`] to stay within them.
    pub fn apply(&mut self, action: Action) -> Result<(), GrammarError> {
        let step = self.history.len();
        let illegal = |expected| GrammarError::IllegalAction {
            step,
            action,
            expected,
        };
        let Some(slot) = self.frontier.last() else {
            return Err(illegal(None));
        };
        let kind = slot.kind;
        let ok = action.kind == kind
            && if kind.is_terminal() {
                action.payload.is_some() && action.production == 0
            } else {
                action.payload.is_none() && action.production < productions(kind).len()
            };
        if !ok {
            return Err(illegal(Some(kind)));
        }
        let slot = self.frontier.pop().expect("non-empty frontier");
        if !kind.is_terminal() {
            let children = productions(kind)[action.production].children;
            for (i, &child) in children.iter().enumerate().rev() {
                let mut path = slot.path.clone();
                path.push(PathStep {
                    kind,
                    production: action.production,
                    child: i,
                });
                self.frontier.push(Slot { kind: child, path });
            }
        }
        self.history.push(action);
        Ok(())
    }
}

/// Templates legal at the head of the frontier: productions for structural
/// kinds, one action per column, table or value candidate for C, T and V.
pub fn valid_next_actions(
    state: &GrammarState,
    schema: &DatabaseSchema,
    candidate_count: usize,
) -> Result<Vec<Action>, GrammarError> {
    let Some(slot) = state.head() else {
        return Ok(Vec::new());
    };
    Ok(match slot.kind {
        Kind::C => (0..schema.columns.len())
            .map(|c| Action::terminal(Kind::C, c))
            .collect(),
        Kind::T => (0..schema.tables.len())
            .map(|t| Action::terminal(Kind::T, t))
            .collect(),
        Kind::V => {
            if candidate_count == 0 {
                return Err(GrammarError::NoValueCandidates {
                    step: state.history().len(),
                });
            }
            (0..candidate_count)
                .map(|v| Action::terminal(Kind::V, v))
                .collect()
        }
        k => (0..productions(k).len())
            .map(|p| Action::rule(k, p))
            .collect(),
    })
}

/// Replays `actions`, checking each against the legal set of its step.
pub fn check_legality(
    actions: &[Action],
    schema: &DatabaseSchema,
    candidate_count: usize,
) -> Result<GrammarState, GrammarError> {
    let mut state = GrammarState::new();
    for (step, &a) in actions.iter().enumerate() {
        let legal = valid_next_actions(&state, schema, candidate_count)?;
        if !legal.contains(&a) {
            return Err(GrammarError::IllegalAction {
                step,
                action: a,
                expected: state.head().map(|s| s.kind),
            });
        }
        state.apply(a)?;
    }
    Ok(state)
}
