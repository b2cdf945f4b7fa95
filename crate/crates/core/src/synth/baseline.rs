//! Hint-driven policy. It plans one tree per question from the question
//! hints and value candidates and steers the search toward it; off the plan
//! it falls back to plain hint scores.

use super::context::EncodingContext;
use super::policy::{Policy, PolicyDecision, PolicyError};
use crate::hints::{HintTarget, QuestionClass, SchemaClass, TokenHint};
use crate::normalize::is_numeric;
use crate::schema::ColumnType;
use crate::semql::{
    Action, AggKind, AggNode, FilterNode, GrammarState, Kind, OrderNode, QueryNode, SemQlTree,
    SuperlativeNode, Tail,
};
use crate::sql::CmpOp;
use crate::values::{Origin, ValueCandidate};

const PLAN_BONUS: f64 = 1.0;

const GT_CUES: &[&str] = &[
    "more",
    "greater",
    "larger",
    "bigger",
    "higher",
    "older",
    "above",
    "over",
    "after",
    "exceed",
    "exceeds",
    "exceeding",
    "later",
    "longer",
    "heavier",
];
const LT_CUES: &[&str] = &[
    "less", "fewer", "smaller", "lower", "younger", "below", "under", "before", "earlier",
    "shorter", "lighter",
];
const NE_CUES: &[&str] = &["not", "except", "excluding", "other"];
const LIKE_CUES: &[&str] = &[
    "contain",
    "contains",
    "containing",
    "substring",
    "include",
    "includes",
    "including",
    "start",
    "starts",
    "starting",
    "begin",
    "begins",
    "beginning",
    "end",
    "ends",
    "ending",
    "letter",
    "word",
    "phrase",
];
const NEGATIONS: &[&str] = &["not", "without", "don", "doesn", "dont", "doesnt", "never"];
const LEAST_WORDS: &[&str] = &[
    "least", "lowest", "smallest", "youngest", "cheapest", "fewest", "lightest", "shortest",
    "earliest", "minimum", "worst",
];
const ORDER_WORDS: &[&str] = &["order", "ordered", "ordering", "sort", "sorted", "sorting"];
const DESC_WORDS: &[&str] = &["descending", "desc", "decreasing", "reverse"];
/// Superlative adjectives and the column words they are about.
const ADJECTIVE_COLUMNS: &[(&[&str], &[&str])] = &[
    (&["oldest", "youngest"], &["age"]),
    (&["cheapest", "priciest", "expensive"], &["price", "cost"]),
    (&["heaviest", "lightest"], &["weight"]),
    (
        &["largest", "biggest", "smallest"],
        &["capacity", "size", "area", "budget", "population"],
    ),
    (&["tallest"], &["height"]),
    (&["longest", "shortest"], &["length", "duration", "height"]),
    (&["earliest", "latest", "newest"], &["date", "year"]),
];

fn lower(t: &TokenHint) -> &str {
    t.token.lower.as_str()
}

fn column_target(t: &TokenHint) -> Option<usize> {
    match (t.class, t.target) {
        (QuestionClass::Column, Some(HintTarget::Column { column })) => Some(column),
        _ => None,
    }
}

fn table_target(t: &TokenHint) -> Option<usize> {
    match (t.class, t.target) {
        (QuestionClass::Table, Some(HintTarget::Table { table })) => Some(table),
        _ => None,
    }
}

fn count_phrase(tokens: &[TokenHint]) -> bool {
    tokens.windows(2).any(|w| {
        w.iter().all(|t| t.class == QuestionClass::Aggregation)
            && matches!(
                (lower(&w[0]), lower(&w[1])),
                ("how", "many") | ("number", "of")
            )
    })
}

fn agg_word(w: &str) -> Option<AggKind> {
    Some(match w {
        "average" | "mean" | "avg" => AggKind::Avg,
        "sum" | "total" => AggKind::Sum,
        "maximum" | "max" => AggKind::Max,
        "minimum" | "min" => AggKind::Min,
        _ => return None,
    })
}

struct Planner<'a> {
    ctx: &'a EncodingContext,
    tokens: &'a [TokenHint],
    main: usize,
    /// Main table first, then the tables the question names.
    tables: Vec<usize>,
}

impl<'a> Planner<'a> {
    fn new(ctx: &'a EncodingContext) -> Self {
        let tokens = &ctx.annotation.tokens[..];
        let named: Vec<usize> = tokens.iter().filter_map(table_target).collect();
        let main = named
            .first()
            .copied()
            .or_else(|| {
                tokens
                    .iter()
                    .find_map(column_target)
                    .and_then(|c| ctx.schema.column_table(c))
            })
            .or_else(|| {
                let best = ctx.schema_hints.tables.iter().max()?;
                ctx.schema_hints.tables.iter().position(|c| c == best)
            })
            .unwrap_or(0);
        let mut tables = vec![main];
        for t in named {
            if !tables.contains(&t) {
                tables.push(t);
            }
        }
        Planner {
            ctx,
            tokens,
            main,
            tables,
        }
    }

    fn agg(&self, agg: AggKind, column: usize) -> AggNode {
        AggNode {
            agg,
            column,
            table: self.ctx.schema.column_table(column).unwrap_or(self.main),
        }
    }

    fn star(&self, agg: AggKind, table: usize) -> AggNode {
        AggNode {
            agg,
            column: 0,
            table,
        }
    }

    /// Index of the first token starting at or after `offset`.
    fn token_at(&self, offset: usize) -> usize {
        self.tokens
            .iter()
            .position(|t| t.token.start >= offset)
            .unwrap_or(self.tokens.len())
    }

    /// A column whose name contains one of `words`, searching the
    /// question's tables before the rest of the schema.
    fn column_named(&self, words: &[&str]) -> Option<usize> {
        let schema = &self.ctx.schema;
        let matches = |c: usize| {
            let name = schema.columns[c].name.to_lowercase();
            words.iter().any(|w| name.contains(w))
        };
        self.tables
            .iter()
            .flat_map(|&t| schema.columns_of(t))
            .find(|&c| matches(c))
            .or_else(|| (1..schema.columns.len()).find(|&c| matches(c)))
    }

    fn candidate(&self, i: usize) -> &ValueCandidate {
        &self.ctx.candidates.candidates[i]
    }

    fn plan(&self) -> SemQlTree {
        let mut used_values = Vec::new();
        let mut used_columns = Vec::new();
        let tail = self.tail(&mut used_values);
        if let Some(t) = &tail {
            let agg = match t {
                Tail::Order(o) => o.agg,
                Tail::Superlative(s) => s.agg,
            };
            used_columns.push(agg.column);
        }
        let filter = self.filters(&used_values, &mut used_columns);
        let select = self.select(&used_columns);
        SemQlTree::Single(Box::new(QueryNode {
            select,
            filter,
            tail,
        }))
    }

    fn select(&self, used: &[usize]) -> Vec<AggNode> {
        let mut items = Vec::new();
        let mut taken: Vec<usize> = used.to_vec();
        if count_phrase(self.tokens) {
            items.push(self.star(AggKind::Count, self.main));
        }
        let mut aggregated = Vec::new();
        for (i, t) in self.tokens.iter().enumerate() {
            let Some(agg) = agg_word(lower(t)) else {
                continue;
            };
            if let Some(c) = self.tokens[i + 1..].iter().take(4).find_map(column_target) {
                aggregated.push((i, self.agg(agg, c)));
            }
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if let Some((_, a)) = aggregated.iter().find(|(at, _)| *at == i) {
                items.push(*a);
                taken.push(a.column);
                continue;
            }
            let Some(c) = column_target(t) else { continue };
            if taken.contains(&c) || aggregated.iter().any(|(_, a)| a.column == c) {
                continue;
            }
            taken.push(c);
            items.push(self.agg(AggKind::None, c));
        }
        if items.is_empty() {
            items.push(self.star(AggKind::None, self.main));
        }
        items.truncate(5);
        items
    }

    fn tail(&self, used_values: &mut Vec<usize>) -> Option<Tail> {
        let schema = &self.ctx.schema;
        if let Some(i) = self
            .tokens
            .iter()
            .position(|t| ORDER_WORDS.contains(&lower(t)))
        {
            if let Some(c) = self.tokens[i + 1..].iter().find_map(column_target) {
                let desc = self.tokens.iter().any(|t| DESC_WORDS.contains(&lower(t)));
                return Some(Tail::Order(OrderNode {
                    desc,
                    agg: self.agg(AggKind::None, c),
                }));
            }
        }
        let i = self
            .tokens
            .iter()
            .position(|t| t.class == QuestionClass::Superlative)?;
        let word = lower(&self.tokens[i]);
        let most = !LEAST_WORDS.contains(&word);
        let numeric = |c: &usize| schema.columns[*c].ty == ColumnType::Number;
        let agg =
            if let Some((_, cols)) = ADJECTIVE_COLUMNS.iter().find(|(ws, _)| ws.contains(&word)) {
                self.column_named(cols).map(|c| self.agg(AggKind::None, c))
            } else {
                None
            }
            .or_else(|| {
                // "the most students": count rows of the named table.
                let t = self.tokens[i + 1..].iter().take(2).find_map(table_target)?;
                Some(self.star(AggKind::Count, t))
            })
            .or_else(|| {
                let after: Vec<usize> = self.tokens[i + 1..]
                    .iter()
                    .filter_map(column_target)
                    .collect();
                after
                    .iter()
                    .copied()
                    .find(numeric)
                    .or(after.first().copied())
                    .map(|c| self.agg(AggKind::None, c))
            })
            .or_else(|| {
                self.tokens[..i]
                    .iter()
                    .rev()
                    .filter_map(column_target)
                    .find(numeric)
                    .map(|c| self.agg(AggKind::None, c))
            })?;
        let cands = &self.ctx.candidates.candidates;
        let explicit = (word == "top")
            .then(|| self.tokens.get(i + 1))
            .flatten()
            .and_then(|next| {
                cands.iter().position(|c| {
                    c.span.is_some_and(|s| s.0 == next.token.start) && is_numeric(&c.surface)
                })
            });
        let value = explicit
            .or_else(|| cands.iter().position(|c| c.origin == Origin::ImplicitLimit))
            .or_else(|| {
                cands
                    .iter()
                    .position(|c| c.surface == "1" && c.span.is_none())
            });
        match value {
            Some(v) => {
                used_values.push(v);
                Some(Tail::Superlative(SuperlativeNode {
                    most,
                    agg,
                    value: v,
                }))
            }
            None => Some(Tail::Order(OrderNode { desc: most, agg })),
        }
    }

    /// Whether a candidate can stand as a filter value on its own.
    fn usable(&self, c: &ValueCandidate) -> bool {
        (c.validated && c.location.is_some())
            || is_numeric(&c.surface)
            || c.is_wildcard()
            || self.ctx.light
    }

    fn rank_key(&self, i: usize) -> (bool, bool, std::cmp::Reverse<usize>, u8, usize) {
        let c = self.candidate(i);
        let located = c.validated && c.location.is_some();
        let near = c.locations().any(|(t, _)| self.tables.contains(&t));
        let (s, e) = c.span.unwrap_or((0, 0));
        // Lower sorts first.
        (
            !located,
            !near,
            std::cmp::Reverse(e - s),
            c.origin.priority(),
            i,
        )
    }

    /// One value per group of overlapping spans, in question order.
    fn chosen_values(&self, used: &[usize]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.ctx.candidates.len())
            .filter(|i| !used.contains(i))
            .filter(|&i| {
                let c = self.candidate(i);
                c.span.is_some() && c.origin != Origin::ImplicitLimit && self.usable(c)
            })
            .collect();
        idx.sort_by_key(|&i| (self.candidate(i).span, i));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut group_end = 0;
        for i in idx {
            let (s, e) = self.candidate(i).span.expect("filtered on span");
            match groups.last_mut() {
                Some(g) if s < group_end => {
                    g.push(i);
                    group_end = group_end.max(e);
                }
                _ => {
                    groups.push(vec![i]);
                    group_end = e;
                }
            }
        }
        groups
            .into_iter()
            .filter_map(|g| g.into_iter().min_by_key(|&i| self.rank_key(i)))
            .collect()
    }

    /// Tokens between the previous value and this one, at most four.
    fn window(&self, from: usize, start: usize) -> &[TokenHint] {
        let end = self.token_at(start);
        let begin = self.token_at(from).max(end.saturating_sub(4));
        &self.tokens[begin.min(end)..end]
    }

    fn filters(&self, used_values: &[usize], used_columns: &mut Vec<usize>) -> Option<FilterNode> {
        let values = self.chosen_values(used_values);
        let mut out: Option<FilterNode> = None;
        let mut prev_end = 0;
        let mut k = 0;
        while k < values.len() {
            let v = values[k];
            let c = self.candidate(v);
            let (start, end) = c.span.expect("chosen values have spans");
            let window = self.window(prev_end, start);
            let words: Vec<&str> = window.iter().map(lower).collect();
            let gap: Vec<&str> = self.tokens[self.token_at(prev_end)..self.token_at(start)]
                .iter()
                .map(lower)
                .collect();
            let or = prev_end > 0 && gap.contains(&"or");
            k += 1;
            let Some(column) = self.filter_column(c, start, &words) else {
                continue;
            };
            let next_token = self.tokens.get(self.token_at(end));
            let agg = match next_token.and_then(table_target) {
                Some(t) if is_numeric(&c.surface) && c.location.is_none() => {
                    self.star(AggKind::Count, t)
                }
                _ => self.agg(AggKind::None, column),
            };
            let node = if words.last() == Some(&"between") && k < values.len() {
                let high = values[k];
                let (hs, he) = self.candidate(high).span.expect("span");
                let joined = self.tokens[self.token_at(end)..self.token_at(hs)]
                    .iter()
                    .any(|t| lower(t) == "and");
                if joined {
                    k += 1;
                    prev_end = he;
                    FilterNode::Between { agg, low: v, high }
                } else {
                    prev_end = end;
                    FilterNode::Compare {
                        op: CmpOp::Eq,
                        agg,
                        value: v,
                    }
                }
            } else {
                prev_end = end;
                self.leaf(c, &words, agg, v)
            };
            if agg.column != 0 {
                used_columns.push(agg.column);
            }
            out = Some(match out {
                None => node,
                Some(f) if or => FilterNode::or(f, node),
                Some(f) => FilterNode::and(f, node),
            });
        }
        out
    }

    fn filter_column(&self, c: &ValueCandidate, start: usize, words: &[&str]) -> Option<usize> {
        if let Some((_, col)) = c.location {
            return Some(col);
        }
        if words.iter().any(|w| matches!(*w, "older" | "younger")) {
            if let Some(col) = self.column_named(&["age"]) {
                return Some(col);
            }
        }
        let at = self.token_at(start);
        self.tokens
            .iter()
            .enumerate()
            .filter_map(|(i, t)| column_target(t).map(|c| (i.abs_diff(at), c)))
            .min()
            .map(|(_, c)| c)
    }

    fn leaf(&self, c: &ValueCandidate, words: &[&str], agg: AggNode, value: usize) -> FilterNode {
        let negated = words.iter().any(|w| NEGATIONS.contains(w));
        if c.is_wildcard() || words.iter().any(|w| LIKE_CUES.contains(w)) {
            return FilterNode::Like {
                negated,
                agg,
                value,
            };
        }
        let op = words
            .iter()
            .enumerate()
            .rev()
            .find_map(|(i, w)| {
                let after_at = i > 0 && words[i - 1] == "at";
                match *w {
                    "least" if after_at => Some(CmpOp::Ge),
                    "most" if after_at => Some(CmpOp::Le),
                    w if GT_CUES.contains(&w) => Some(CmpOp::Gt),
                    w if LT_CUES.contains(&w) => Some(CmpOp::Lt),
                    w if NE_CUES.contains(&w) => Some(CmpOp::Ne),
                    _ => None,
                }
            })
            .unwrap_or(CmpOp::Eq);
        FilterNode::Compare { op, agg, value }
    }
}

/// The tree the baseline aims for.
pub fn plan_tree(ctx: &EncodingContext) -> SemQlTree {
    Planner::new(ctx).plan()
}

fn class_score(class: SchemaClass, in_filter: bool) -> f64 {
    match class {
        SchemaClass::Exact => 0.4,
        SchemaClass::ValueCandidateMatch if in_filter => 0.3,
        SchemaClass::ValueCandidateMatch | SchemaClass::Partial => 0.1,
        SchemaClass::None => 0.0,
    }
}

/// Per-template scores from the hints alone, in [0, 1).
pub fn hint_scores(state: &GrammarState, legal: &[Action], ctx: &EncodingContext) -> Vec<f64> {
    let Some(head) = state.head() else {
        return vec![0.0; legal.len()];
    };
    let last_column = state
        .history()
        .iter()
        .rev()
        .find(|a| a.kind == Kind::C)
        .and_then(|a| a.payload);
    let in_filter = head.enclosing_clause() == Some(Kind::Filter);
    let tokens = &ctx.annotation.tokens;
    let counting = count_phrase(tokens);
    let wanted_agg: Vec<AggKind> = tokens.iter().filter_map(|t| agg_word(lower(t))).collect();
    legal
        .iter()
        .map(|a| match (a.kind, a.payload) {
            (Kind::T, Some(t)) => {
                let own = last_column.is_some_and(|c| ctx.schema.column_table(c) == Some(t));
                class_score(ctx.schema_hints.tables[t], false) + if own { 0.5 } else { 0.0 }
            }
            (Kind::C, Some(0)) => {
                if counting {
                    0.3
                } else {
                    0.05
                }
            }
            (Kind::C, Some(c)) => class_score(ctx.schema_hints.columns[c], in_filter),
            (Kind::V, Some(v)) => {
                let c = &ctx.candidates.candidates[v];
                let here = last_column.is_some_and(|col| c.is_located_in_column(col));
                (if here { 0.5 } else { 0.0 }) + if c.validated { 0.1 } else { 0.0 }
            }
            (Kind::A, _) => {
                let agg = AggKind::from_index(a.production).unwrap_or(AggKind::None);
                if agg == AggKind::Count && counting || wanted_agg.contains(&agg) {
                    0.3
                } else if agg == AggKind::None {
                    0.1
                } else {
                    0.0
                }
            }
            // Prefer the productions that end the derivation soonest.
            (Kind::Z, _) if a.production == 3 => 0.1,
            (Kind::Filter, _) if a.production == 2 => 0.1,
            (Kind::R | Kind::N | Kind::Order | Kind::Superlative, _) if a.production == 0 => 0.1,
            _ => 0.0,
        })
        .collect()
}

/// Follows [`plan_tree`] while the derivation agrees with it.
#[derive(Debug, Default)]
pub struct BaselinePolicy {
    plan: Option<(String, usize, Vec<Action>)>,
}

impl BaselinePolicy {
    pub fn new() -> Self {
        Self::default()
    }

    fn plan_for(&mut self, ctx: &EncodingContext) -> &[Action] {
        let stale = self
            .plan
            .as_ref()
            .is_none_or(|(q, n, _)| *q != ctx.question || *n != ctx.candidates.len());
        if stale {
            self.plan = Some((
                ctx.question.clone(),
                ctx.candidates.len(),
                plan_tree(ctx).to_actions(),
            ));
        }
        &self.plan.as_ref().expect("plan set").2
    }
}

impl Policy for BaselinePolicy {
    fn decide(
        &mut self,
        state: &GrammarState,
        legal: &[Action],
        ctx: &EncodingContext,
    ) -> Result<PolicyDecision, PolicyError> {
        let mut scores = hint_scores(state, legal, ctx);
        let plan = self.plan_for(ctx);
        let step = state.history().len();
        if plan.len() > step && plan[..step] == *state.history() {
            if let Some(i) = legal.iter().position(|a| *a == plan[step]) {
                scores[i] += PLAN_BONUS;
            }
        }
        Ok(PolicyDecision { scores })
    }
}
