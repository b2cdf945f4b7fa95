//! Spider hardness buckets, counted the way the official evaluation script
//! counts them (including its quirks, noted inline).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sql::{parse_query, Body, Condition, FromItem, Query, SelectCore, ValueExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Difficulty {
    #[serde(rename = "easy")]
    Easy,
    #[serde(rename = "medium")]
    Medium,
    #[serde(rename = "hard")]
    Hard,
    #[serde(rename = "extra")]
    ExtraHard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 4] = [
        Difficulty::Easy,
        Difficulty::Medium,
        Difficulty::Hard,
        Difficulty::ExtraHard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
            Difficulty::ExtraHard => "extra",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classified {
    pub difficulty: Difficulty,
    /// Set when the SQL could not be parsed and the bucket is the fallback.
    pub unparsed: bool,
}

/// Component counts of the top-level block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Components {
    pub component1: usize,
    pub component2: usize,
    pub others: usize,
}

pub fn classify_difficulty(gold_sql: &str) -> Classified {
    match parse_query(gold_sql) {
        Ok(q) => Classified {
            difficulty: bucket(components(&q)),
            unparsed: false,
        },
        Err(_) => Classified {
            difficulty: Difficulty::ExtraHard,
            unparsed: true,
        },
    }
}

pub fn bucket(c: Components) -> Difficulty {
    let (c1, c2, o) = (c.component1, c.component2, c.others);
    if c1 <= 1 && o == 0 && c2 == 0 {
        Difficulty::Easy
    } else if (o <= 2 && c1 <= 1 && c2 == 0) || (c1 <= 2 && o < 2 && c2 == 0) {
        Difficulty::Medium
    } else if (o > 2 && c1 <= 2 && c2 == 0)
        || (2 < c1 && c1 <= 3 && o <= 2 && c2 == 0)
        || (c1 <= 1 && o == 0 && c2 <= 1)
    {
        Difficulty::Hard
    } else {
        Difficulty::ExtraHard
    }
}

/// The leftmost SELECT of a (possibly compound) query; the script parses a
/// compound as its first block with the rest attached as one nested query.
fn first_core(q: &Query) -> Option<&SelectCore> {
    match &q.body {
        Body::Select(core) => Some(core),
        Body::SetOp { left, .. } => first_core(left),
    }
}

fn negated(c: &Condition) -> bool {
    match c {
        Condition::Not(_) => true,
        Condition::Between { negated, .. }
        | Condition::Like { negated, .. }
        | Condition::InSubquery { negated, .. }
        | Condition::InList { negated, .. }
        | Condition::IsNull { negated, .. }
        | Condition::Exists { negated, .. } => *negated,
        _ => false,
    }
}

fn is_like(c: &Condition) -> bool {
    match c {
        Condition::Like { .. } => true,
        Condition::Not(inner) => is_like(inner),
        _ => false,
    }
}

/// Subqueries in operand positions of one condition.
fn nested_in(c: &Condition) -> usize {
    let sub = |e: &ValueExpr| usize::from(matches!(e, ValueExpr::Subquery(_)));
    match c {
        Condition::Not(inner) => nested_in(inner),
        Condition::Compare { left, right, .. } => sub(left) + sub(right),
        Condition::Between {
            expr, low, high, ..
        } => sub(expr) + sub(low) + sub(high),
        Condition::Like { expr, pattern, .. } => sub(expr) + sub(pattern),
        Condition::InSubquery { expr, .. } => 1 + sub(expr),
        Condition::Exists { .. } => 1,
        _ => 0,
    }
}

fn agg_units(e: &ValueExpr) -> usize {
    match e {
        ValueExpr::Aggregate { .. } => 1,
        ValueExpr::Arithmetic { left, right } => agg_units(left) + agg_units(right),
        _ => 0,
    }
}

pub fn components(q: &Query) -> Components {
    let Some(core) = first_core(q) else {
        return Components::default();
    };
    let (where_leaves, where_ors) = core
        .selection
        .as_ref()
        .map(|c| c.flatten())
        .unwrap_or_default();
    let (having_leaves, having_ors) = core
        .having
        .as_ref()
        .map(|c| c.flatten())
        .unwrap_or_default();
    let tables = core
        .from
        .iter()
        .filter(|s| !matches!(s.item, FromItem::Unsupported(_)))
        .count();

    let mut c1 = 0;
    c1 += usize::from(!where_leaves.is_empty());
    c1 += usize::from(!core.group_by.is_empty());
    c1 += usize::from(!q.order_by.is_empty());
    c1 += usize::from(q.limit.is_some());
    c1 += tables.saturating_sub(1);
    c1 += where_ors.iter().chain(&having_ors).filter(|&&o| o).count();
    c1 += where_leaves
        .iter()
        .chain(&having_leaves)
        .filter(|c| is_like(c))
        .count();

    let mut c2: usize = where_leaves
        .iter()
        .chain(&having_leaves)
        .map(|c| nested_in(c))
        .sum();
    if let Some(on) = core.from.iter().find_map(|s| match &s.via {
        crate::sql::JoinVia::Join(Some(c)) => Some(c),
        _ => None,
    }) {
        c2 += on.flatten().0.iter().map(|c| nested_in(c)).sum::<usize>();
    }
    if matches!(q.body, Body::SetOp { .. }) {
        c2 += 1;
    }

    // The script's aggregate count looks at the first field of each unit.
    // For conditions that field is the negation flag, and the HAVING list
    // still holds its and/or tokens, which always count.
    let mut agg = core.items.iter().map(agg_units).sum::<usize>();
    agg += where_leaves.iter().filter(|c| negated(c)).count();
    agg += core.group_by.iter().map(agg_units).sum::<usize>();
    agg += q.order_by.iter().map(|o| agg_units(&o.expr)).sum::<usize>();
    agg += having_ors.len() + having_leaves.iter().filter(|c| negated(c)).count();

    let mut others = 0;
    others += usize::from(agg > 1);
    others += usize::from(core.items.len() > 1);
    others += usize::from(where_leaves.len() > 1);
    others += usize::from(core.group_by.len() > 1);

    Components {
        component1: c1,
        component2: c2,
        others,
    }
}
