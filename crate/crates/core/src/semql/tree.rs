//! Typed SemQL trees, their action linearization and the canonical JSON form.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::grammar::{filter, productions, Kind};
use crate::sql::{CmpOp, SetOp};

/// One derivation step. Structural kinds carry a production index; C, T and
/// V carry a payload (column, table or value-candidate index) instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub kind: Kind,
    pub production: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<usize>,
}

impl Action {
    pub fn rule(kind: Kind, production: usize) -> Self {
        Action {
            kind,
            production,
            payload: None,
        }
    }

    pub fn terminal(kind: Kind, payload: usize) -> Self {
        Action {
            kind,
            production: 0,
            payload: Some(payload),
        }
    }

    /// Human-readable form, e.g. `Filter -> > A V` or `C(3)`.
    pub fn describe(&self) -> String {
        match self.payload {
            Some(p) => format!("{}({p})", self.kind),
            None => match productions(self.kind).get(self.production) {
                Some(rule) => format!("{} -> {}", self.kind, rule.render()),
                None => format!("{} -> #{}", self.kind, self.production),
            },
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggKind {
    None,
    Max,
    Min,
    Count,
    Sum,
    Avg,
}

impl AggKind {
    pub const ALL: [AggKind; 6] = [
        AggKind::None,
        AggKind::Max,
        AggKind::Min,
        AggKind::Count,
        AggKind::Sum,
        AggKind::Avg,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn sql_name(self) -> Option<&'static str> {
        match self {
            AggKind::None => None,
            AggKind::Max => Some("max"),
            AggKind::Min => Some("min"),
            AggKind::Count => Some("count"),
            AggKind::Sum => Some("sum"),
            AggKind::Avg => Some("avg"),
        }
    }
}

/// `A ::= agg C T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AggNode {
    pub agg: AggKind,
    pub column: usize,
    pub table: usize,
}

impl AggNode {
    pub fn is_aggregated(&self) -> bool {
        self.agg != AggKind::None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderNode {
    pub desc: bool,
    pub agg: AggNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperlativeNode {
    /// `most` sorts descending, `least` ascending.
    pub most: bool,
    pub agg: AggNode,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tail {
    Order(OrderNode),
    Superlative(SuperlativeNode),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterNode {
    And(Box<FilterNode>, Box<FilterNode>),
    Or(Box<FilterNode>, Box<FilterNode>),
    Compare {
        op: CmpOp,
        agg: AggNode,
        value: usize,
    },
    Between {
        agg: AggNode,
        low: usize,
        high: usize,
    },
    Like {
        negated: bool,
        agg: AggNode,
        value: usize,
    },
    In {
        negated: bool,
        agg: AggNode,
        query: Box<QueryNode>,
    },
    CompareQuery {
        op: CmpOp,
        agg: AggNode,
        query: Box<QueryNode>,
    },
}

impl FilterNode {
    pub fn and(a: FilterNode, b: FilterNode) -> Self {
        FilterNode::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FilterNode, b: FilterNode) -> Self {
        FilterNode::Or(Box::new(a), Box::new(b))
    }

    /// The A child of a leaf filter.
    pub fn leaf_agg(&self) -> Option<&AggNode> {
        match self {
            FilterNode::And(..) | FilterNode::Or(..) => None,
            FilterNode::Compare { agg, .. }
            | FilterNode::Between { agg, .. }
            | FilterNode::Like { agg, .. }
            | FilterNode::In { agg, .. }
            | FilterNode::CompareQuery { agg, .. } => Some(agg),
        }
    }
}

/// `R`: one SELECT block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryNode {
    /// One to five projections.
    pub select: Vec<AggNode>,
    pub filter: Option<FilterNode>,
    pub tail: Option<Tail>,
}

/// `Z`: the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemQlTree {
    Single(Box<QueryNode>),
    Compound {
        op: SetOp,
        left: Box<QueryNode>,
        right: Box<QueryNode>,
    },
}

const CMP_ORDER: [CmpOp; 6] = [
    CmpOp::Eq,
    CmpOp::Ne,
    CmpOp::Lt,
    CmpOp::Gt,
    CmpOp::Le,
    CmpOp::Ge,
];

fn cmp_index(op: CmpOp) -> usize {
    CMP_ORDER
        .iter()
        .position(|&o| o == op)
        .expect("comparison operator")
}

fn set_op_index(op: SetOp) -> usize {
    match op {
        SetOp::Intersect => 0,
        SetOp::Union => 1,
        SetOp::Except => 2,
    }
}

// ---- linearization ----

fn push_agg(out: &mut Vec<Action>, a: &AggNode) {
    out.push(Action::rule(Kind::A, a.agg.index()));
    out.push(Action::terminal(Kind::C, a.column));
    out.push(Action::terminal(Kind::T, a.table));
}

fn push_query(out: &mut Vec<Action>, q: &QueryNode) {
    let prod = match (&q.filter, &q.tail) {
        (None, None) => 0,
        (Some(_), None) => 1,
        (None, Some(Tail::Order(_))) => 2,
        (None, Some(Tail::Superlative(_))) => 3,
        (Some(_), Some(Tail::Order(_))) => 4,
        (Some(_), Some(Tail::Superlative(_))) => 5,
    };
    out.push(Action::rule(Kind::R, prod));
    out.push(Action::rule(Kind::Select, 0));
    debug_assert!((1..=5).contains(&q.select.len()));
    out.push(Action::rule(Kind::N, q.select.len().saturating_sub(1)));
    for a in &q.select {
        push_agg(out, a);
    }
    match &q.tail {
        Some(Tail::Order(o)) => {
            out.push(Action::rule(Kind::Order, usize::from(o.desc)));
            push_agg(out, &o.agg);
        }
        Some(Tail::Superlative(s)) => {
            out.push(Action::rule(Kind::Superlative, usize::from(!s.most)));
            push_agg(out, &s.agg);
            out.push(Action::terminal(Kind::V, s.value));
        }
        None => {}
    }
    if let Some(f) = &q.filter {
        push_filter(out, f);
    }
}

fn push_filter(out: &mut Vec<Action>, f: &FilterNode) {
    match f {
        FilterNode::And(a, b) | FilterNode::Or(a, b) => {
            let prod = if matches!(f, FilterNode::And(..)) {
                filter::AND
            } else {
                filter::OR
            };
            out.push(Action::rule(Kind::Filter, prod));
            push_filter(out, a);
            push_filter(out, b);
        }
        FilterNode::Compare { op, agg, value } => {
            out.push(Action::rule(
                Kind::Filter,
                filter::CMP_VALUE.start() + cmp_index(*op),
            ));
            push_agg(out, agg);
            out.push(Action::terminal(Kind::V, *value));
        }
        FilterNode::Between { agg, low, high } => {
            out.push(Action::rule(Kind::Filter, filter::BETWEEN));
            push_agg(out, agg);
            out.push(Action::terminal(Kind::V, *low));
            out.push(Action::terminal(Kind::V, *high));
        }
        FilterNode::Like {
            negated,
            agg,
            value,
        } => {
            let prod = if *negated {
                filter::NOT_LIKE
            } else {
                filter::LIKE
            };
            out.push(Action::rule(Kind::Filter, prod));
            push_agg(out, agg);
            out.push(Action::terminal(Kind::V, *value));
        }
        FilterNode::In {
            negated,
            agg,
            query,
        } => {
            let prod = if *negated { filter::NOT_IN } else { filter::IN };
            out.push(Action::rule(Kind::Filter, prod));
            push_agg(out, agg);
            push_query(out, query);
        }
        FilterNode::CompareQuery { op, agg, query } => {
            out.push(Action::rule(
                Kind::Filter,
                filter::CMP_QUERY.start() + cmp_index(*op),
            ));
            push_agg(out, agg);
            push_query(out, query);
        }
    }
}

impl SemQlTree {
    /// Depth-first, left-to-right derivation.
    pub fn to_actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        match self {
            SemQlTree::Single(q) => {
                out.push(Action::rule(Kind::Z, 3));
                push_query(&mut out, q);
            }
            SemQlTree::Compound { op, left, right } => {
                out.push(Action::rule(Kind::Z, set_op_index(*op)));
                push_query(&mut out, left);
                push_query(&mut out, right);
            }
        }
        out
    }

    pub fn from_actions(actions: &[Action]) -> Result<Self, TreeError> {
        let mut p = ActionParser { actions, pos: 0 };
        let tree = p.z()?;
        if p.pos != actions.len() {
            return Err(TreeError::Trailing { position: p.pos });
        }
        Ok(tree)
    }

    /// Every `R` block, outermost first, subqueries in derivation order.
    pub fn blocks(&self) -> Vec<&QueryNode> {
        fn walk<'a>(q: &'a QueryNode, out: &mut Vec<&'a QueryNode>) {
            out.push(q);
            if let Some(f) = &q.filter {
                walk_filter(f, out);
            }
        }
        fn walk_filter<'a>(f: &'a FilterNode, out: &mut Vec<&'a QueryNode>) {
            match f {
                FilterNode::And(a, b) | FilterNode::Or(a, b) => {
                    walk_filter(a, out);
                    walk_filter(b, out);
                }
                FilterNode::In { query, .. } | FilterNode::CompareQuery { query, .. } => {
                    walk(query, out)
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        match self {
            SemQlTree::Single(q) => walk(q, &mut out),
            SemQlTree::Compound { left, right, .. } => {
                walk(left, &mut out);
                walk(right, &mut out);
            }
        }
        out
    }

    /// V payloads in derivation order.
    pub fn value_payloads(&self) -> Vec<usize> {
        self.to_actions()
            .iter()
            .filter(|a| a.kind == Kind::V)
            .filter_map(|a| a.payload)
            .collect()
    }

    pub fn to_node(&self) -> Node {
        let actions = self.to_actions();
        let mut pos = 0;
        build_node(&actions, &mut pos)
    }

    pub fn from_node(node: &Node) -> Result<Self, TreeError> {
        let mut actions = Vec::new();
        node.linearize(&mut actions);
        Self::from_actions(&actions)
    }

    /// Canonical JSON: nested `{kind, production | payload, children}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_node()).expect("tree serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, TreeError> {
        let node: Node = serde_json::from_str(s).map_err(|e| TreeError::Format(e.to_string()))?;
        Self::from_node(&node)
    }
}

// ---- parsing ----

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("sequence ends at position {position} while {expected} is still expected")]
    Incomplete { position: usize, expected: Kind },
    #[error("illegal action {found} at position {position}: expected {expected}")]
    Illegal {
        position: usize,
        expected: Kind,
        found: Action,
    },
    #[error("trailing actions after a complete tree, starting at position {position}")]
    Trailing { position: usize },
    #[error("malformed tree document: {0}")]
    Format(String),
}

struct ActionParser<'a> {
    actions: &'a [Action],
    pos: usize,
}

impl ActionParser<'_> {
    fn next(&mut self, expected: Kind) -> Result<Action, TreeError> {
        let position = self.pos;
        let Some(&a) = self.actions.get(position) else {
            return Err(TreeError::Incomplete { position, expected });
        };
        let legal = a.kind == expected
            && if expected.is_terminal() {
                a.payload.is_some() && a.production == 0
            } else {
                a.payload.is_none() && a.production < productions(expected).len()
            };
        if !legal {
            return Err(TreeError::Illegal {
                position,
                expected,
                found: a,
            });
        }
        self.pos += 1;
        Ok(a)
    }

    fn payload(&mut self, kind: Kind) -> Result<usize, TreeError> {
        Ok(self.next(kind)?.payload.expect("terminal payload"))
    }

    fn z(&mut self) -> Result<SemQlTree, TreeError> {
        let a = self.next(Kind::Z)?;
        let op = match a.production {
            0 => SetOp::Intersect,
            1 => SetOp::Union,
            2 => SetOp::Except,
            _ => return Ok(SemQlTree::Single(Box::new(self.r()?))),
        };
        let left = Box::new(self.r()?);
        let right = Box::new(self.r()?);
        Ok(SemQlTree::Compound { op, left, right })
    }

    fn r(&mut self) -> Result<QueryNode, TreeError> {
        let prod = self.next(Kind::R)?.production;
        self.next(Kind::Select)?;
        let n = self.next(Kind::N)?.production + 1;
        let mut select = Vec::with_capacity(n);
        for _ in 0..n {
            select.push(self.a()?);
        }
        let tail = match prod {
            2 | 4 => Some(Tail::Order(self.order()?)),
            3 | 5 => Some(Tail::Superlative(self.superlative()?)),
            _ => None,
        };
        let filter = match prod {
            1 | 4 | 5 => Some(self.filter()?),
            _ => None,
        };
        Ok(QueryNode {
            select,
            filter,
            tail,
        })
    }

    fn a(&mut self) -> Result<AggNode, TreeError> {
        let prod = self.next(Kind::A)?.production;
        let column = self.payload(Kind::C)?;
        let table = self.payload(Kind::T)?;
        Ok(AggNode {
            agg: AggKind::from_index(prod).expect("checked production"),
            column,
            table,
        })
    }

    fn order(&mut self) -> Result<OrderNode, TreeError> {
        let desc = self.next(Kind::Order)?.production == 1;
        Ok(OrderNode {
            desc,
            agg: self.a()?,
        })
    }

    fn superlative(&mut self) -> Result<SuperlativeNode, TreeError> {
        let most = self.next(Kind::Superlative)?.production == 0;
        let agg = self.a()?;
        let value = self.payload(Kind::V)?;
        Ok(SuperlativeNode { most, agg, value })
    }

    fn filter(&mut self) -> Result<FilterNode, TreeError> {
        let prod = self.next(Kind::Filter)?.production;
        Ok(match prod {
            filter::AND => FilterNode::and(self.filter()?, self.filter()?),
            filter::OR => FilterNode::or(self.filter()?, self.filter()?),
            p if filter::CMP_VALUE.contains(&p) => FilterNode::Compare {
                op: CMP_ORDER[p - filter::CMP_VALUE.start()],
                agg: self.a()?,
                value: self.payload(Kind::V)?,
            },
            filter::BETWEEN => FilterNode::Between {
                agg: self.a()?,
                low: self.payload(Kind::V)?,
                high: self.payload(Kind::V)?,
            },
            filter::LIKE | filter::NOT_LIKE => FilterNode::Like {
                negated: prod == filter::NOT_LIKE,
                agg: self.a()?,
                value: self.payload(Kind::V)?,
            },
            filter::IN | filter::NOT_IN => FilterNode::In {
                negated: prod == filter::NOT_IN,
                agg: self.a()?,
                query: Box::new(self.r()?),
            },
            p => FilterNode::CompareQuery {
                op: CMP_ORDER[p - filter::CMP_QUERY.start()],
                agg: self.a()?,
                query: Box::new(self.r()?),
            },
        })
    }
}

// ---- canonical JSON ----

/// Generic node of the serialized tree format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub kind: Kind,
    #[serde(default)]
    pub production: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Node>,
}

impl Node {
    fn linearize(&self, out: &mut Vec<Action>) {
        out.push(Action {
            kind: self.kind,
            production: self.production,
            payload: self.payload,
        });
        for c in &self.children {
            c.linearize(out);
        }
    }
}

fn build_node(actions: &[Action], pos: &mut usize) -> Node {
    let a = actions[*pos];
    *pos += 1;
    let children = if a.kind.is_terminal() {
        Vec::new()
    } else {
        productions(a.kind)[a.production]
            .children
            .iter()
            .map(|_| build_node(actions, pos))
            .collect()
    };
    Node {
        kind: a.kind,
        production: a.production,
        payload: a.payload,
        children,
    }
}
