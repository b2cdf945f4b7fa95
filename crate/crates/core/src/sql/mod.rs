//! SQL front end: parse with sqlparser (SQLite dialect) and lower into the
//! compact query form used by the SemQL converter, the difficulty classifier
//! and the literal statistics.

mod lower;
mod walk;

pub use lower::parse_query;
pub use walk::{gold_literals, literal_tokens, quoted_names_column, LiteralCounts};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SqlError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("expected a single SELECT statement, found {0}")]
    NotAQuery(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralKind {
    Text,
    Number,
}

/// A literal as written in the query; `text` excludes surrounding quotes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub kind: LiteralKind,
    pub text: String,
}

impl Literal {
    pub fn text(s: impl Into<String>) -> Self {
        Literal {
            kind: LiteralKind::Text,
            text: s.into(),
        }
    }

    pub fn number(s: impl Into<String>) -> Self {
        Literal {
            kind: LiteralKind::Number,
            text: s.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggFn {
    Count,
    Max,
    Min,
    Sum,
    Avg,
}

impl AggFn {
    pub fn parse(name: &str) -> Option<AggFn> {
        Some(match name.to_ascii_lowercase().as_str() {
            "count" => AggFn::Count,
            "max" => AggFn::Max,
            "min" => AggFn::Min,
            "sum" => AggFn::Sum,
            "avg" => AggFn::Avg,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRef {
    pub qualifier: Option<String>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValueExpr {
    Column(ColumnRef),
    /// `"name"`: a column if one by that name exists, otherwise a string.
    QuotedName(String),
    Star,
    QualifiedStar(String),
    Aggregate {
        func: AggFn,
        distinct: bool,
        arg: Box<ValueExpr>,
    },
    Literal(Literal),
    Subquery(Box<Query>),
    Arithmetic {
        left: Box<ValueExpr>,
        right: Box<ValueExpr>,
    },
    /// Anything outside the supported fragment, with a reason code.
    Unsupported(&'static str),
}

impl ValueExpr {
    pub fn is_aggregate(&self) -> bool {
        matches!(self, ValueExpr::Aggregate { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn as_sql(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
    Compare {
        op: CmpOp,
        left: ValueExpr,
        right: ValueExpr,
    },
    Between {
        negated: bool,
        expr: ValueExpr,
        low: ValueExpr,
        high: ValueExpr,
    },
    Like {
        negated: bool,
        expr: ValueExpr,
        pattern: ValueExpr,
    },
    InSubquery {
        negated: bool,
        expr: ValueExpr,
        subquery: Box<Query>,
    },
    InList {
        negated: bool,
        expr: ValueExpr,
        list: Vec<ValueExpr>,
    },
    IsNull {
        negated: bool,
        expr: ValueExpr,
    },
    Exists {
        negated: bool,
        subquery: Box<Query>,
    },
    Unsupported(&'static str),
}

impl Condition {
    /// Leaves of the AND/OR tree, left to right, with the connectives
    /// between them (the flat layout the Spider tooling uses).
    pub fn flatten(&self) -> (Vec<&Condition>, Vec<bool>) {
        fn go<'a>(c: &'a Condition, leaves: &mut Vec<&'a Condition>, ors: &mut Vec<bool>) {
            match c {
                Condition::And(a, b) | Condition::Or(a, b) => {
                    go(a, leaves, ors);
                    ors.push(matches!(c, Condition::Or(..)));
                    go(b, leaves, ors);
                }
                _ => leaves.push(c),
            }
        }
        let mut leaves = Vec::new();
        let mut ors = Vec::new();
        go(self, &mut leaves, &mut ors);
        (leaves, ors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FromItem {
    Table {
        name: String,
        alias: Option<String>,
    },
    Subquery {
        query: Box<Query>,
        alias: Option<String>,
    },
    Unsupported(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub enum JoinVia {
    First,
    Comma,
    /// Inner or plain `JOIN`, with its `ON` condition if any.
    Join(Option<Condition>),
    Unsupported(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FromSource {
    pub item: FromItem,
    pub via: JoinVia,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectCore {
    pub distinct: bool,
    pub items: Vec<ValueExpr>,
    pub from: Vec<FromSource>,
    pub selection: Option<Condition>,
    pub group_by: Vec<ValueExpr>,
    pub having: Option<Condition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetOp {
    Union,
    Intersect,
    Except,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Select(Box<SelectCore>),
    SetOp {
        op: SetOp,
        all: bool,
        left: Box<Query>,
        right: Box<Query>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderItem {
    pub expr: ValueExpr,
    pub desc: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub body: Body,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<ValueExpr>,
    pub offset: bool,
    /// Set when a construct outside the modelled fragment wraps the query
    /// (`WITH`, `FETCH`, ...).
    pub unsupported: Option<&'static str>,
}

impl Query {
    pub fn has_top_level_order(&self) -> bool {
        !self.order_by.is_empty()
    }
}
