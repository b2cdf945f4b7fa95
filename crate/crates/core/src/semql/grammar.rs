//! The SemQL grammar: non-terminal kinds and their productions.
//!
//! Production indices are part of the serialized action format and must not
//! be reordered. `docs/grammar.md` renders the same table.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Z,
    R,
    Select,
    N,
    A,
    Filter,
    Order,
    Superlative,
    C,
    T,
    V,
}

impl Kind {
    pub const ALL: [Kind; 11] = [
        Kind::Z,
        Kind::R,
        Kind::Select,
        Kind::N,
        Kind::A,
        Kind::Filter,
        Kind::Order,
        Kind::Superlative,
        Kind::C,
        Kind::T,
        Kind::V,
    ];

    /// C, T and V select a schema item or value instead of a production.
    pub fn is_terminal(self) -> bool {
        matches!(self, Kind::C | Kind::T | Kind::V)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Z => "Z",
            Kind::R => "R",
            Kind::Select => "Select",
            Kind::N => "N",
            Kind::A => "A",
            Kind::Filter => "Filter",
            Kind::Order => "Order",
            Kind::Superlative => "Superlative",
            Kind::C => "C",
            Kind::T => "T",
            Kind::V => "V",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Production {
    /// Keyword of the right-hand side (`"and"`, `">"`, `"most"`, ...), empty
    /// when the production has none.
    pub keyword: &'static str,
    pub children: &'static [Kind],
}

impl Production {
    pub fn render(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if !self.keyword.is_empty() {
            parts.push(self.keyword);
        }
        parts.extend(self.children.iter().map(|k| k.as_str()));
        parts.join(" ")
    }
}

const fn p(keyword: &'static str, children: &'static [Kind]) -> Production {
    Production { keyword, children }
}

use Kind::{Filter as F, A, C, N, R, T, V};

const Z_RULES: &[Production] = &[
    p("intersect", &[R, R]),
    p("union", &[R, R]),
    p("except", &[R, R]),
    p("", &[R]),
];

const R_RULES: &[Production] = &[
    p("", &[Kind::Select]),
    p("", &[Kind::Select, F]),
    p("", &[Kind::Select, Kind::Order]),
    p("", &[Kind::Select, Kind::Superlative]),
    p("", &[Kind::Select, Kind::Order, F]),
    p("", &[Kind::Select, Kind::Superlative, F]),
];

const SELECT_RULES: &[Production] = &[p("", &[N])];

const N_RULES: &[Production] = &[
    p("", &[A]),
    p("", &[A, A]),
    p("", &[A, A, A]),
    p("", &[A, A, A, A]),
    p("", &[A, A, A, A, A]),
];

const A_RULES: &[Production] = &[
    p("none", &[C, T]),
    p("max", &[C, T]),
    p("min", &[C, T]),
    p("count", &[C, T]),
    p("sum", &[C, T]),
    p("avg", &[C, T]),
];

const FILTER_RULES: &[Production] = &[
    p("and", &[F, F]),
    p("or", &[F, F]),
    p("=", &[A, V]),
    p("!=", &[A, V]),
    p("<", &[A, V]),
    p(">", &[A, V]),
    p("<=", &[A, V]),
    p(">=", &[A, V]),
    p("between", &[A, V, V]),
    p("like", &[A, V]),
    p("not_like", &[A, V]),
    p("in", &[A, R]),
    p("not_in", &[A, R]),
    p("=", &[A, R]),
    p("!=", &[A, R]),
    p("<", &[A, R]),
    p(">", &[A, R]),
    p("<=", &[A, R]),
    p(">=", &[A, R]),
];

const ORDER_RULES: &[Production] = &[p("asc", &[A]), p("desc", &[A])];

const SUPERLATIVE_RULES: &[Production] = &[p("most", &[A, V]), p("least", &[A, V])];

/// Productions of a structural kind; empty for the payload terminals.
pub fn productions(kind: Kind) -> &'static [Production] {
    match kind {
        Kind::Z => Z_RULES,
        Kind::R => R_RULES,
        Kind::Select => SELECT_RULES,
        Kind::N => N_RULES,
        Kind::A => A_RULES,
        Kind::Filter => FILTER_RULES,
        Kind::Order => ORDER_RULES,
        Kind::Superlative => SUPERLATIVE_RULES,
        Kind::C | Kind::T | Kind::V => &[],
    }
}

/// The whole grammar, kind by kind.
pub fn grammar_table() -> Vec<(Kind, &'static [Production])> {
    Kind::ALL.iter().map(|&k| (k, productions(k))).collect()
}

/// Filter production indices, by role.
pub mod filter {
    pub const AND: usize = 0;
    pub const OR: usize = 1;
    /// `= != < > <= >=` against a value: indices 2..=7.
    pub const CMP_VALUE: std::ops::RangeInclusive<usize> = 2..=7;
    pub const BETWEEN: usize = 8;
    pub const LIKE: usize = 9;
    pub const NOT_LIKE: usize = 10;
    pub const IN: usize = 11;
    pub const NOT_IN: usize = 12;
    /// `= != < > <= >=` against a subquery: indices 13..=18.
    pub const CMP_QUERY: std::ops::RangeInclusive<usize> = 13..=18;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_has_exactly_asc_and_desc() {
        let names: Vec<String> = productions(Kind::Order)
            .iter()
            .map(|p| p.render())
            .collect();
        assert_eq!(names, vec!["asc A", "desc A"]);
    }

    #[test]
    fn values_only_occur_in_filter_and_superlative() {
        for (kind, rules) in grammar_table() {
            for r in rules {
                if r.children.contains(&Kind::V) {
                    assert!(matches!(kind, Kind::Filter | Kind::Superlative), "{kind}");
                }
            }
        }
    }

    #[test]
    fn grammar_is_closed() {
        for (_, rules) in grammar_table() {
            for r in rules {
                for c in r.children {
                    assert!(c.is_terminal() || !productions(*c).is_empty());
                }
            }
        }
        assert!(productions(Kind::C).is_empty());
    }

    #[test]
    fn filter_role_ranges_match_the_table() {
        for i in filter::CMP_VALUE {
            assert_eq!(FILTER_RULES[i].children, &[A, V]);
        }
        for i in filter::CMP_QUERY {
            assert_eq!(FILTER_RULES[i].children, &[A, R]);
            assert_eq!(FILTER_RULES[i].keyword, FILTER_RULES[i - 11].keyword);
        }
    }
}
