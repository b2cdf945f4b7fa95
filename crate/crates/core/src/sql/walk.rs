use sqlparser::dialect::SQLiteDialect;
use sqlparser::tokenizer::{Token, Tokenizer};

use super::*;
use crate::schema::DatabaseSchema;

/// Whether a double-quoted name refers to a column of the schema (SQLite
/// falls back to a string literal otherwise).
pub fn quoted_names_column(name: &str, schema: Option<&DatabaseSchema>) -> bool {
    schema.is_some_and(|s| {
        s.columns
            .iter()
            .skip(1)
            .any(|c| c.name.eq_ignore_ascii_case(name))
    })
}

fn as_literal(e: &ValueExpr, schema: Option<&DatabaseSchema>) -> Option<Literal> {
    match e {
        ValueExpr::Literal(l) => Some(l.clone()),
        ValueExpr::QuotedName(n) if !quoted_names_column(n, schema) => {
            Some(Literal::text(n.clone()))
        }
        _ => None,
    }
}

/// Visits the literal operands of WHERE/HAVING conditions and LIMIT
/// clauses, depth first and left to right, descending into subqueries where
/// they occur.
struct LiteralWalker<'a, F: FnMut(&Literal, bool)> {
    schema: Option<&'a DatabaseSchema>,
    f: F,
}

impl<F: FnMut(&Literal, bool)> LiteralWalker<'_, F> {
    fn query(&mut self, q: &Query) {
        match &q.body {
            Body::Select(s) => self.core(s),
            Body::SetOp { left, right, .. } => {
                self.query(left);
                self.query(right);
            }
        }
        if let Some(l) = q.limit.as_ref().and_then(|e| as_literal(e, self.schema)) {
            (self.f)(&l, true);
        }
    }

    fn core(&mut self, s: &SelectCore) {
        for src in &s.from {
            if let FromItem::Subquery { query, .. } = &src.item {
                self.query(query);
            }
        }
        if let Some(c) = &s.selection {
            self.cond(c);
        }
        if let Some(c) = &s.having {
            self.cond(c);
        }
    }

    fn operand(&mut self, e: &ValueExpr) {
        if let Some(l) = as_literal(e, self.schema) {
            (self.f)(&l, false);
        } else if let ValueExpr::Subquery(q) = e {
            self.query(q);
        }
    }

    fn cond(&mut self, c: &Condition) {
        match c {
            Condition::And(a, b) | Condition::Or(a, b) => {
                self.cond(a);
                self.cond(b);
            }
            Condition::Not(a) => self.cond(a),
            Condition::Compare { left, right, .. } => {
                self.operand(left);
                self.operand(right);
            }
            Condition::Between {
                expr, low, high, ..
            } => {
                self.operand(expr);
                self.operand(low);
                self.operand(high);
            }
            Condition::Like { expr, pattern, .. } => {
                self.operand(expr);
                self.operand(pattern);
            }
            Condition::InSubquery { expr, subquery, .. } => {
                self.operand(expr);
                self.query(subquery);
            }
            Condition::InList { expr, list, .. } => {
                self.operand(expr);
                for e in list {
                    self.operand(e);
                }
            }
            Condition::IsNull { expr, .. } => self.operand(expr),
            Condition::Exists { subquery, .. } => self.query(subquery),
            Condition::Unsupported(_) => {}
        }
    }
}

/// Distinct literals of a gold query in first-occurrence order. This is the
/// value-option list of light mode and the payload space of converted trees.
pub fn gold_literals(q: &Query, schema: Option<&DatabaseSchema>) -> Vec<Literal> {
    let mut out: Vec<Literal> = Vec::new();
    let mut w = LiteralWalker {
        schema,
        f: |l: &Literal, _| {
            if !out.contains(l) {
                out.push(l.clone());
            }
        },
    };
    w.query(q);
    out
}

/// Literal occurrences in a query, split by clause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralCounts {
    /// Operands of WHERE and HAVING conditions.
    pub conditions: usize,
    pub limits: usize,
}

impl LiteralCounts {
    pub fn of(q: &Query, schema: Option<&DatabaseSchema>) -> Self {
        let mut counts = LiteralCounts::default();
        let mut w = LiteralWalker {
            schema,
            f: |_: &Literal, is_limit| {
                if is_limit {
                    counts.limits += 1;
                } else {
                    counts.conditions += 1;
                }
            },
        };
        w.query(q);
        counts
    }

    pub fn total(&self, include_limit: bool) -> usize {
        self.conditions + if include_limit { self.limits } else { 0 }
    }
}

/// String and numeric literal tokens of a SQL text, in order. A minus sign
/// in operand position is folded into the number that follows it.
pub fn literal_tokens(sql: &str) -> Result<Vec<Literal>, SqlError> {
    let tokens = Tokenizer::new(&SQLiteDialect {}, sql)
        .tokenize()
        .map_err(|e| SqlError::Parse(e.to_string()))?;
    let mut out = Vec::new();
    let mut prev: Option<&Token> = None;
    let mut pending_minus = false;
    for tok in tokens.iter().filter(|t| !matches!(t, Token::Whitespace(_))) {
        match tok {
            Token::SingleQuotedString(s) => out.push(Literal::text(s.clone())),
            Token::Number(n, _) => {
                let text = if pending_minus {
                    format!("-{n}")
                } else {
                    n.clone()
                };
                out.push(Literal::number(text));
            }
            _ => {}
        }
        pending_minus = matches!(tok, Token::Minus)
            && !matches!(
                prev,
                Some(
                    Token::Number(..)
                        | Token::Word(_)
                        | Token::RParen
                        | Token::SingleQuotedString(_)
                )
            );
        prev = Some(tok);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sql::parse_query;

    #[test]
    fn gold_literals_are_ordered_and_deduplicated() {
        let q = parse_query(
            "SELECT name FROM singer WHERE country = 'France' AND age > 20 \
             INTERSECT SELECT name FROM singer WHERE country = 'France' ORDER BY age LIMIT 3",
        )
        .unwrap();
        let lits = gold_literals(&q, None);
        assert_eq!(
            lits,
            vec![
                Literal::text("France"),
                Literal::number("20"),
                Literal::number("3")
            ]
        );
        let counts = LiteralCounts::of(&q, None);
        assert_eq!(
            counts,
            LiteralCounts {
                conditions: 3,
                limits: 1
            }
        );
    }

    #[test]
    fn quoted_names_resolve_against_the_schema() {
        let schema = fixtures::pets_schema();
        let q = parse_query("SELECT Name FROM Student WHERE home_country = \"France\"").unwrap();
        assert_eq!(
            gold_literals(&q, Some(&schema)),
            vec![Literal::text("France")]
        );
        let q = parse_query("SELECT Name FROM Student WHERE \"age\" > 20").unwrap();
        assert_eq!(
            gold_literals(&q, Some(&schema)),
            vec![Literal::number("20")]
        );
    }

    #[test]
    fn nested_values_are_counted() {
        let q = parse_query(
            "SELECT a FROM t WHERE b IN (SELECT b FROM u WHERE c = 'x') AND d BETWEEN 1 AND 5",
        )
        .unwrap();
        assert_eq!(LiteralCounts::of(&q, None).total(true), 3);
    }

    #[test]
    fn tokens_fold_unary_minus() {
        let lits = literal_tokens("SELECT a - 1 FROM t WHERE b = -5 AND c = 'it''s'").unwrap();
        assert_eq!(
            lits,
            vec![
                Literal::number("1"),
                Literal::number("-5"),
                Literal::text("it's")
            ]
        );
    }
}
