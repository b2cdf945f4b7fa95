//! SemQL tree to SQLite SQL.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::format::{format_value, like_cue, FormatError, ValueUse};
use super::joins::{infer_joins, JoinError};
use crate::graph::SchemaGraph;
use crate::schema::DatabaseSchema;
use crate::semql::{AggNode, FilterNode, QueryNode, SemQlTree, Tail};
use crate::sql::SetOp;
use crate::sqlite::ident_if_needed;
use crate::values::ValueCandidate;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledQuery {
    pub sql: String,
    /// FNV-1a of the tree's canonical JSON.
    pub tree_hash: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("value payload {0} has no candidate")]
    UnresolvedValue(usize),
    #[error("column {0} does not exist in the schema")]
    UnknownColumn(usize),
    #[error("table {0} does not exist in the schema")]
    UnknownTable(usize),
    #[error("bare * cannot appear in a {0} clause")]
    StarOutsideSelect(&'static str),
    #[error("an OR mixes aggregated and plain conditions")]
    MixedHavingWhere,
    #[error("a block must select between 1 and 5 items, found {0}")]
    SelectArity(usize),
    #[error("join inference failed: {0}")]
    Join(#[from] JoinError),
    #[error("value formatting failed: {0}")]
    Format(#[from] FormatError),
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Render `tree` as SQL. V payloads index into `candidates`; `question`
/// decides LIKE wildcard placement.
pub fn compile(
    tree: &SemQlTree,
    schema: &DatabaseSchema,
    graph: &SchemaGraph,
    candidates: &[ValueCandidate],
    question: &str,
) -> Result<CompiledQuery, CompileError> {
    let mut c = Compiler {
        schema,
        graph,
        candidates,
        question,
        next_alias: 1,
    };
    let sql = match tree {
        SemQlTree::Single(q) => c.block(q)?,
        SemQlTree::Compound { op, left, right } => {
            let l = c.member(left)?;
            let r = c.member(right)?;
            let kw = match op {
                SetOp::Union => "UNION",
                SetOp::Intersect => "INTERSECT",
                SetOp::Except => "EXCEPT",
            };
            format!("{l} {kw} {r}")
        }
    };
    Ok(CompiledQuery {
        sql,
        tree_hash: fnv1a(tree.to_json().as_bytes()),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Clause {
    Where,
    Having,
}

struct Compiler<'a> {
    schema: &'a DatabaseSchema,
    graph: &'a SchemaGraph,
    candidates: &'a [ValueCandidate],
    question: &'a str,
    next_alias: usize,
}

type Aliases = HashMap<usize, String>;

fn leaves<'f>(f: &'f FilterNode, out: &mut Vec<&'f FilterNode>) {
    match f {
        FilterNode::And(a, b) | FilterNode::Or(a, b) => {
            leaves(a, out);
            leaves(b, out);
        }
        leaf => out.push(leaf),
    }
}

fn clause_of(f: &FilterNode) -> Option<Clause> {
    match f {
        FilterNode::And(a, b) | FilterNode::Or(a, b) => {
            let (ca, cb) = (clause_of(a)?, clause_of(b)?);
            (ca == cb).then_some(ca)
        }
        leaf => Some(if leaf.leaf_agg().is_some_and(AggNode::is_aggregated) {
            Clause::Having
        } else {
            Clause::Where
        }),
    }
}

fn tail_agg(q: &QueryNode) -> Option<&AggNode> {
    match &q.tail {
        Some(Tail::Order(o)) => Some(&o.agg),
        Some(Tail::Superlative(s)) => Some(&s.agg),
        None => None,
    }
}

/// Every A node of a block outside its subqueries: select items, filter
/// leaves, then the tail.
pub fn block_aggs(q: &QueryNode) -> Vec<&AggNode> {
    let mut filter_leaves = Vec::new();
    if let Some(f) = &q.filter {
        leaves(f, &mut filter_leaves);
    }
    q.select
        .iter()
        .chain(filter_leaves.iter().filter_map(|l| l.leaf_agg()))
        .chain(tail_agg(q))
        .collect()
}

/// Tables a block must join: each column's own table, and T for `*`.
pub fn block_terminals(
    q: &QueryNode,
    schema: &DatabaseSchema,
) -> Result<BTreeSet<usize>, CompileError> {
    let mut out = BTreeSet::new();
    for a in block_aggs(q) {
        let col = schema
            .columns
            .get(a.column)
            .ok_or(CompileError::UnknownColumn(a.column))?;
        let t = col.table.unwrap_or(a.table);
        if t >= schema.tables.len() {
            return Err(CompileError::UnknownTable(t));
        }
        out.insert(t);
    }
    Ok(out)
}

/// The GROUP BY columns the compiler emits, or `None` for a block without
/// aggregation. Plain selected columns, in order, without repeats.
pub fn reconstructed_group_by(q: &QueryNode) -> Option<Vec<usize>> {
    if !block_aggs(q).iter().any(|a| a.is_aggregated()) {
        return None;
    }
    let mut group = Vec::new();
    for a in q.select.iter().filter(|a| !a.is_aggregated()) {
        if a.column != DatabaseSchema::STAR && !group.contains(&a.column) {
            group.push(a.column);
        }
    }
    Some(group)
}

impl Compiler<'_> {
    fn member(&mut self, q: &QueryNode) -> Result<String, CompileError> {
        let sql = self.block(q)?;
        // SQLite rejects ORDER BY/LIMIT on a compound member.
        Ok(if q.tail.is_some() {
            format!("SELECT * FROM ({sql})")
        } else {
            sql
        })
    }

    fn block(&mut self, q: &QueryNode) -> Result<String, CompileError> {
        if q.select.is_empty() || q.select.len() > 5 {
            return Err(CompileError::SelectArity(q.select.len()));
        }
        let terminals = block_terminals(q, self.schema)?;
        let plan = infer_joins(&terminals, self.graph)?;
        let mut aliases = Aliases::new();
        for &t in &plan.tables {
            aliases.insert(t, format!("T{}", self.next_alias));
            self.next_alias += 1;
        }
        let table_ref = |t: usize, aliases: &Aliases| {
            format!(
                "{} AS {}",
                ident_if_needed(&self.schema.tables[t].name),
                aliases[&t]
            )
        };
        let mut from = table_ref(plan.tables[0], &aliases);
        for step in &plan.steps {
            from.push_str(&format!(
                " JOIN {} ON {} = {}",
                table_ref(step.right_table, &aliases),
                self.column_ref(step.left_column, &aliases),
                self.column_ref(step.right_column, &aliases),
            ));
        }

        let items: Vec<String> = q
            .select
            .iter()
            .map(|a| self.agg_expr(a, &aliases))
            .collect();
        let mut sql = format!("SELECT {} FROM {from}", items.join(", "));

        let (mut where_parts, mut having_parts) = (Vec::new(), Vec::new());
        if let Some(f) = &q.filter {
            self.split(f, &aliases, &mut where_parts, &mut having_parts)?;
        }
        if !where_parts.is_empty() {
            sql.push_str(" WHERE ");
            sql.push_str(&where_parts.join(" AND "));
        }
        if let Some(group) = reconstructed_group_by(q) {
            if !group.is_empty() {
                let cols: Vec<String> = group
                    .iter()
                    .map(|&c| self.column_ref(c, &aliases))
                    .collect();
                sql.push_str(" GROUP BY ");
                sql.push_str(&cols.join(", "));
            }
        }
        if !having_parts.is_empty() {
            sql.push_str(" HAVING ");
            sql.push_str(&having_parts.join(" AND "));
        }
        match &q.tail {
            Some(Tail::Order(o)) => {
                self.forbid_bare_star(&o.agg, "ORDER BY")?;
                let dir = if o.desc { "DESC" } else { "ASC" };
                sql.push_str(&format!(
                    " ORDER BY {} {dir}",
                    self.agg_expr(&o.agg, &aliases)
                ));
            }
            Some(Tail::Superlative(s)) => {
                self.forbid_bare_star(&s.agg, "ORDER BY")?;
                let dir = if s.most { "DESC" } else { "ASC" };
                let n = self.value(s.value, &s.agg, ValueUse::Limit)?;
                sql.push_str(&format!(
                    " ORDER BY {} {dir} LIMIT {n}",
                    self.agg_expr(&s.agg, &aliases)
                ));
            }
            None => {}
        }
        Ok(sql)
    }

    fn forbid_bare_star(&self, a: &AggNode, clause: &'static str) -> Result<(), CompileError> {
        if a.column == DatabaseSchema::STAR && !a.is_aggregated() {
            return Err(CompileError::StarOutsideSelect(clause));
        }
        Ok(())
    }

    fn column_ref(&self, column: usize, aliases: &Aliases) -> String {
        let col = &self.schema.columns[column];
        match col.table {
            Some(t) => format!("{}.{}", aliases[&t], ident_if_needed(&col.name)),
            None => "*".to_string(),
        }
    }

    fn agg_expr(&self, a: &AggNode, aliases: &Aliases) -> String {
        let inner = self.column_ref(a.column, aliases);
        match a.agg.sql_name() {
            Some(f) => format!("{f}({inner})"),
            None => inner,
        }
    }

    fn value(&self, idx: usize, a: &AggNode, how: ValueUse) -> Result<String, CompileError> {
        let cand = self
            .candidates
            .get(idx)
            .ok_or(CompileError::UnresolvedValue(idx))?;
        let column = &self.schema.columns[a.column];
        let how = match how {
            ValueUse::Like(_) => ValueUse::Like(like_cue(self.question, cand.span)),
            other => other,
        };
        Ok(format_value(cand, column, a.agg, how)?)
    }

    fn split(
        &mut self,
        f: &FilterNode,
        aliases: &Aliases,
        where_parts: &mut Vec<String>,
        having_parts: &mut Vec<String>,
    ) -> Result<(), CompileError> {
        if let FilterNode::And(a, b) = f {
            self.split(a, aliases, where_parts, having_parts)?;
            return self.split(b, aliases, where_parts, having_parts);
        }
        let clause = clause_of(f).ok_or(CompileError::MixedHavingWhere)?;
        // Parts are joined with AND, so a top-level OR keeps its parentheses.
        let text = self.condition(f, aliases, true)?;
        match clause {
            Clause::Where => where_parts.push(text),
            Clause::Having => having_parts.push(text),
        }
        Ok(())
    }

    fn condition(
        &mut self,
        f: &FilterNode,
        aliases: &Aliases,
        under_and: bool,
    ) -> Result<String, CompileError> {
        Ok(match f {
            FilterNode::And(a, b) => format!(
                "{} AND {}",
                self.condition(a, aliases, true)?,
                self.condition(b, aliases, true)?
            ),
            FilterNode::Or(a, b) => {
                let s = format!(
                    "{} OR {}",
                    self.condition(a, aliases, false)?,
                    self.condition(b, aliases, false)?
                );
                if under_and {
                    format!("({s})")
                } else {
                    s
                }
            }
            FilterNode::Compare { op, agg, value } => {
                self.forbid_bare_star(agg, "WHERE")?;
                let v = self.value(*value, agg, ValueUse::Compare)?;
                format!("{} {} {v}", self.agg_expr(agg, aliases), op.as_sql())
            }
            FilterNode::Between { agg, low, high } => {
                self.forbid_bare_star(agg, "WHERE")?;
                let lo = self.value(*low, agg, ValueUse::Compare)?;
                let hi = self.value(*high, agg, ValueUse::Compare)?;
                format!("{} BETWEEN {lo} AND {hi}", self.agg_expr(agg, aliases))
            }
            FilterNode::Like {
                negated,
                agg,
                value,
            } => {
                self.forbid_bare_star(agg, "WHERE")?;
                let v = self.value(
                    *value,
                    agg,
                    ValueUse::Like(super::format::LikeCue::Contains),
                )?;
                let kw = if *negated { "NOT LIKE" } else { "LIKE" };
                format!("{} {kw} {v}", self.agg_expr(agg, aliases))
            }
            FilterNode::In {
                negated,
                agg,
                query,
            } => {
                self.forbid_bare_star(agg, "WHERE")?;
                let lhs = self.agg_expr(agg, aliases);
                let sub = self.block(query)?;
                let kw = if *negated { "NOT IN" } else { "IN" };
                format!("{lhs} {kw} ({sub})")
            }
            FilterNode::CompareQuery { op, agg, query } => {
                self.forbid_bare_star(agg, "WHERE")?;
                let lhs = self.agg_expr(agg, aliases);
                let sub = self.block(query)?;
                format!("{lhs} {} ({sub})", op.as_sql())
            }
        })
    }
}

/// Whether every JOIN in `sql` has an ON before the next clause; a bare
/// JOIN is a cross join.
pub fn joins_have_on(sql: &str) -> bool {
    const ENDS: &[&str] = &[
        "JOIN",
        "WHERE",
        "GROUP",
        "HAVING",
        "ORDER",
        "LIMIT",
        "UNION",
        "INTERSECT",
        "EXCEPT",
        ")",
    ];
    let upper = sql
        .to_ascii_uppercase()
        .replace('(', " ( ")
        .replace(')', " ) ");
    let words: Vec<&str> = upper.split_whitespace().collect();
    words
        .iter()
        .enumerate()
        .filter(|(_, w)| **w == "JOIN")
        .all(|(i, _)| {
            words[i + 1..]
                .iter()
                .find(|w| **w == "ON" || ENDS.contains(w))
                .is_some_and(|w| *w == "ON")
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::build_schema_graph;
    use crate::semql::{AggKind, SuperlativeNode, Tail};
    use crate::sql::CmpOp;
    use crate::values::Origin;

    fn cands(values: &[&str]) -> Vec<ValueCandidate> {
        values
            .iter()
            .map(|v| ValueCandidate::new(*v, Origin::LightOption))
            .collect()
    }

    #[test]
    fn french_pets_compiles_with_bridge_joins() {
        let schema = fixtures::pets_schema();
        let g = build_schema_graph(&schema);
        let tree = SemQlTree::Single(Box::new(QueryNode {
            select: vec![AggNode {
                agg: AggKind::Count,
                column: 0,
                table: 2,
            }],
            filter: Some(FilterNode::and(
                FilterNode::Compare {
                    op: CmpOp::Eq,
                    agg: AggNode {
                        agg: AggKind::None,
                        column: 4,
                        table: 0,
                    },
                    value: 0,
                },
                FilterNode::Compare {
                    op: CmpOp::Gt,
                    agg: AggNode {
                        agg: AggKind::None,
                        column: 3,
                        table: 0,
                    },
                    value: 1,
                },
            )),
            tail: None,
        }));
        let out = compile(&tree, &schema, &g, &cands(&["France", "20"]), "").unwrap();
        assert_eq!(
            out.sql,
            "SELECT count(*) FROM Student AS T1 JOIN Has_Pet AS T2 ON T1.StuID = T2.StuID \
             JOIN Pet AS T3 ON T2.PetID = T3.PetID WHERE T1.home_country = 'France' AND T1.age > 20"
        );
        assert!(joins_have_on(&out.sql));
    }

    #[test]
    fn superlative_emits_order_and_limit() {
        let schema = fixtures::pets_schema();
        let g = build_schema_graph(&schema);
        let name = AggNode {
            agg: AggKind::None,
            column: 2,
            table: 0,
        };
        let age = AggNode { column: 3, ..name };
        let tree = SemQlTree::Single(Box::new(QueryNode {
            select: vec![name],
            filter: None,
            tail: Some(Tail::Superlative(SuperlativeNode {
                most: true,
                agg: age,
                value: 0,
            })),
        }));
        let out = compile(&tree, &schema, &g, &cands(&["3"]), "").unwrap();
        assert_eq!(
            out.sql,
            "SELECT T1.Name FROM Student AS T1 ORDER BY T1.age DESC LIMIT 3"
        );
        let err = compile(&tree, &schema, &g, &[], "").unwrap_err();
        assert_eq!(err, CompileError::UnresolvedValue(0));
    }

    #[test]
    fn having_and_group_by_are_reconstructed() {
        let schema = fixtures::pets_schema();
        let g = build_schema_graph(&schema);
        let country = AggNode {
            agg: AggKind::None,
            column: 4,
            table: 0,
        };
        let count = AggNode {
            agg: AggKind::Count,
            column: 0,
            table: 0,
        };
        let tree = SemQlTree::Single(Box::new(QueryNode {
            select: vec![country, count],
            filter: Some(FilterNode::and(
                FilterNode::Compare {
                    op: CmpOp::Gt,
                    agg: count,
                    value: 0,
                },
                FilterNode::Compare {
                    op: CmpOp::Ne,
                    agg: country,
                    value: 1,
                },
            )),
            tail: None,
        }));
        let out = compile(&tree, &schema, &g, &cands(&["1", "USA"]), "").unwrap();
        assert_eq!(
            out.sql,
            "SELECT T1.home_country, count(*) FROM Student AS T1 WHERE T1.home_country != 'USA' \
             GROUP BY T1.home_country HAVING count(*) > 1"
        );
        let mixed = SemQlTree::Single(Box::new(QueryNode {
            select: vec![country],
            filter: Some(FilterNode::or(
                FilterNode::Compare {
                    op: CmpOp::Gt,
                    agg: count,
                    value: 0,
                },
                FilterNode::Compare {
                    op: CmpOp::Ne,
                    agg: country,
                    value: 1,
                },
            )),
            tail: None,
        }));
        assert_eq!(
            compile(&mixed, &schema, &g, &cands(&["1", "USA"]), ""),
            Err(CompileError::MixedHavingWhere)
        );
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
    }
}
