//! Gold SQL to SemQL, with literals captured as V payloads.
//!
//! Conversion is conservative: a query is accepted only when the compiler
//! will rebuild the same joins, grouping and literals from the tree.
//! Everything else is rejected with a reason code.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::tree::{
    AggKind, AggNode, FilterNode, OrderNode, QueryNode, SemQlTree, SuperlativeNode, Tail,
};
use crate::compile::{
    block_aggs, block_terminals, format_value, infer_joins, reconstructed_group_by, LikeCue,
    ValueUse,
};
use crate::graph::{build_schema_graph, SchemaGraph};
use crate::normalize::canonical_number;
use crate::schema::DatabaseSchema;
use crate::sql::{
    gold_literals, parse_query, quoted_names_column, AggFn, Body, CmpOp, ColumnRef, Condition,
    FromItem, JoinVia, Literal, LiteralKind, Query, ValueExpr,
};
use crate::sqlite::quote_text;
use crate::values::ValueCandidate;

/// Why a gold query has no SemQL form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unsupported {
    pub code: String,
    pub detail: String,
}

impl Unsupported {
    fn new(code: &str, detail: impl Into<String>) -> Self {
        Unsupported {
            code: code.to_string(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Unsupported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.detail.is_empty() {
            f.write_str(&self.code)
        } else {
            write!(f, "{}: {}", self.code, self.detail)
        }
    }
}

impl std::error::Error for Unsupported {}

fn reject<T>(code: &str) -> Result<T, Unsupported> {
    Err(Unsupported::new(code, ""))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvertedQuery {
    pub tree: SemQlTree,
    /// V payloads index into this list (the gold literals in walk order).
    pub values: Vec<Literal>,
}

pub fn sql_to_semql(
    gold_sql: &str,
    schema: &DatabaseSchema,
) -> Result<ConvertedQuery, Unsupported> {
    let q = parse_query(gold_sql).map_err(|e| Unsupported::new("parse_error", e.to_string()))?;
    query_to_semql(&q, schema)
}

pub fn query_to_semql(q: &Query, schema: &DatabaseSchema) -> Result<ConvertedQuery, Unsupported> {
    let graph = build_schema_graph(schema);
    let conv = Converter {
        schema,
        graph: &graph,
        values: gold_literals(q, Some(schema)),
    };
    let tree = match &q.body {
        Body::Select(_) => SemQlTree::Single(Box::new(conv.block(q, &[])?)),
        Body::SetOp {
            op,
            all,
            left,
            right,
        } => {
            if let Some(code) = q.unsupported {
                return reject(code);
            }
            if *all {
                return reject("set_operation_all");
            }
            if !q.order_by.is_empty() || q.limit.is_some() || q.offset {
                return reject("set_operation_order");
            }
            for side in [left, right] {
                if matches!(side.body, Body::SetOp { .. }) {
                    return reject("nested_set_operation");
                }
                if !side.order_by.is_empty() || side.limit.is_some() {
                    return reject("set_operation_order");
                }
            }
            SemQlTree::Compound {
                op: *op,
                left: Box::new(conv.block(left, &[])?),
                right: Box::new(conv.block(right, &[])?),
            }
        }
    };
    Ok(ConvertedQuery {
        tree,
        values: conv.values,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Clause {
    Where,
    Having,
}

/// Tables visible in one SELECT block.
#[derive(Default)]
struct Scope {
    /// (table name, alias, table index)
    entries: Vec<(String, Option<String>, usize)>,
}

enum Lookup {
    Found(usize),
    Ambiguous,
    Missing,
    /// The qualifier names a table here, but the column is not in it.
    NoSuchColumn,
}

struct Converter<'a> {
    schema: &'a DatabaseSchema,
    graph: &'a SchemaGraph,
    values: Vec<Literal>,
}

fn literal_of(e: &ValueExpr, schema: &DatabaseSchema) -> Option<Literal> {
    match e {
        ValueExpr::Literal(l) => Some(l.clone()),
        ValueExpr::QuotedName(n) if !quoted_names_column(n, Some(schema)) => {
            Some(Literal::text(n.clone()))
        }
        _ => None,
    }
}

fn agg_kind(f: AggFn) -> AggKind {
    match f {
        AggFn::Count => AggKind::Count,
        AggFn::Max => AggKind::Max,
        AggFn::Min => AggKind::Min,
        AggFn::Sum => AggKind::Sum,
        AggFn::Avg => AggKind::Avg,
    }
}

fn set_star_table(q: &mut QueryNode, table: usize) {
    fn fix(a: &mut AggNode, table: usize) {
        if a.column == DatabaseSchema::STAR {
            a.table = table;
        }
    }
    fn filter(f: &mut FilterNode, table: usize) {
        match f {
            FilterNode::And(a, b) | FilterNode::Or(a, b) => {
                filter(a, table);
                filter(b, table);
            }
            FilterNode::Compare { agg, .. }
            | FilterNode::Between { agg, .. }
            | FilterNode::Like { agg, .. }
            | FilterNode::In { agg, .. }
            | FilterNode::CompareQuery { agg, .. } => fix(agg, table),
        }
    }
    for a in &mut q.select {
        fix(a, table);
    }
    if let Some(f) = &mut q.filter {
        filter(f, table);
    }
    match &mut q.tail {
        Some(Tail::Order(o)) => fix(&mut o.agg, table),
        Some(Tail::Superlative(s)) => fix(&mut s.agg, table),
        None => {}
    }
}

impl Converter<'_> {
    fn lookup(&self, r: &ColumnRef, scope: &Scope) -> Lookup {
        match &r.qualifier {
            Some(qual) => {
                let hit = scope.entries.iter().find(|(name, alias, _)| {
                    alias
                        .as_deref()
                        .is_some_and(|a| a.eq_ignore_ascii_case(qual))
                        || name.eq_ignore_ascii_case(qual)
                });
                match hit {
                    Some(&(_, _, t)) => match self.schema.column_index(t, &r.name) {
                        Some(c) => Lookup::Found(c),
                        None => Lookup::NoSuchColumn,
                    },
                    None => Lookup::Missing,
                }
            }
            None => {
                let hits: Vec<usize> = scope
                    .entries
                    .iter()
                    .filter_map(|&(_, _, t)| self.schema.column_index(t, &r.name))
                    .collect();
                match hits.as_slice() {
                    [c] => Lookup::Found(*c),
                    [] => Lookup::Missing,
                    _ => Lookup::Ambiguous,
                }
            }
        }
    }

    fn resolve(&self, r: &ColumnRef, scopes: &[Scope]) -> Result<usize, Unsupported> {
        let (current, outer) = scopes.split_last().expect("a scope");
        let name = match &r.qualifier {
            Some(q) => format!("{q}.{}", r.name),
            None => r.name.clone(),
        };
        match self.lookup(r, current) {
            Lookup::Found(c) => Ok(c),
            Lookup::Ambiguous => Err(Unsupported::new("ambiguous_column", name)),
            Lookup::NoSuchColumn => Err(Unsupported::new("unknown_column", name)),
            Lookup::Missing => {
                if outer
                    .iter()
                    .any(|s| !matches!(self.lookup(r, s), Lookup::Missing))
                {
                    Err(Unsupported::new("correlated_subquery", name))
                } else {
                    Err(Unsupported::new("unknown_column", name))
                }
            }
        }
    }

    fn column_node(&self, column: usize, agg: AggKind) -> AggNode {
        AggNode {
            agg,
            column,
            // `*` gets its table once the block's joins are known.
            table: self.schema.column_table(column).unwrap_or(0),
        }
    }

    /// A column or aggregate operand as an A node.
    fn operand(&self, e: &ValueExpr, scopes: &[Scope]) -> Result<AggNode, Unsupported> {
        match e {
            ValueExpr::Column(r) => Ok(self.column_node(self.resolve(r, scopes)?, AggKind::None)),
            ValueExpr::QuotedName(n) if quoted_names_column(n, Some(self.schema)) => {
                let r = ColumnRef {
                    qualifier: None,
                    name: n.clone(),
                };
                Ok(self.column_node(self.resolve(&r, scopes)?, AggKind::None))
            }
            ValueExpr::Star => Ok(self.column_node(DatabaseSchema::STAR, AggKind::None)),
            ValueExpr::Aggregate {
                func,
                distinct,
                arg,
            } => {
                if *distinct {
                    return reject("distinct");
                }
                let inner = match arg.as_ref() {
                    ValueExpr::Aggregate { .. } => return reject("nested_aggregate"),
                    ValueExpr::Literal(_) => return reject("function"),
                    other => self.operand(other, scopes)?,
                };
                Ok(self.column_node(inner.column, agg_kind(*func)))
            }
            ValueExpr::QualifiedStar(_) => reject("qualified_wildcard"),
            ValueExpr::Arithmetic { .. } => reject("arithmetic"),
            ValueExpr::Literal(_) | ValueExpr::QuotedName(_) => reject("literal_operand"),
            ValueExpr::Subquery(_) => reject("subquery_operand"),
            ValueExpr::Unsupported(code) => reject(code),
        }
    }

    /// Index of a literal operand, checked to compile back to the same text.
    fn value(&self, e: &ValueExpr, agg: &AggNode, how: ValueUse) -> Result<usize, Unsupported> {
        let lit =
            literal_of(e, self.schema).ok_or_else(|| Unsupported::new("non_literal_value", ""))?;
        let idx = self
            .values
            .iter()
            .position(|l| *l == lit)
            .ok_or_else(|| Unsupported::new("value_not_indexed", lit.text.clone()))?;
        let expected = match lit.kind {
            LiteralKind::Text => quote_text(&lit.text),
            LiteralKind::Number => match canonical_number(&lit.text) {
                Some(n) => n,
                None => return Err(Unsupported::new("value_type_mismatch", lit.text.clone())),
            },
        };
        let column = &self.schema.columns[agg.column];
        match format_value(&ValueCandidate::from_literal(&lit), column, agg.agg, how) {
            Ok(text) if text == expected => Ok(idx),
            _ => Err(Unsupported::new(
                "value_type_mismatch",
                format!(
                    "{} against {}",
                    lit.text,
                    self.schema.qualified_name(agg.column)
                ),
            )),
        }
    }

    fn filter(
        &self,
        c: &Condition,
        scopes: &[Scope],
        clause: Clause,
    ) -> Result<FilterNode, Unsupported> {
        let leaf_agg = |e: &ValueExpr| -> Result<AggNode, Unsupported> {
            let a = self.operand(e, scopes).map_err(|u| {
                if u.code == "literal_operand" {
                    Unsupported::new("literal_on_left", "")
                } else {
                    u
                }
            })?;
            match (clause, a.is_aggregated()) {
                (Clause::Where, true) => reject("aggregate_in_where"),
                (Clause::Having, false) => reject("having_without_aggregate"),
                _ if a.column == DatabaseSchema::STAR && !a.is_aggregated() => {
                    reject("star_in_condition")
                }
                _ => Ok(a),
            }
        };
        match c {
            Condition::And(a, b) => Ok(FilterNode::and(
                self.filter(a, scopes, clause)?,
                self.filter(b, scopes, clause)?,
            )),
            Condition::Or(a, b) => Ok(FilterNode::or(
                self.filter(a, scopes, clause)?,
                self.filter(b, scopes, clause)?,
            )),
            Condition::Not(_) => reject("negation"),
            Condition::Compare { op, left, right } => {
                let agg = leaf_agg(left)?;
                match right {
                    ValueExpr::Subquery(q) => Ok(FilterNode::CompareQuery {
                        op: *op,
                        agg,
                        query: Box::new(self.block(q, scopes)?),
                    }),
                    ValueExpr::Column(_) | ValueExpr::Aggregate { .. } | ValueExpr::Star => {
                        reject("column_comparison")
                    }
                    ValueExpr::QuotedName(n) if quoted_names_column(n, Some(self.schema)) => {
                        reject("column_comparison")
                    }
                    ValueExpr::Arithmetic { .. } => reject("arithmetic"),
                    ValueExpr::QualifiedStar(_) => reject("qualified_wildcard"),
                    ValueExpr::Unsupported(code) => reject(code),
                    _ => Ok(FilterNode::Compare {
                        op: *op,
                        agg,
                        value: self.value(right, &agg, ValueUse::Compare)?,
                    }),
                }
            }
            Condition::Between {
                negated,
                expr,
                low,
                high,
            } => {
                if *negated {
                    return reject("negation");
                }
                let agg = leaf_agg(expr)?;
                if literal_of(low, self.schema).is_none() || literal_of(high, self.schema).is_none()
                {
                    return reject("between_operand");
                }
                Ok(FilterNode::Between {
                    agg,
                    low: self.value(low, &agg, ValueUse::Compare)?,
                    high: self.value(high, &agg, ValueUse::Compare)?,
                })
            }
            Condition::Like {
                negated,
                expr,
                pattern,
            } => {
                let agg = leaf_agg(expr)?;
                if literal_of(pattern, self.schema).is_none() {
                    return reject("like_operand");
                }
                Ok(FilterNode::Like {
                    negated: *negated,
                    agg,
                    value: self.value(pattern, &agg, ValueUse::Like(LikeCue::Contains))?,
                })
            }
            Condition::InSubquery {
                negated,
                expr,
                subquery,
            } => {
                let agg = leaf_agg(expr)?;
                Ok(FilterNode::In {
                    negated: *negated,
                    agg,
                    query: Box::new(self.block(subquery, scopes)?),
                })
            }
            Condition::InList { .. } => reject("in_list"),
            Condition::IsNull { .. } => reject("is_null"),
            Condition::Exists { .. } => reject("exists"),
            Condition::Unsupported(code) => reject(code),
        }
    }

    /// One SELECT block with its ORDER BY/LIMIT. `outer` holds the scopes of
    /// enclosing blocks, used only to name correlated references.
    fn block(&self, q: &Query, outer: &[Scope]) -> Result<QueryNode, Unsupported> {
        if let Some(code) = q.unsupported {
            return reject(code);
        }
        if q.offset {
            return reject("offset");
        }
        let core = match &q.body {
            Body::Select(core) => core,
            Body::SetOp { .. } => return reject("nested_set_operation"),
        };
        if core.distinct {
            return reject("distinct");
        }
        if core.from.is_empty() {
            return reject("missing_from");
        }

        let mut scope = Scope::default();
        let mut gold_tables = BTreeSet::new();
        let mut on_conditions = Vec::new();
        for src in &core.from {
            match &src.via {
                JoinVia::First => {}
                JoinVia::Comma | JoinVia::Join(None) => return reject("implicit_join"),
                JoinVia::Join(Some(c)) => on_conditions.push(c),
                JoinVia::Unsupported(code) => return reject(code),
            }
            match &src.item {
                FromItem::Table { name, alias } => {
                    let t = self
                        .schema
                        .table_index(name)
                        .ok_or_else(|| Unsupported::new("unknown_table", name.clone()))?;
                    if !gold_tables.insert(t) {
                        return Err(Unsupported::new("self_join", name.clone()));
                    }
                    scope.entries.push((name.clone(), alias.clone(), t));
                }
                FromItem::Subquery { .. } => return reject("from_subquery"),
                FromItem::Unsupported(code) => return reject(code),
            }
        }
        let scopes: Vec<Scope> = outer
            .iter()
            .map(|s| Scope {
                entries: s.entries.clone(),
            })
            .chain(std::iter::once(scope))
            .collect();

        let mut gold_pairs = BTreeSet::new();
        for cond in on_conditions {
            let (leaves, ors) = cond.flatten();
            if ors.iter().any(|&o| o) {
                return reject("join_condition");
            }
            for leaf in leaves {
                match leaf {
                    Condition::Compare {
                        op: CmpOp::Eq,
                        left: ValueExpr::Column(a),
                        right: ValueExpr::Column(b),
                    } => {
                        let (a, b) = (self.resolve(a, &scopes)?, self.resolve(b, &scopes)?);
                        gold_pairs.insert((a.min(b), a.max(b)));
                    }
                    _ => return reject("join_condition"),
                }
            }
        }

        if core.items.len() > 5 {
            return reject("too_many_select_items");
        }
        let select = core
            .items
            .iter()
            .map(|e| {
                self.operand(e, &scopes).map_err(|u| {
                    if u.code == "literal_operand" {
                        Unsupported::new("literal_select", "")
                    } else {
                        u
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if select.is_empty() {
            return reject("empty_select");
        }

        let where_f = core
            .selection
            .as_ref()
            .map(|c| self.filter(c, &scopes, Clause::Where))
            .transpose()?;
        let having_f = core
            .having
            .as_ref()
            .map(|c| self.filter(c, &scopes, Clause::Having))
            .transpose()?;
        let filter = match (where_f, having_f) {
            (Some(w), Some(h)) => Some(FilterNode::and(w, h)),
            (w, h) => w.or(h),
        };

        let tail = match (q.order_by.as_slice(), &q.limit) {
            ([], None) => None,
            ([], Some(_)) => return reject("limit_without_order"),
            ([item], limit) => {
                let agg = match self.operand(&item.expr, &scopes) {
                    Err(u) if u.code == "literal_operand" => return reject("order_by_position"),
                    other => other?,
                };
                if agg.column == DatabaseSchema::STAR && !agg.is_aggregated() {
                    return reject("order_by_star");
                }
                match limit {
                    None => Some(Tail::Order(OrderNode {
                        desc: item.desc,
                        agg,
                    })),
                    Some(l) => {
                        if literal_of(l, self.schema).is_none() {
                            return reject("limit_expression");
                        }
                        Some(Tail::Superlative(SuperlativeNode {
                            most: item.desc,
                            agg,
                            value: self.value(l, &agg, ValueUse::Limit)?,
                        }))
                    }
                }
            }
            _ => return reject("multi_key_order"),
        };

        let mut node = QueryNode {
            select,
            filter,
            tail,
        };
        self.settle_joins(&mut node, &core.from, &gold_tables, &gold_pairs)?;

        let mut gold_group = BTreeSet::new();
        for e in &core.group_by {
            match self.operand(e, &scopes)? {
                a if !a.is_aggregated() && a.column != DatabaseSchema::STAR => {
                    gold_group.insert(a.column);
                }
                _ => return reject("group_by_expression"),
            }
        }
        let rebuilt: BTreeSet<usize> = reconstructed_group_by(&node)
            .unwrap_or_default()
            .into_iter()
            .collect();
        if rebuilt != gold_group {
            return reject("group_by_not_reconstructible");
        }
        Ok(node)
    }

    /// Pick T for `*` nodes so that the compiler's join inference rebuilds
    /// exactly the gold tables and ON pairs.
    fn settle_joins(
        &self,
        node: &mut QueryNode,
        from: &[crate::sql::FromSource],
        gold_tables: &BTreeSet<usize>,
        gold_pairs: &BTreeSet<(usize, usize)>,
    ) -> Result<(), Unsupported> {
        let aggs = block_aggs(node);
        let has_star = aggs.iter().any(|a| a.column == DatabaseSchema::STAR);
        let mentioned: BTreeSet<usize> = aggs
            .iter()
            .filter_map(|a| self.schema.column_table(a.column))
            .collect();
        let mut choices: Vec<Option<usize>> = Vec::new();
        if has_star {
            let from_order: Vec<usize> = from
                .iter()
                .filter_map(|s| match &s.item {
                    FromItem::Table { name, .. } => self.schema.table_index(name),
                    _ => None,
                })
                .collect();
            choices.extend(
                from_order
                    .iter()
                    .filter(|t| !mentioned.contains(t))
                    .map(|&t| Some(t)),
            );
            choices.extend(
                from_order
                    .iter()
                    .filter(|t| mentioned.contains(t))
                    .map(|&t| Some(t)),
            );
        } else {
            choices.push(None);
        }
        for choice in choices {
            if let Some(t) = choice {
                set_star_table(node, t);
            }
            let Ok(terminals) = block_terminals(node, self.schema) else {
                continue;
            };
            let Ok(plan) = infer_joins(&terminals, self.graph) else {
                continue;
            };
            let tables: BTreeSet<usize> = plan.tables.iter().copied().collect();
            let pairs: BTreeSet<(usize, usize)> =
                plan.steps.iter().map(|s| s.column_pair()).collect();
            if &tables == gold_tables && &pairs == gold_pairs {
                return Ok(());
            }
        }
        reject("join_path_mismatch")
    }
}
