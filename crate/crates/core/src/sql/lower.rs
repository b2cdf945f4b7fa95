use sqlparser::ast::{
    self as sp, BinaryOperator, DuplicateTreatment, Expr, FunctionArg, FunctionArgExpr,
    FunctionArguments, GroupByExpr, JoinConstraint, JoinOperator, LimitClause, ObjectName,
    ObjectNamePart, OrderByKind, OrderBySort, SelectItem, SetExpr, SetOperator, SetQuantifier,
    Statement, TableFactor, UnaryOperator,
};
use sqlparser::dialect::SQLiteDialect;
use sqlparser::parser::Parser;

use super::*;

/// Parse one SELECT statement (a trailing `;` is fine) and lower it.
pub fn parse_query(sql: &str) -> Result<Query, SqlError> {
    let stmts =
        Parser::parse_sql(&SQLiteDialect {}, sql).map_err(|e| SqlError::Parse(e.to_string()))?;
    match stmts.as_slice() {
        [Statement::Query(q)] => Ok(lower_query(q)),
        [] => Err(SqlError::NotAQuery("empty input".into())),
        [other] => Err(SqlError::NotAQuery(first_word(&other.to_string()))),
        many => Err(SqlError::NotAQuery(format!("{} statements", many.len()))),
    }
}

fn first_word(s: &str) -> String {
    s.split_whitespace().next().unwrap_or_default().to_string()
}

fn object_name(name: &ObjectName) -> Option<String> {
    match name.0.last()? {
        ObjectNamePart::Identifier(id) => Some(id.value.clone()),
        _ => None,
    }
}

fn lower_query(q: &sp::Query) -> Query {
    let mut unsupported = None;
    if q.with.is_some() {
        unsupported = Some("cte");
    } else if q.fetch.is_some() || !q.locks.is_empty() || !q.pipe_operators.is_empty() {
        unsupported = Some("query_modifier");
    }
    let mut order_by = Vec::new();
    if let Some(ob) = &q.order_by {
        match &ob.kind {
            OrderByKind::Expressions(items) => {
                for it in items {
                    order_by.push(OrderItem {
                        expr: lower_value(&it.expr),
                        desc: matches!(it.options.sort, Some(OrderBySort::Desc)),
                    });
                }
            }
            OrderByKind::All(_) => unsupported = unsupported.or(Some("order_by_all")),
        }
    }
    let (limit, offset) = match &q.limit_clause {
        None => (None, false),
        Some(LimitClause::LimitOffset { limit, offset, .. }) => {
            (limit.as_ref().map(lower_value), offset.is_some())
        }
        Some(LimitClause::OffsetCommaLimit { limit, .. }) => (Some(lower_value(limit)), true),
    };
    let mut out = set_expr_query(&q.body);
    if !order_by.is_empty() || limit.is_some() {
        if !out.order_by.is_empty() || out.limit.is_some() {
            // `(SELECT ... LIMIT 1) ORDER BY ...`: keep the outer clauses.
            unsupported = unsupported.or(Some("parenthesized_query"));
        }
        out.order_by = order_by;
        out.limit = limit;
        out.offset |= offset;
    }
    out.unsupported = unsupported.or(out.unsupported);
    out
}

fn bare(body: Body) -> Query {
    Query {
        body,
        order_by: Vec::new(),
        limit: None,
        offset: false,
        unsupported: None,
    }
}

fn set_expr_query(e: &SetExpr) -> Query {
    match e {
        SetExpr::Select(s) => bare(Body::Select(Box::new(lower_select(s)))),
        SetExpr::Query(q) => lower_query(q),
        SetExpr::SetOperation {
            left,
            op,
            set_quantifier,
            right,
        } => {
            let op = match op {
                SetOperator::Union => SetOp::Union,
                SetOperator::Intersect => SetOp::Intersect,
                SetOperator::Except | SetOperator::Minus => SetOp::Except,
            };
            let all = matches!(
                set_quantifier,
                SetQuantifier::All | SetQuantifier::AllByName
            );
            bare(Body::SetOp {
                op,
                all,
                left: Box::new(set_expr_query(left)),
                right: Box::new(set_expr_query(right)),
            })
        }
        _ => {
            let mut q = bare(Body::Select(Box::new(SelectCore {
                distinct: false,
                items: Vec::new(),
                from: Vec::new(),
                selection: None,
                group_by: Vec::new(),
                having: None,
            })));
            q.unsupported = Some("non_select_body");
            q
        }
    }
}

fn lower_select(s: &sp::Select) -> SelectCore {
    let mut items = Vec::new();
    for it in &s.projection {
        items.push(match it {
            SelectItem::UnnamedExpr(e) | SelectItem::ExprWithAlias { expr: e, .. } => {
                lower_value(e)
            }
            SelectItem::Wildcard(_) => ValueExpr::Star,
            SelectItem::QualifiedWildcard(
                sp::SelectItemQualifiedWildcardKind::ObjectName(n),
                _,
            ) => ValueExpr::QualifiedStar(object_name(n).unwrap_or_default()),
            _ => ValueExpr::Unsupported("expression"),
        });
    }
    let mut from = Vec::new();
    for (i, twj) in s.from.iter().enumerate() {
        from.push(FromSource {
            item: lower_factor(&twj.relation),
            via: if i == 0 {
                JoinVia::First
            } else {
                JoinVia::Comma
            },
        });
        for j in &twj.joins {
            let via = match &j.join_operator {
                JoinOperator::Join(c) | JoinOperator::Inner(c) | JoinOperator::CrossJoin(c) => {
                    match c {
                        JoinConstraint::On(e) => JoinVia::Join(Some(lower_cond(e))),
                        JoinConstraint::None => JoinVia::Join(None),
                        JoinConstraint::Using(_) => JoinVia::Unsupported("join_using"),
                        JoinConstraint::Natural => JoinVia::Unsupported("natural_join"),
                    }
                }
                _ => JoinVia::Unsupported("outer_join"),
            };
            from.push(FromSource {
                item: lower_factor(&j.relation),
                via,
            });
        }
    }
    let group_by = match &s.group_by {
        GroupByExpr::Expressions(es, _) => es.iter().map(lower_value).collect(),
        GroupByExpr::All(_) => vec![ValueExpr::Unsupported("group_by_all")],
    };
    SelectCore {
        distinct: s.distinct.is_some() && !matches!(s.distinct, Some(sp::Distinct::All)),
        items,
        from,
        selection: s.selection.as_ref().map(lower_cond),
        group_by,
        having: s.having.as_ref().map(lower_cond),
    }
}

fn lower_factor(f: &TableFactor) -> FromItem {
    match f {
        TableFactor::Table {
            name, alias, args, ..
        } if args.is_none() => match object_name(name) {
            Some(name) => FromItem::Table {
                name,
                alias: alias.as_ref().map(|a| a.name.value.clone()),
            },
            None => FromItem::Unsupported("table_name"),
        },
        TableFactor::Derived {
            subquery, alias, ..
        } => FromItem::Subquery {
            query: Box::new(lower_query(subquery)),
            alias: alias.as_ref().map(|a| a.name.value.clone()),
        },
        TableFactor::NestedJoin { .. } => FromItem::Unsupported("nested_join"),
        _ => FromItem::Unsupported("table_factor"),
    }
}

fn number_literal(e: &Expr) -> Option<String> {
    match e {
        Expr::Value(v) => match &v.value {
            sp::Value::Number(s, _) => Some(s.clone()),
            _ => None,
        },
        Expr::Nested(inner) => number_literal(inner),
        _ => None,
    }
}

fn lower_value(e: &Expr) -> ValueExpr {
    match e {
        Expr::Identifier(id) => {
            if id.quote_style == Some('"') {
                ValueExpr::QuotedName(id.value.clone())
            } else {
                ValueExpr::Column(ColumnRef {
                    qualifier: None,
                    name: id.value.clone(),
                })
            }
        }
        Expr::CompoundIdentifier(parts) => match parts.as_slice() {
            [q, n] => ValueExpr::Column(ColumnRef {
                qualifier: Some(q.value.clone()),
                name: n.value.clone(),
            }),
            _ => ValueExpr::Unsupported("qualified_name"),
        },
        Expr::Value(v) => match &v.value {
            sp::Value::Number(s, _) => ValueExpr::Literal(Literal::number(s.clone())),
            sp::Value::SingleQuotedString(s) | sp::Value::DoubleQuotedString(s) => {
                ValueExpr::Literal(Literal::text(s.clone()))
            }
            sp::Value::Null => ValueExpr::Unsupported("null_literal"),
            _ => ValueExpr::Unsupported("literal"),
        },
        Expr::UnaryOp { op, expr } => match (op, number_literal(expr)) {
            (UnaryOperator::Minus, Some(n)) => ValueExpr::Literal(Literal::number(format!("-{n}"))),
            (UnaryOperator::Plus, Some(n)) => ValueExpr::Literal(Literal::number(n)),
            _ => ValueExpr::Unsupported("unary_expression"),
        },
        Expr::Nested(inner) => lower_value(inner),
        Expr::Function(f) => lower_function(f),
        Expr::BinaryOp { left, op, right } => match op {
            BinaryOperator::Plus
            | BinaryOperator::Minus
            | BinaryOperator::Multiply
            | BinaryOperator::Divide
            | BinaryOperator::Modulo
            | BinaryOperator::StringConcat => ValueExpr::Arithmetic {
                left: Box::new(lower_value(left)),
                right: Box::new(lower_value(right)),
            },
            _ => ValueExpr::Unsupported("boolean_value"),
        },
        Expr::Subquery(q) => ValueExpr::Subquery(Box::new(lower_query(q))),
        Expr::Cast { .. } => ValueExpr::Unsupported("cast"),
        Expr::Case { .. } => ValueExpr::Unsupported("case"),
        _ => ValueExpr::Unsupported("expression"),
    }
}

fn lower_function(f: &sp::Function) -> ValueExpr {
    if f.over.is_some() {
        return ValueExpr::Unsupported("window_function");
    }
    let Some(func) = object_name(&f.name).as_deref().and_then(AggFn::parse) else {
        return ValueExpr::Unsupported("function");
    };
    let FunctionArguments::List(list) = &f.args else {
        return ValueExpr::Unsupported("function");
    };
    let distinct = matches!(list.duplicate_treatment, Some(DuplicateTreatment::Distinct));
    let arg = match list.args.as_slice() {
        [FunctionArg::Unnamed(FunctionArgExpr::Wildcard)] => ValueExpr::Star,
        [FunctionArg::Unnamed(FunctionArgExpr::Expr(e))] => lower_value(e),
        _ => return ValueExpr::Unsupported("function"),
    };
    if f.filter.is_some() || !f.within_group.is_empty() || !list.clauses.is_empty() {
        return ValueExpr::Unsupported("function");
    }
    ValueExpr::Aggregate {
        func,
        distinct,
        arg: Box::new(arg),
    }
}

fn lower_cond(e: &Expr) -> Condition {
    match e {
        Expr::BinaryOp { left, op, right } => {
            let cmp = match op {
                BinaryOperator::And => {
                    return Condition::And(Box::new(lower_cond(left)), Box::new(lower_cond(right)))
                }
                BinaryOperator::Or => {
                    return Condition::Or(Box::new(lower_cond(left)), Box::new(lower_cond(right)))
                }
                BinaryOperator::Eq => CmpOp::Eq,
                BinaryOperator::NotEq => CmpOp::Ne,
                BinaryOperator::Lt => CmpOp::Lt,
                BinaryOperator::Gt => CmpOp::Gt,
                BinaryOperator::LtEq => CmpOp::Le,
                BinaryOperator::GtEq => CmpOp::Ge,
                _ => return Condition::Unsupported("operator"),
            };
            Condition::Compare {
                op: cmp,
                left: lower_value(left),
                right: lower_value(right),
            }
        }
        Expr::UnaryOp {
            op: UnaryOperator::Not,
            expr,
        } => Condition::Not(Box::new(lower_cond(expr))),
        Expr::Nested(inner) => lower_cond(inner),
        Expr::Between {
            expr,
            negated,
            low,
            high,
        } => Condition::Between {
            negated: *negated,
            expr: lower_value(expr),
            low: lower_value(low),
            high: lower_value(high),
        },
        Expr::Like {
            negated,
            any,
            expr,
            pattern,
            escape_char,
        } => {
            if *any || escape_char.is_some() {
                return Condition::Unsupported("like_modifier");
            }
            Condition::Like {
                negated: *negated,
                expr: lower_value(expr),
                pattern: lower_value(pattern),
            }
        }
        Expr::InSubquery {
            expr,
            subquery,
            negated,
        } => Condition::InSubquery {
            negated: *negated,
            expr: lower_value(expr),
            subquery: Box::new(lower_query(subquery)),
        },
        Expr::InList {
            expr,
            list,
            negated,
        } => Condition::InList {
            negated: *negated,
            expr: lower_value(expr),
            list: list.iter().map(lower_value).collect(),
        },
        Expr::IsNull(e) => Condition::IsNull {
            negated: false,
            expr: lower_value(e),
        },
        Expr::IsNotNull(e) => Condition::IsNull {
            negated: true,
            expr: lower_value(e),
        },
        Expr::Exists { subquery, negated } => Condition::Exists {
            negated: *negated,
            subquery: Box::new(lower_query(subquery)),
        },
        _ => Condition::Unsupported("condition"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn core(q: &Query) -> &SelectCore {
        match &q.body {
            Body::Select(s) => s,
            _ => panic!("expected select"),
        }
    }

    #[test]
    fn lowers_joins_aliases_and_filters() {
        let q = parse_query(
            "SELECT count(*) FROM Student AS T1 JOIN Has_Pet AS T2 ON T1.StuID = T2.StuID \
             WHERE T1.home_country = 'France' AND T1.age > 20",
        )
        .unwrap();
        let s = core(&q);
        assert_eq!(s.from.len(), 2);
        assert!(matches!(
            &s.from[1].via,
            JoinVia::Join(Some(Condition::Compare { .. }))
        ));
        assert!(matches!(
            &s.items[0],
            ValueExpr::Aggregate { func: AggFn::Count, distinct: false, arg } if **arg == ValueExpr::Star
        ));
        let (leaves, ors) = s.selection.as_ref().unwrap().flatten();
        assert_eq!(leaves.len(), 2);
        assert_eq!(ors, vec![false]);
    }

    #[test]
    fn double_quoted_strings_stay_ambiguous() {
        let q = parse_query("SELECT Name FROM Student WHERE home_country = \"France\"").unwrap();
        let Condition::Compare { right, .. } = core(&q).selection.as_ref().unwrap() else {
            panic!()
        };
        assert_eq!(right, &ValueExpr::QuotedName("France".into()));
    }

    #[test]
    fn order_limit_and_set_operations() {
        let q = parse_query("SELECT name FROM singer ORDER BY age DESC LIMIT 3").unwrap();
        assert!(q.order_by[0].desc);
        assert_eq!(q.limit, Some(ValueExpr::Literal(Literal::number("3"))));
        let q = parse_query("SELECT a FROM t INTERSECT SELECT a FROM u").unwrap();
        assert!(matches!(
            q.body,
            Body::SetOp {
                op: SetOp::Intersect,
                ..
            }
        ));
    }

    #[test]
    fn unsupported_constructs_are_marked() {
        let q = parse_query("SELECT rank() OVER (ORDER BY a) FROM t").unwrap();
        assert_eq!(core(&q).items[0], ValueExpr::Unsupported("window_function"));
        let q = parse_query("SELECT a FROM t WHERE b = -5").unwrap();
        let Condition::Compare { right, .. } = core(&q).selection.as_ref().unwrap() else {
            panic!()
        };
        assert_eq!(right, &ValueExpr::Literal(Literal::number("-5")));
        assert!(parse_query("SELEC a").is_err());
        assert!(parse_query("SELECT 1; SELECT 2").is_err());
    }
}
