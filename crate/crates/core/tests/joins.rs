mod common;

use std::collections::BTreeSet;

use common::{bfs_distance, brute_force_steiner, random_graph, rng, subsets};
use semql_core::compile::{compile, infer_joins, joins_have_on, JoinError, JoinPlan};
use semql_core::fixtures;
use semql_core::graph::{build_schema_graph, SchemaGraph};
use semql_core::index::{build_value_index, IndexConfig};
use semql_core::semql::sql_to_semql;
use semql_core::synth::{build_context, synthesize, BaselinePolicy, ContextMode, SearchConfig};
use semql_core::values::{ValueCandidate, ValueConfig};

/// The plan is a tree over its tables that contains every terminal, and
/// each step extends it by one new table along a real edge.
fn assert_well_formed(g: &SchemaGraph, terminals: &BTreeSet<usize>, plan: &JoinPlan) {
    let mut have: BTreeSet<usize> = plan.tables.first().copied().into_iter().collect();
    for s in &plan.steps {
        assert!(have.contains(&s.left_table), "{plan:?}");
        assert!(have.insert(s.right_table), "{plan:?}");
        let e = g
            .edge_between(s.left_table, s.right_table)
            .expect("edge exists");
        assert_eq!(e.column_pair(), s.column_pair());
    }
    assert_eq!(have, plan.tables.iter().copied().collect());
    assert!(terminals.is_subset(&have));
}

fn check_graph(g: &SchemaGraph) -> usize {
    let mut checked = 0;
    for terminals in subsets(g.vertices, 2) {
        let Some(best) = brute_force_steiner(g, &terminals) else {
            assert!(matches!(
                infer_joins(&terminals, g),
                Err(JoinError::Unreachable { .. })
            ));
            continue;
        };
        let plan = infer_joins(&terminals, g).unwrap();
        assert_well_formed(g, &terminals, &plan);
        if terminals.len() == 2 {
            let v: Vec<usize> = terminals.iter().copied().collect();
            assert_eq!(
                Some(plan.steps.len()),
                bfs_distance(g, v[0], v[1]),
                "{terminals:?}"
            );
        } else {
            assert!(
                plan.steps.len() <= 2 * best,
                "{terminals:?}: {} vs optimal {best}",
                plan.steps.len()
            );
        }
        checked += 1;
    }
    checked
}

#[test]
fn fixture_graphs_match_bfs_and_steiner_oracles() {
    let mut checked = 0;
    for schema in fixtures::all_schemas() {
        let g = build_schema_graph(&schema);
        if g.vertices <= 8 {
            checked += check_graph(&g);
        }
    }
    assert!(checked > 10);
}

#[test]
fn random_graphs_match_bfs_and_steiner_oracles() {
    let mut r = rng(3);
    for i in 0..120 {
        let g = random_graph(&mut r, 3 + i % 6, 0.25 + 0.05 * (i % 5) as f64);
        check_graph(&g);
    }
}

#[test]
fn single_table_needs_no_join() {
    let g = build_schema_graph(&fixtures::pets_schema());
    let plan = infer_joins(&BTreeSet::from([1]), &g).unwrap();
    assert!(plan.steps.is_empty());
    assert_eq!(plan.tables, [1]);
}

#[test]
fn every_compiled_query_joins_with_on() {
    assert!(!joins_have_on("SELECT * FROM a JOIN b"));
    assert!(!joins_have_on("SELECT * FROM a JOIN b ON a.x = b.y JOIN c"));
    assert!(joins_have_on("SELECT * FROM a JOIN b ON a.x = b.y"));
    let mut compiled = 0;
    for db in fixtures::all_databases() {
        let conn = db.open_in_memory();
        let index = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        let graph = build_schema_graph(&db.schema);
        for (db_id, question, gold) in fixtures::corpus_samples() {
            if db_id != db.schema.db_id {
                continue;
            }
            if let Ok(conv) = sql_to_semql(gold, &db.schema) {
                let cands: Vec<ValueCandidate> = conv
                    .values
                    .iter()
                    .map(ValueCandidate::from_literal)
                    .collect();
                let sql = compile(&conv.tree, &db.schema, &graph, &cands, question)
                    .unwrap()
                    .sql;
                assert!(joins_have_on(&sql), "{sql}");
                compiled += 1;
            }
            let ctx = build_context(
                question,
                &db.schema,
                &index,
                &conn,
                &ContextMode::Full,
                None,
                &ValueConfig::default(),
            );
            if let Ok(out) = synthesize(&ctx, &mut BaselinePolicy::new(), &SearchConfig::default())
            {
                if let Ok(c) = compile(
                    &out.tree,
                    &db.schema,
                    &graph,
                    &ctx.candidates.candidates,
                    question,
                ) {
                    assert!(joins_have_on(&c.sql), "{}", c.sql);
                    compiled += 1;
                }
            }
        }
    }
    assert!(compiled > 50);
}
