mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use semql_core::fixtures;
use semql_core::index::{build_value_index, IndexConfig};
use semql_core::semql::{check_legality, Action, GrammarState, SemQlTree};
use semql_core::sqlite::{quote_ident, Cell};
use semql_core::synth::{
    build_context, synthesize, ContextMode, EncodingContext, Policy, PolicyDecision, PolicyError,
    SearchConfig, SynthesisError,
};
use semql_core::values::{all_ngrams, ExtractedValue, ExtractionSource, ValueConfig};

proptest! {
    #[test]
    fn ngram_count_is_triangular(words in prop::collection::vec("[A-Za-z0-9]{1,6}", 1..=8)) {
        let text = words.join(" ");
        let v = ExtractedValue { span: (3, 3 + text.chars().count()), text: text.clone(), source: ExtractionSource::Capitalized };
        let grams = all_ngrams(&v);
        let k = words.len();
        prop_assert_eq!(grams.len(), k * (k + 1) / 2);
        prop_assert_eq!(&grams[0].0, &text);
        for (g, (s, e)) in &grams {
            // Each gram is the question text under its span.
            let under: String = text.chars().skip(s - 3).take(e - s).collect();
            prop_assert_eq!(g, &under);
        }
    }
}

#[test]
fn three_words_give_one_trigram_two_bigrams_three_words() {
    let v = ExtractedValue {
        text: "Kennedy International Airport".into(),
        span: (0, 29),
        source: ExtractionSource::Capitalized,
    };
    let grams: Vec<String> = all_ngrams(&v).into_iter().map(|(g, _)| g).collect();
    assert_eq!(
        grams,
        [
            "Kennedy International Airport",
            "Kennedy International",
            "International Airport",
            "Kennedy",
            "International",
            "Airport"
        ]
    );
}

/// Every validated candidate is confirmed by a direct query on its column.
#[test]
fn validated_candidates_exist_where_they_claim() {
    let mut checked = 0;
    for db in fixtures::all_databases() {
        let conn = db.open_in_memory();
        let index = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        for (db_id, question, _) in fixtures::corpus_samples() {
            if db_id != db.schema.db_id {
                continue;
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
            for c in ctx.candidates.iter().filter(|c| c.validated) {
                let (t, col) = c.location.expect("validated candidates are located");
                let table = quote_ident(&db.schema.tables[t].name);
                let column = quote_ident(&db.schema.columns[col].name);
                let n: i64 = if c.is_wildcard() {
                    let sql = format!(
                        "SELECT count(*) FROM {table} WHERE CAST({column} AS TEXT) LIKE ?1"
                    );
                    conn.query_row(&sql, [&c.surface], |r| r.get(0)).unwrap()
                } else {
                    match c
                        .stored
                        .as_ref()
                        .expect("validated exact candidates keep the stored value")
                    {
                        Cell::Int(v) => {
                            let sql = format!("SELECT count(*) FROM {table} WHERE {column} = ?1");
                            conn.query_row(&sql, [v], |r| r.get(0)).unwrap()
                        }
                        Cell::Real(v) => {
                            let sql = format!("SELECT count(*) FROM {table} WHERE {column} = ?1");
                            conn.query_row(&sql, [v], |r| r.get(0)).unwrap()
                        }
                        Cell::Text(v) => {
                            let sql = format!("SELECT count(*) FROM {table} WHERE {column} = ?1");
                            conn.query_row(&sql, [v], |r| r.get(0)).unwrap()
                        }
                        other => panic!("unexpected stored value {other:?}"),
                    }
                };
                assert!(
                    n > 0,
                    "{question}: {:?} not found in {table}.{column}",
                    c.surface
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 20, "{checked}");
}

struct RandomPolicy(StdRng);

impl Policy for RandomPolicy {
    fn decide(
        &mut self,
        _: &GrammarState,
        legal: &[Action],
        _: &EncodingContext,
    ) -> Result<PolicyDecision, PolicyError> {
        Ok(PolicyDecision {
            scores: legal
                .iter()
                .map(|_| self.0.random_range(0.0..1.0))
                .collect(),
        })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    /// Whatever the policy scores, the search only emits legal trees.
    #[test]
    fn arbitrary_scores_yield_legal_trees(seed in any::<u64>(), beam in 1usize..4) {
        let db = fixtures::pets();
        let conn = db.open_in_memory();
        let index = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        let q = "How many pets are owned by French students that are older than 20?";
        let ctx = build_context(q, &db.schema, &index, &conn, &ContextMode::Full, None, &ValueConfig::default());
        let cfg = SearchConfig { beam, max_depth: 64 };
        match synthesize(&ctx, &mut RandomPolicy(StdRng::seed_from_u64(seed)), &cfg) {
            Ok(out) => {
                let state = check_legality(&out.actions, &ctx.schema, ctx.candidates.len()).unwrap();
                prop_assert!(state.is_complete());
                prop_assert_eq!(SemQlTree::from_actions(&out.actions).unwrap(), out.tree.clone());
                prop_assert!(out.tree.value_payloads().iter().all(|&v| v < ctx.candidates.len()));
                prop_assert!(out.actions.len() <= 64);
            }
            Err(SynthesisError::DepthExceeded(64)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
