//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria bound to the Spider dataset read it from `$SPIDER_DIR`
//! (tables.json, train_spider.json, dev.json, database/). Without it they
//! print FAIL with a BLOCKED reason; the process only exits nonzero for them
//! when `SEMQL_ACCEPTANCE_STRICT` is set. Fixture parts always run.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{
    bfs_distance, brute_force_steiner, large_index, mutate, osa_full_matrix, random_graph,
    random_string, rng, subsets, ALPHABET,
};
use rand::RngExt;
use rayon::prelude::*;
use semql_core::compile::{compile, infer_joins, joins_have_on};
use semql_core::dataset::DatabaseSet;
use semql_core::distance::{damerau_levenshtein, ThresholdPolicy};
use semql_core::eval::{evaluate_set, EvalConfig, EvalReport, ExecLimits, PolicySpec};
use semql_core::fixtures;
use semql_core::graph::build_schema_graph;
use semql_core::index::{build_value_index, IndexConfig};
use semql_core::roundtrip::{roundtrip, RoundTripSummary};
use semql_core::schema::{
    flag_unknown_databases, load_samples, load_schema_catalog, Catalog, SampleRecord,
};
use semql_core::semql::sql_to_semql;
use semql_core::stats::{candidate_recall, value_distribution, RecallReport};
use semql_core::synth::{build_context, synthesize, BaselinePolicy, ContextMode, SearchConfig};
use semql_core::values::{
    all_ngrams, ExtractedValue, ExtractionSource, ValueCandidate, ValueConfig,
};

/// Heuristics-only recall on the fixture corpus when this suite was
/// written; it must not go down.
const FIXTURE_RECALL_FLOOR: f64 = 1.0;

enum Verdict {
    Pass(String),
    Fail(String),
    Blocked(String),
}

use Verdict::*;

fn combine(parts: Vec<Verdict>) -> Verdict {
    let mut notes = Vec::new();
    let mut failed = false;
    let mut blocked = false;
    for p in parts {
        match p {
            Pass(s) => notes.push(s),
            Fail(s) => {
                failed = true;
                notes.push(format!("FAILED {s}"));
            }
            Blocked(s) => {
                blocked = true;
                notes.push(s);
            }
        }
    }
    let text = notes.join("; ");
    if failed {
        Fail(text)
    } else if blocked {
        Blocked(text)
    } else {
        Pass(text)
    }
}

fn check(ok: bool, text: String) -> Verdict {
    if ok {
        Pass(text)
    } else {
        Fail(text)
    }
}

struct Spider {
    catalog: Catalog,
    train: Vec<SampleRecord>,
    dev: Vec<SampleRecord>,
    db_dir: PathBuf,
}

const BLOCKED: &str = "BLOCKED: Spider dataset not found";

fn spider() -> Result<Spider, String> {
    let root = std::env::var_os("SPIDER_DIR")
        .map(PathBuf::from)
        .ok_or_else(|| format!("{BLOCKED} (SPIDER_DIR unset)"))?;
    let need = |name: &str| {
        let p = root.join(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(format!("{BLOCKED} ({} missing)", p.display()))
        }
    };
    let catalog = load_schema_catalog(&need("tables.json")?).map_err(|e| e.to_string())?;
    let mut train = load_samples(&need("train_spider.json")?).map_err(|e| e.to_string())?;
    let mut dev = load_samples(&need("dev.json")?).map_err(|e| e.to_string())?;
    flag_unknown_databases(&mut train, &catalog);
    flag_unknown_databases(&mut dev, &catalog);
    Ok(Spider {
        catalog,
        train,
        dev,
        db_dir: need("database")?,
    })
}

struct FixtureSet {
    _dir: tempfile::TempDir,
    samples: Vec<SampleRecord>,
    dbs: DatabaseSet,
}

fn fixture_set() -> FixtureSet {
    let dir = tempfile::tempdir().unwrap();
    let c = fixtures::write_corpus(dir.path()).unwrap();
    let catalog = load_schema_catalog(&c.catalog).unwrap();
    let mut samples = load_samples(&c.samples).unwrap();
    flag_unknown_databases(&mut samples, &catalog);
    let dbs = DatabaseSet::load(&catalog, &c.db_dir, None, None, &IndexConfig::default());
    FixtureSet {
        _dir: dir,
        samples,
        dbs,
    }
}

fn dev_databases(s: &Spider) -> DatabaseSet {
    let wanted: BTreeSet<String> = s.dev.iter().map(|x| x.db_id.clone()).collect();
    DatabaseSet::load(
        &s.catalog,
        &s.db_dir,
        Some(&wanted),
        None,
        &IndexConfig::default(),
    )
}

fn within(got: usize, want: usize, tol: f64) -> bool {
    (got as f64 - want as f64).abs() <= tol * want as f64
}

fn criterion_1(s: &Result<Spider, String>) -> Verdict {
    let s = match s {
        Ok(s) => s,
        Err(e) => return Blocked(e.clone()),
    };
    let start = Instant::now();
    let d = value_distribution(&s.train, &s.catalog);
    let elapsed = start.elapsed();
    let want = [3469, 2494, 945, 62, 30];
    let h = &d.with_limit;
    let buckets_ok = h.buckets.iter().zip(want).all(|(&g, w)| within(g, w, 0.02));
    let ok = buckets_ok
        && within(h.queries_with_values, 3531, 0.02)
        && within(h.total_values, 4690, 0.02)
        && elapsed < Duration::from_secs(60);
    check(
        ok,
        format!(
            "{} samples ({} unparsed); with LIMIT {:?}, {} with values, {} values; without LIMIT {:?}, {} with values, {} values; {:.1}s",
            d.samples,
            d.unparsed,
            h.buckets,
            h.queries_with_values,
            h.total_values,
            d.without_limit.buckets,
            d.without_limit.queries_with_values,
            d.without_limit.total_values,
            elapsed.as_secs_f64()
        ),
    )
}

fn summarize_roundtrips(samples: &[SampleRecord], dbs: &DatabaseSet) -> RoundTripSummary {
    let results: Vec<_> = samples
        .par_iter()
        .filter_map(|s| {
            let db = dbs.get(&s.db_id)?;
            let conn = db.connect().ok()?;
            Some(roundtrip(
                &s.gold_sql,
                &db.schema,
                &db.graph,
                &conn,
                ExecLimits::default(),
            ))
        })
        .collect();
    let mut summary = RoundTripSummary::default();
    for r in &results {
        summary.add(r);
    }
    summary
}

fn describe(s: &RoundTripSummary) -> String {
    format!(
        "{}/{} accepted ({:.1}%), {} equivalent, {} compile failures, {} literal mismatches, rejections {:?}",
        s.accepted,
        s.total,
        100.0 * s.acceptance_rate(),
        s.equivalent,
        s.compile_failures,
        s.literal_mismatches,
        s.reasons
    )
}

fn criterion_2(fx: &FixtureSet, s: &Result<Spider, String>, dev: Option<&DatabaseSet>) -> Verdict {
    let f = summarize_roundtrips(&fx.samples, &fx.dbs);
    let fixture = check(
        f.is_sound() && f.accepted > 0,
        format!("fixtures: {}", describe(&f)),
    );
    let spider = match (s, dev) {
        (Ok(s), Some(dbs)) => {
            let start = Instant::now();
            let r = summarize_roundtrips(&s.dev, dbs);
            let t = start.elapsed();
            check(
                r.is_sound() && t < Duration::from_secs(600),
                format!("dev: {} in {:.0}s", describe(&r), t.as_secs_f64()),
            )
        }
        _ => blocked(s),
    };
    combine(vec![fixture, spider])
}

fn blocked(s: &Result<Spider, String>) -> Verdict {
    Blocked(
        s.as_ref()
            .err()
            .cloned()
            .unwrap_or_else(|| BLOCKED.to_string()),
    )
}

fn scripted_and_baseline(samples: &[SampleRecord], dbs: &DatabaseSet, label: &str) -> Vec<Verdict> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let scripted = evaluate_set(
        samples,
        dbs,
        &EvalConfig {
            light: true,
            policy: PolicySpec::ScriptedGold,
            workers,
            ..Default::default()
        },
    );
    let accepted: Vec<_> = scripted
        .samples
        .iter()
        .filter(|v| {
            !v.failure
                .as_deref()
                .is_some_and(|f| f.starts_with("unsupported"))
        })
        .filter(|v| {
            !v.failure
                .as_deref()
                .is_some_and(|f| f.starts_with("gold failed"))
        })
        .collect();
    let exact = accepted.iter().filter(|v| v.equivalent).count();
    let a = check(
        !accepted.is_empty() && exact == accepted.len(),
        format!(
            "{label} scripted replay {exact}/{} converter-accepted",
            accepted.len()
        ),
    );
    let baseline = evaluate_set(
        samples,
        dbs,
        &EvalConfig {
            workers,
            ..Default::default()
        },
    );
    vec![
        a,
        Pass(format!("{label} baseline {}", accuracy_line(&baseline))),
    ]
}

fn accuracy_line(r: &EvalReport) -> String {
    let buckets: Vec<String> = r
        .by_difficulty
        .iter()
        .map(|(d, b)| format!("{} {}/{}", d.as_str(), b.correct, b.total))
        .collect();
    format!(
        "{}/{} ({:.1}%) [{}]",
        r.correct,
        r.total,
        100.0 * r.overall_accuracy,
        buckets.join(", ")
    )
}

fn criterion_3(fx: &FixtureSet, s: &Result<Spider, String>, dev: Option<&DatabaseSet>) -> Verdict {
    let mut parts = scripted_and_baseline(&fx.samples, &fx.dbs, "fixtures:");
    match (s, dev) {
        (Ok(s), Some(dbs)) => parts.extend(scripted_and_baseline(&s.dev, dbs, "dev:")),
        _ => parts.push(blocked(s)),
    }
    combine(parts)
}

fn criterion_4() -> Verdict {
    let mut r = rng(4004);
    let (mut mismatches, mut metric) = (0, 0);
    for i in 0..10_000 {
        let a = random_string(&mut r, 20, &ALPHABET);
        let b = if i % 2 == 0 {
            random_string(&mut r, 20, &ALPHABET)
        } else {
            let mut m = mutate(&mut r, &a, &ALPHABET, 1 + i % 4);
            m.truncate(20);
            m
        };
        let d = damerau_levenshtein(&a, &b);
        mismatches += usize::from(d != osa_full_matrix(&a, &b));
        // Distances are unsigned, so non-negativity holds by type.
        metric += usize::from((d == 0) != (a == b) || d != damerau_levenshtein(&b, &a));
    }
    check(
        mismatches == 0 && metric == 0,
        format!("10000 pairs: {mismatches} oracle mismatches, {metric} metric violations"),
    )
}

fn criterion_5() -> Verdict {
    let (index, values) = large_index(5005, 50_000);
    let letters: Vec<char> = ('a'..='z').chain('0'..='9').collect();
    let mut r = rng(5006);
    let policies = [ThresholdPolicy::LengthScaled, ThresholdPolicy::Fixed(2)];
    let (mut missed, mut extra, mut hits) = (0, 0, 0);
    for i in 0..1_000 {
        let base = &values[r.random_range(0..values.len())];
        let probe = match i % 3 {
            0 => base.clone(),
            1 => mutate(&mut r, base, &letters, 1 + i % 3),
            _ => mutate(&mut r, "", &letters, 2 + i % 10),
        };
        let key = |h: &semql_core::index::SimilarityHit| {
            (h.normalized.clone(), h.location.table, h.location.column)
        };
        let fast: BTreeSet<_> = index
            .similarity_search(&probe, &policies[i % 2])
            .iter()
            .map(key)
            .collect();
        let scan: BTreeSet<_> = index
            .similarity_scan(&probe, &policies[i % 2])
            .iter()
            .map(key)
            .collect();
        missed += scan.difference(&fast).count();
        extra += fast.difference(&scan).count();
        hits += scan.len();
    }
    check(
        missed == 0 && extra == 0 && index.len() >= 50_000,
        format!(
            "{} values, 1000 probes, {hits} hits, {missed} missed, {extra} spurious",
            index.len()
        ),
    )
}

fn criterion_6() -> Verdict {
    let mut r = rng(6006);
    let mut bad = Vec::new();
    for k in 1..=8usize {
        for _ in 0..50 {
            let words: Vec<String> = (0..k)
                .map(|_| format!("W{}", random_string(&mut r, 5, &ALPHABET).replace(' ', "")))
                .collect();
            let text = words.join(" ");
            let v = ExtractedValue {
                span: (0, text.chars().count()),
                text: text.clone(),
                source: ExtractionSource::Capitalized,
            };
            let grams = all_ngrams(&v);
            if grams.len() != k * (k + 1) / 2 || grams[0].0 != text {
                bad.push((k, grams.len()));
            }
        }
    }
    check(
        bad.is_empty(),
        format!(
            "k in 1..=8, 400 extractions, {} wrong counts {:?}",
            bad.len(),
            bad.first()
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut graphs: Vec<_> = fixtures::all_schemas()
        .iter()
        .map(build_schema_graph)
        .filter(|g| g.vertices <= 8)
        .collect();
    let mut r = rng(7007);
    for i in 0..60 {
        graphs.push(random_graph(&mut r, 3 + i % 6, 0.3));
    }
    let (mut pairs, mut pair_bad, mut multi, mut multi_bad) = (0, 0, 0, 0);
    for g in &graphs {
        for terminals in subsets(g.vertices, 2) {
            let Some(best) = brute_force_steiner(g, &terminals) else {
                continue;
            };
            let Ok(plan) = infer_joins(&terminals, g) else {
                pair_bad += 1;
                continue;
            };
            if terminals.len() == 2 {
                let v: Vec<usize> = terminals.iter().copied().collect();
                pairs += 1;
                pair_bad += usize::from(Some(plan.steps.len()) != bfs_distance(g, v[0], v[1]));
            } else {
                multi += 1;
                multi_bad += usize::from(plan.steps.len() > 2 * best);
            }
        }
    }
    let (mut compiled, mut bare) = (0, 0);
    for db in fixtures::all_databases() {
        let conn = db.open_in_memory();
        let index = build_value_index(&conn, &db.schema, &IndexConfig::default()).unwrap();
        let graph = build_schema_graph(&db.schema);
        for (db_id, question, gold) in fixtures::corpus_samples() {
            if db_id != db.schema.db_id {
                continue;
            }
            let mut sqls = Vec::new();
            if let Ok(conv) = sql_to_semql(gold, &db.schema) {
                let cands: Vec<ValueCandidate> = conv
                    .values
                    .iter()
                    .map(ValueCandidate::from_literal)
                    .collect();
                sqls.extend(
                    compile(&conv.tree, &db.schema, &graph, &cands, question)
                        .ok()
                        .map(|c| c.sql),
                );
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
                sqls.extend(
                    compile(
                        &out.tree,
                        &db.schema,
                        &graph,
                        &ctx.candidates.candidates,
                        question,
                    )
                    .ok()
                    .map(|c| c.sql),
                );
            }
            for sql in sqls {
                compiled += 1;
                bare += usize::from(!joins_have_on(&sql));
            }
        }
    }
    check(
        pair_bad == 0 && multi_bad == 0 && bare == 0 && compiled > 0,
        format!(
            "{} graphs: {pairs} two-terminal plans ({pair_bad} off BFS), {multi} multi-terminal ({multi_bad} over 2x optimal); {compiled} compiled queries, {bare} bare JOINs",
            graphs.len()
        ),
    )
}

fn latency(samples: &[SampleRecord], dbs: &DatabaseSet, label: &str) -> Verdict {
    let r = evaluate_set(
        samples,
        dbs,
        &EvalConfig {
            workers: 1,
            ..Default::default()
        },
    );
    let mean = |k: &str| r.stage_timing_ms.mean.get(k).copied().unwrap_or(0.0);
    let total = mean("total");
    check(
        r.total > 0 && total < 500.0,
        format!(
            "{label} mean {total:.1} ms over {} questions (value lookup {:.1} ms, synthesis {:.1} ms, execution {:.1} ms)",
            r.total,
            mean("value_lookup"),
            mean("synthesis"),
            mean("execution")
        ),
    )
}

fn criterion_8(fx: &FixtureSet, s: &Result<Spider, String>, dev: Option<&DatabaseSet>) -> Verdict {
    let mut parts = vec![latency(&fx.samples, &fx.dbs, "fixtures:")];
    match (s, dev) {
        (Ok(s), Some(dbs)) => parts.push(latency(&s.dev, dbs, "dev:")),
        _ => parts.push(blocked(s)),
    }
    combine(parts)
}

fn recall_line(r: &RecallReport) -> String {
    format!(
        "{}/{} gold values found ({:.1}%) over {} samples, {} skipped",
        r.found,
        r.gold_values,
        100.0 * r.recall,
        r.samples,
        r.skipped
    )
}

fn criterion_9(fx: &FixtureSet, s: &Result<Spider, String>, dev: Option<&DatabaseSet>) -> Verdict {
    let f = candidate_recall(&fx.samples, &fx.dbs, &ValueConfig::default());
    let mut parts = vec![check(
        f.recall >= FIXTURE_RECALL_FLOOR,
        format!(
            "fixtures: {} (floor {:.1}%)",
            recall_line(&f),
            100.0 * FIXTURE_RECALL_FLOOR
        ),
    )];
    match (s, dev) {
        (Ok(s), Some(dbs)) => parts.push(Pass(format!(
            "dev: {}",
            recall_line(&candidate_recall(&s.dev, dbs, &ValueConfig::default()))
        ))),
        _ => parts.push(blocked(s)),
    }
    combine(parts)
}

fn main() {
    let strict = std::env::var_os("SEMQL_ACCEPTANCE_STRICT").is_some();
    let s = spider();
    let dev = s.as_ref().ok().map(dev_databases);
    let fx = fixture_set();
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("1 value distribution", Box::new(|| criterion_1(&s))),
        (
            "2 round-trip soundness",
            Box::new(|| criterion_2(&fx, &s, dev.as_ref())),
        ),
        (
            "3 scripted replay and baseline accuracy",
            Box::new(|| criterion_3(&fx, &s, dev.as_ref())),
        ),
        ("4 edit distance oracle", Box::new(criterion_4)),
        ("5 blocking soundness", Box::new(criterion_5)),
        ("6 n-gram counts", Box::new(criterion_6)),
        ("7 join correctness", Box::new(criterion_7)),
        (
            "8 latency budget",
            Box::new(|| criterion_8(&fx, &s, dev.as_ref())),
        ),
        (
            "9 extraction recall",
            Box::new(|| criterion_9(&fx, &s, dev.as_ref())),
        ),
    ];
    let (mut failed, mut blocked) = (0, 0);
    for (name, run) in criteria {
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        match v {
            Pass(d) => println!("PASS criterion {name} ({secs:.1}s): {d}"),
            Fail(d) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {d}");
            }
            Blocked(d) => {
                blocked += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {d}");
            }
        }
    }
    println!("acceptance: {failed} failed, {blocked} blocked on the Spider dataset");
    if failed > 0 || (strict && blocked > 0) {
        std::process::exit(1);
    }
}
