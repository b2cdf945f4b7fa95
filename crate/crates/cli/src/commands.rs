//! Subcommand implementations. Each returns whether per-sample failures
//! occurred; configuration and dataset errors are returned as `Err`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use log::info;
use rayon::prelude::*;
use semql_core::dataset::{index_cache_path, index_database, DatabaseSet};
use semql_core::eval::{evaluate_set_with, SampleVerdict};
use semql_core::index::IndexConfig;
use semql_core::pipeline::translate;
use semql_core::roundtrip::{roundtrip, RoundTrip, RoundTripSummary};
use semql_core::schema::{
    database_path, flag_unknown_databases, load_samples, load_schema_catalog, Catalog, SampleRecord,
};
use semql_core::sql::{gold_literals, parse_query};
use semql_core::stats::{candidate_recall, value_distribution, ValueHistogram};
use semql_core::synth::{BaselinePolicy, ContextMode, ExternalPolicy, Policy};
use semql_core::values::NerClient;
use serde::Serialize;

use crate::config::{Mode, PolicyKind, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    SampleFailures,
}

impl Status {
    fn from_failures(any: bool) -> Self {
        if any {
            Status::SampleFailures
        } else {
            Status::Ok
        }
    }
}

/// Reference literal-count histogram of the Spider train split.
const REFERENCE_VALUE_BUCKETS: [usize; 5] = [3469, 2494, 945, 62, 30];

fn catalog(cfg: &RunConfig) -> Result<Catalog> {
    let path = RunConfig::require(&cfg.catalog, "--catalog")?;
    load_schema_catalog(path).with_context(|| format!("loading catalog {}", path.display()))
}

fn db_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = RunConfig::require(&cfg.db_dir, "--db-dir")?;
    if !dir.is_dir() {
        bail!("database directory {} does not exist", dir.display());
    }
    Ok(dir)
}

fn samples(cfg: &RunConfig, catalog: &Catalog) -> Result<Vec<SampleRecord>> {
    let path = RunConfig::require(&cfg.samples, "--samples")?;
    let mut samples =
        load_samples(path).with_context(|| format!("loading samples {}", path.display()))?;
    let unknown = flag_unknown_databases(&mut samples, catalog);
    if unknown > 0 {
        log::warn!("{unknown} samples name databases missing from the catalog");
    }
    Ok(samples)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn index(cfg: &RunConfig, only: &[String]) -> Result<Status> {
    let catalog = catalog(cfg)?;
    let db_dir = db_dir(cfg)?;
    let cache = cfg
        .cache_dir
        .as_deref()
        .or(cfg.out.as_deref())
        .context("--cache-dir (or --out) is required")?;
    let unknown: Vec<&String> = only.iter().filter(|id| catalog.get(id).is_none()).collect();
    if !unknown.is_empty() {
        bail!("unknown db_id {unknown:?}");
    }
    let wanted: Vec<_> = catalog
        .schemas
        .iter()
        .filter(|s| only.is_empty() || only.contains(&s.db_id))
        .collect();
    let results: Vec<(String, Result<usize>)> = pool(cfg.workers)?.install(|| {
        wanted
            .par_iter()
            .map(|schema| {
                let r = (|| {
                    let ix = index_database(
                        schema,
                        &database_path(db_dir, &schema.db_id),
                        &IndexConfig::default(),
                    )?;
                    ix.save(&index_cache_path(cache, &schema.db_id))?;
                    Ok(ix.len())
                })();
                (schema.db_id.clone(), r)
            })
            .collect()
    });
    let mut failed = false;
    for (id, r) in results {
        match r {
            Ok(n) => println!("{id}: {n} values"),
            Err(e) => {
                failed = true;
                println!("{id}: failed: {e:#}");
            }
        }
    }
    Ok(Status::from_failures(failed))
}

pub fn translate_question(
    cfg: &RunConfig,
    question: &str,
    db_id: &str,
    gold_sql: Option<&str>,
    show_candidates: bool,
) -> Result<Status> {
    let catalog = catalog(cfg)?;
    let db_dir = db_dir(cfg)?;
    if catalog.get(db_id).is_none() {
        bail!("unknown db_id {db_id}");
    }
    let wanted = BTreeSet::from([db_id.to_string()]);
    let dbs = DatabaseSet::load(
        &catalog,
        db_dir,
        Some(&wanted),
        cfg.cache_dir.as_deref(),
        &IndexConfig::default(),
    );
    let Some(db) = dbs.get(db_id) else {
        bail!(
            "database {db_id} unavailable: {}",
            dbs.unavailable.get(db_id).map_or("", |s| s)
        );
    };
    let conn = db.connect()?;
    let mode = match cfg.mode {
        Mode::Full => ContextMode::Full,
        Mode::Light => {
            let gold =
                gold_sql.context("--mode light requires --gold-sql for the value options")?;
            let q =
                parse_query(gold).map_err(|e| anyhow::anyhow!("cannot parse --gold-sql: {e}"))?;
            ContextMode::Light(gold_literals(&q, Some(&db.schema)))
        }
    };
    let mut policy: Box<dyn Policy> = match cfg.policy {
        PolicyKind::Baseline => Box::new(BaselinePolicy::new()),
        PolicyKind::External => Box::new(ExternalPolicy::new(
            cfg.policy_cmd.clone().unwrap_or_default(),
        )),
        PolicyKind::GoldReplay => bail!("--policy gold-replay is only available for evaluate"),
    };
    let mut ner = cfg.ner_cmd.as_ref().map(NerClient::new);
    let tr = translate(
        question,
        db.resources(&conn),
        &mode,
        policy.as_mut(),
        ner.as_mut(),
        &cfg.translate_options(),
    );
    if show_candidates {
        for (i, c) in tr.candidates.candidates.iter().enumerate() {
            let at = c
                .location
                .map_or("-".to_string(), |(_, col)| db.schema.qualified_name(col));
            let origin = serde_json::to_value(c.origin)?;
            println!(
                "candidate {i}: {:?} {} at {at}{}",
                c.surface,
                origin.as_str().unwrap_or("?"),
                if c.validated { " (validated)" } else { "" }
            );
        }
    }
    if let Some(out) = &cfg.out {
        let mut w = create(out)?;
        write_json_line(&mut w, &tr)?;
        w.flush()?;
    }
    match (&tr.sql, &tr.failure) {
        (Some(sql), _) => {
            println!("{sql}");
            if let Some(e) = tr.outcome.as_ref().and_then(|o| o.error.as_ref()) {
                eprintln!("execution failed: {e}");
                return Ok(Status::SampleFailures);
            }
            Ok(Status::Ok)
        }
        (None, Some(f)) => {
            eprintln!("translation failed in {:?}: {}", f.stage, f.message);
            Ok(Status::SampleFailures)
        }
        (None, None) => Ok(Status::SampleFailures),
    }
}

fn load_for_samples(cfg: &RunConfig) -> Result<(Vec<SampleRecord>, DatabaseSet)> {
    let catalog = catalog(cfg)?;
    let samples = samples(cfg, &catalog)?;
    let db_dir = db_dir(cfg)?;
    let wanted: BTreeSet<String> = samples.iter().map(|s| s.db_id.clone()).collect();
    let dbs = if wanted.is_empty() {
        DatabaseSet::default()
    } else {
        DatabaseSet::load(
            &catalog,
            db_dir,
            Some(&wanted),
            cfg.cache_dir.as_deref(),
            &IndexConfig::default(),
        )
    };
    Ok((samples, dbs))
}

pub fn evaluate(
    cfg: &RunConfig,
    csv: Option<&Path>,
    trace: Option<&Path>,
    fail_fast: bool,
) -> Result<Status> {
    let (samples, dbs) = load_for_samples(cfg)?;
    info!("evaluating {} samples", samples.len());
    let trace_writer = trace.map(create).transpose()?.map(Mutex::new);
    let on_verdict = |v: &SampleVerdict| {
        if let Some(w) = &trace_writer {
            let mut w = w.lock().expect("trace lock");
            if let Err(e) = write_json_line(&mut *w, v) {
                log::error!("trace write failed: {e}");
            }
        }
        !(fail_fast && !v.equivalent)
    };
    let report = evaluate_set_with(&samples, &dbs, &cfg.eval_config(), &on_verdict);
    if let Some(w) = trace_writer {
        w.into_inner().expect("trace lock").flush()?;
    }
    print!("{}", report.to_table());
    if let Some(out) = &cfg.out {
        let mut w = create(out)?;
        w.write_all(report.to_json()?.as_bytes())?;
        w.flush()?;
    }
    if let Some(path) = csv {
        report.write_csv(create(path)?)?;
    }
    let failed = report.samples.iter().any(|s| s.failure.is_some())
        || (fail_fast && report.total < samples.len());
    Ok(Status::from_failures(failed))
}

#[derive(Serialize)]
struct RoundTripLine<'a> {
    id: usize,
    db_id: &'a str,
    gold_sql: &'a str,
    #[serde(flatten)]
    result: &'a RoundTrip,
}

#[derive(Serialize)]
struct RoundTripReport {
    summary: RoundTripSummary,
    acceptance_rate: f64,
    unavailable: Vec<usize>,
}

fn unsound(r: &RoundTrip) -> bool {
    match r {
        RoundTrip::Accepted {
            equivalent,
            literals_preserved,
            ..
        } => !equivalent || !literals_preserved,
        RoundTrip::CompileFailed { .. } => true,
        RoundTrip::Rejected { .. } => false,
    }
}

pub fn audit_roundtrip(cfg: &RunConfig, trace: Option<&Path>, fail_fast: bool) -> Result<Status> {
    let (samples, dbs) = load_for_samples(cfg)?;
    let run = |s: &SampleRecord| -> Option<RoundTrip> {
        let db = dbs.get(&s.db_id)?;
        let conn = db.connect().ok()?;
        Some(roundtrip(
            &s.gold_sql,
            &db.schema,
            &db.graph,
            &conn,
            cfg.limits,
        ))
    };
    let results: Vec<Option<RoundTrip>> = if fail_fast {
        let mut out = Vec::new();
        for s in &samples {
            let r = run(s);
            let stop = r.as_ref().is_some_and(unsound);
            out.push(r);
            if stop {
                break;
            }
        }
        out
    } else {
        pool(cfg.workers)?.install(|| samples.par_iter().map(run).collect())
    };
    let mut summary = RoundTripSummary::default();
    let mut unavailable = Vec::new();
    let mut trace = trace.map(create).transpose()?;
    for (s, r) in samples.iter().zip(&results) {
        let Some(r) = r else {
            unavailable.push(s.id);
            continue;
        };
        summary.add(r);
        if unsound(r) {
            eprintln!("unsound round trip for sample {}: {}", s.id, s.gold_sql);
        }
        if let Some(w) = trace.as_mut() {
            write_json_line(
                w,
                &RoundTripLine {
                    id: s.id,
                    db_id: &s.db_id,
                    gold_sql: &s.gold_sql,
                    result: r,
                },
            )?;
        }
    }
    if let Some(mut w) = trace {
        w.flush()?;
    }
    println!(
        "{} samples, {} accepted ({:.1}%), {} equivalent, {} compile failures, {} literal mismatches, {} without a database",
        summary.total,
        summary.accepted,
        100.0 * summary.acceptance_rate(),
        summary.equivalent,
        summary.compile_failures,
        summary.literal_mismatches,
        unavailable.len()
    );
    for (code, n) in &summary.reasons {
        println!("  rejected {code}: {n}");
    }
    let failed = !summary.is_sound() || !unavailable.is_empty();
    if let Some(out) = &cfg.out {
        let mut w = create(out)?;
        let report = RoundTripReport {
            acceptance_rate: summary.acceptance_rate(),
            summary,
            unavailable,
        };
        w.write_all(serde_json::to_string_pretty(&report)?.as_bytes())?;
        w.flush()?;
    }
    Ok(Status::from_failures(failed))
}

fn print_histogram(label: &str, h: &ValueHistogram) {
    println!("{label}");
    for (i, n) in h.buckets.iter().enumerate() {
        let name = if i == 4 {
            "4+".to_string()
        } else {
            i.to_string()
        };
        println!(
            "  {name:>2} values: {n:>6}   (reference {:>5})",
            REFERENCE_VALUE_BUCKETS[i]
        );
    }
    println!(
        "  queries with values: {} (reference 3531)",
        h.queries_with_values
    );
    println!("  total values: {} (reference 4690)", h.total_values);
}

pub fn stats(cfg: &RunConfig, recall: bool) -> Result<Status> {
    let catalog = catalog(cfg)?;
    let samples = samples(cfg, &catalog)?;
    let dist = value_distribution(&samples, &catalog);
    println!("{} samples, {} unparsed", dist.samples, dist.unparsed);
    print_histogram("counting LIMIT operands", &dist.with_limit);
    print_histogram("ignoring LIMIT operands", &dist.without_limit);
    let mut report = serde_json::json!({ "distribution": dist });
    if recall {
        let (samples, dbs) = load_for_samples(cfg)?;
        let r = candidate_recall(&samples, &dbs, &cfg.value);
        println!(
            "heuristic recall: {}/{} gold values ({:.1}%) over {} samples, {} skipped",
            r.found,
            r.gold_values,
            100.0 * r.recall,
            r.samples,
            r.skipped
        );
        report["recall"] = serde_json::to_value(r)?;
    }
    if let Some(out) = &cfg.out {
        let mut w = create(out)?;
        w.write_all(serde_json::to_string_pretty(&report)?.as_bytes())?;
        w.flush()?;
    }
    Ok(Status::from_failures(dist.unparsed > 0))
}
