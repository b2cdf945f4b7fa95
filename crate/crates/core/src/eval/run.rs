//! Batch evaluation: translate every sample, execute prediction and gold,
//! and collect verdicts. Workers own their connections and policies.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use rusqlite::Connection;
use serde::{Deserialize, Serialize};

use super::difficulty::classify_difficulty;
use super::execute::{execute, results_equivalent};
use super::report::{EvalReport, SampleVerdict};
use crate::dataset::DatabaseSet;
use crate::pipeline::{translate, StageTimings, TranslateOptions};
use crate::schema::{SampleFlag, SampleRecord};
use crate::semql::sql_to_semql;
use crate::sql::{gold_literals, parse_query};
use crate::synth::{BaselinePolicy, ContextMode, ExternalPolicy, Policy, ScriptedPolicy};
use crate::values::NerClient;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "command", rename_all = "snake_case")]
pub enum PolicySpec {
    Baseline,
    External(String),
    /// Replays the converted gold tree; samples the converter rejects fail.
    ScriptedGold,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub light: bool,
    pub policy: PolicySpec,
    pub translate: TranslateOptions,
    pub workers: usize,
    pub ner_command: Option<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            light: false,
            policy: PolicySpec::Baseline,
            translate: TranslateOptions {
                execute: true,
                ..Default::default()
            },
            workers: 1,
            ner_command: None,
        }
    }
}

struct Worker {
    conns: HashMap<String, Connection>,
    policy: Option<Box<dyn Policy>>,
    ner: Option<NerClient>,
}

impl Worker {
    fn new(cfg: &EvalConfig) -> Self {
        let policy: Option<Box<dyn Policy>> = match &cfg.policy {
            PolicySpec::Baseline => Some(Box::new(BaselinePolicy::new())),
            PolicySpec::External(cmd) => Some(Box::new(ExternalPolicy::new(cmd.clone()))),
            PolicySpec::ScriptedGold => None,
        };
        Worker {
            conns: HashMap::new(),
            policy,
            ner: cfg.ner_command.as_ref().map(NerClient::new),
        }
    }
}

fn failed(sample: &SampleRecord, reason: String) -> SampleVerdict {
    let c = classify_difficulty(&sample.gold_sql);
    SampleVerdict {
        id: sample.id,
        db_id: sample.db_id.clone(),
        question: sample.question.clone(),
        gold_sql: sample.gold_sql.clone(),
        predicted_sql: None,
        difficulty: c.difficulty,
        difficulty_unparsed: c.unparsed,
        equivalent: false,
        failure: Some(reason),
        timings: StageTimings::default(),
    }
}

fn evaluate_one(
    sample: &SampleRecord,
    dbs: &DatabaseSet,
    cfg: &EvalConfig,
    w: &mut Worker,
) -> SampleVerdict {
    match &sample.flag {
        Some(SampleFlag::MissingField(f)) => {
            return failed(sample, format!("sample is missing `{f}`"))
        }
        Some(SampleFlag::UnknownDb) => {
            return failed(sample, format!("unknown database {}", sample.db_id))
        }
        None => {}
    }
    let Some(db) = dbs.get(&sample.db_id) else {
        let why = dbs
            .unavailable
            .get(&sample.db_id)
            .cloned()
            .unwrap_or_else(|| "not in catalog".into());
        return failed(
            sample,
            format!("database {} unavailable: {why}", sample.db_id),
        );
    };
    if !w.conns.contains_key(&sample.db_id) {
        match db.connect() {
            Ok(c) => {
                w.conns.insert(sample.db_id.clone(), c);
            }
            Err(e) => return failed(sample, format!("cannot open database: {e}")),
        }
    }
    let conn = &w.conns[&sample.db_id];

    let mut scripted;
    let (mode, policy): (ContextMode, &mut dyn Policy) = match &cfg.policy {
        PolicySpec::ScriptedGold => match sql_to_semql(&sample.gold_sql, &db.schema) {
            Ok(conv) => {
                scripted = ScriptedPolicy::new(conv.tree.to_actions());
                (ContextMode::Light(conv.values), &mut scripted)
            }
            Err(u) => return failed(sample, format!("unsupported gold query: {u}")),
        },
        _ => {
            let mode = if cfg.light {
                let options = parse_query(&sample.gold_sql)
                    .map(|q| gold_literals(&q, Some(&db.schema)))
                    .unwrap_or_default();
                ContextMode::Light(options)
            } else {
                ContextMode::Full
            };
            (
                mode,
                w.policy
                    .as_deref_mut()
                    .expect("policy for non-scripted runs"),
            )
        }
    };
    let tr = translate(
        &sample.question,
        db.resources(conn),
        &mode,
        policy,
        w.ner.as_mut(),
        &cfg.translate,
    );
    let gold = execute(conn, &sample.gold_sql, cfg.translate.limits);
    let c = classify_difficulty(&sample.gold_sql);
    let mut failure = tr
        .failure
        .as_ref()
        .map(|f| format!("{:?}: {}", f.stage, f.message).to_lowercase());
    if failure.is_none() {
        if let Some(e) = tr.outcome.as_ref().and_then(|o| o.error.clone()) {
            failure = Some(format!("prediction failed to execute: {e}"));
        }
    }
    if let Some(e) = &gold.error {
        failure.get_or_insert_with(|| format!("gold failed to execute: {e}"));
    }
    let equivalent = tr
        .outcome
        .as_ref()
        .is_some_and(|o| results_equivalent(o, &gold));
    SampleVerdict {
        id: sample.id,
        db_id: sample.db_id.clone(),
        question: sample.question.clone(),
        gold_sql: sample.gold_sql.clone(),
        predicted_sql: tr.sql,
        difficulty: c.difficulty,
        difficulty_unparsed: c.unparsed,
        equivalent,
        failure,
        timings: tr.timings,
    }
}

/// Evaluate `samples` with `cfg.workers` threads. A failure of any kind,
/// including a panic, becomes that sample's verdict. `on_verdict` sees
/// each verdict as it completes and may return false to stop early.
pub fn evaluate_set_with(
    samples: &[SampleRecord],
    dbs: &DatabaseSet,
    cfg: &EvalConfig,
    on_verdict: &(dyn Fn(&SampleVerdict) -> bool + Sync),
) -> EvalReport {
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let verdicts = Mutex::new(Vec::with_capacity(samples.len()));
    let workers = cfg.workers.clamp(1, samples.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut worker = Worker::new(cfg);
                loop {
                    if stop.load(Ordering::Relaxed) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(sample) = samples.get(i) else { break };
                    let v = catch_unwind(AssertUnwindSafe(|| {
                        evaluate_one(sample, dbs, cfg, &mut worker)
                    }))
                    .unwrap_or_else(|_| {
                        worker = Worker::new(cfg);
                        failed(sample, "internal error while evaluating".into())
                    });
                    if !on_verdict(&v) {
                        stop.store(true, Ordering::Relaxed);
                    }
                    verdicts.lock().expect("verdict lock").push(v);
                }
            });
        }
    });
    EvalReport::from_verdicts(verdicts.into_inner().expect("verdict lock"))
}

pub fn evaluate_set(samples: &[SampleRecord], dbs: &DatabaseSet, cfg: &EvalConfig) -> EvalReport {
    evaluate_set_with(samples, dbs, cfg, &|_| true)
}
