//! End-to-end translation of one question, timed stage by stage.

use std::time::Instant;

use rusqlite::Connection;
use serde::{Deserialize, Serialize};

use crate::compile::compile;
use crate::eval::{execute, ExecLimits, ExecutionOutcome};
use crate::graph::SchemaGraph;
use crate::hints::annotate_question;
use crate::index::ValueIndex;
use crate::schema::DatabaseSchema;
use crate::semql::SemQlTree;
use crate::synth::{
    light_candidates, synthesize, ContextMode, EncodingContext, Policy, SearchConfig,
};
use crate::values::{lookup_values, CandidateSet, NerClient, ValueConfig};

/// Everything one database contributes to a translation.
#[derive(Clone, Copy)]
pub struct Resources<'a> {
    pub schema: &'a DatabaseSchema,
    pub graph: &'a SchemaGraph,
    pub index: &'a ValueIndex,
    pub conn: &'a Connection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TranslateOptions {
    pub value: ValueConfig,
    pub search: SearchConfig,
    #[serde(skip)]
    pub limits: ExecLimits,
    /// Run the predicted query.
    pub execute: bool,
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub preprocessing: f64,
    pub value_lookup: f64,
    pub synthesis: f64,
    pub postprocessing: f64,
    pub execution: f64,
    pub total: f64,
}

impl StageTimings {
    pub const STAGES: [&'static str; 5] = [
        "preprocessing",
        "value_lookup",
        "synthesis",
        "postprocessing",
        "execution",
    ];

    pub fn stages(&self) -> [f64; 5] {
        [
            self.preprocessing,
            self.value_lookup,
            self.synthesis,
            self.postprocessing,
            self.execution,
        ]
    }

    pub fn stage_sum(&self) -> f64 {
        self.stages().iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedStage {
    Synthesis,
    Postprocessing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: FailedStage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub question: String,
    pub candidates: CandidateSet,
    pub tree: Option<SemQlTree>,
    pub sql: Option<String>,
    pub outcome: Option<ExecutionOutcome>,
    pub failure: Option<Failure>,
    pub timings: StageTimings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub fn translate(
    question: &str,
    res: Resources<'_>,
    mode: &ContextMode,
    policy: &mut dyn Policy,
    ner: Option<&mut NerClient>,
    opts: &TranslateOptions,
) -> Translation {
    let mut t = StageTimings::default();
    let start = Instant::now();

    let annotation = annotate_question(question, res.schema, res.index);
    let mut mark = Instant::now();
    t.preprocessing = (mark - start).as_secs_f64() * 1e3;

    let ctx = match mode {
        ContextMode::Full => {
            let lookup = lookup_values(
                question,
                &annotation,
                res.schema,
                res.index,
                res.conn,
                ner,
                &opts.value,
            );
            EncodingContext::new(
                question,
                res.schema,
                annotation,
                lookup.candidates,
                lookup.extracted,
                false,
            )
        }
        ContextMode::Light(options) => {
            let candidates = light_candidates(question, options, res.index);
            EncodingContext::new(
                question,
                res.schema,
                annotation,
                candidates,
                Vec::new(),
                true,
            )
        }
    };
    t.value_lookup = ms(mark);
    mark = Instant::now();

    let synthesized = synthesize(&ctx, policy, &opts.search);
    t.synthesis = ms(mark);
    mark = Instant::now();

    let mut out = Translation {
        question: question.to_string(),
        candidates: ctx.candidates.clone(),
        tree: None,
        sql: None,
        outcome: None,
        failure: None,
        timings: t,
    };
    match synthesized {
        Err(e) => {
            out.failure = Some(Failure {
                stage: FailedStage::Synthesis,
                message: e.to_string(),
            });
        }
        Ok(s) => {
            match compile(
                &s.tree,
                res.schema,
                res.graph,
                &ctx.candidates.candidates,
                question,
            ) {
                Ok(c) => out.sql = Some(c.sql),
                Err(e) => {
                    out.failure = Some(Failure {
                        stage: FailedStage::Postprocessing,
                        message: e.to_string(),
                    })
                }
            }
            out.tree = Some(s.tree);
        }
    }
    out.timings.postprocessing = ms(mark);
    mark = Instant::now();

    if opts.execute {
        if let Some(sql) = &out.sql {
            out.outcome = Some(execute(res.conn, sql, opts.limits));
        }
    }
    out.timings.execution = ms(mark);
    out.timings.total = ms(start);
    out
}
