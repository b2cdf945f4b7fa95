//! Run configuration: command-line flags, `SEMQL_*` environment variables
//! and an optional TOML file, in that order of precedence.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use semql_core::distance::ThresholdPolicy;
use semql_core::eval::{EvalConfig, ExecLimits, PolicySpec};
use semql_core::pipeline::TranslateOptions;
use semql_core::synth::{SearchConfig, DEFAULT_MAX_DEPTH};
use semql_core::values::{ValueConfig, DEFAULT_CANDIDATE_CAP};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Full,
    Light,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Baseline,
    External,
    /// Replay the converted gold query (light mode only); an upper bound
    /// for the compiler and evaluator.
    GoldReplay,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with defaults for any of these options.
    #[arg(long, global = true, env = "SEMQL_CONFIG")]
    pub config: Option<PathBuf>,
    /// Schema catalog (tables.json).
    #[arg(long, global = true, env = "SEMQL_CATALOG")]
    pub catalog: Option<PathBuf>,
    /// Samples file (a JSON array of {db_id, question, query}).
    #[arg(long, global = true, env = "SEMQL_SAMPLES")]
    pub samples: Option<PathBuf>,
    /// Directory holding <db_id>/<db_id>.sqlite.
    #[arg(long, global = true, env = "SEMQL_DB_DIR")]
    pub db_dir: Option<PathBuf>,
    /// Directory of cached value indexes.
    #[arg(long, global = true, env = "SEMQL_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, env = "SEMQL_MODE")]
    pub mode: Option<Mode>,
    #[arg(long, global = true, value_enum, env = "SEMQL_POLICY")]
    pub policy: Option<PolicyKind>,
    /// Command started for the external policy.
    #[arg(long, global = true, env = "SEMQL_POLICY_CMD")]
    pub policy_cmd: Option<String>,
    /// Command started for the external entity recognizer.
    #[arg(long, global = true, env = "SEMQL_NER_CMD")]
    pub ner_cmd: Option<String>,
    #[arg(long, global = true, env = "SEMQL_BEAM")]
    pub beam: Option<usize>,
    #[arg(long, global = true, env = "SEMQL_MAX_DEPTH")]
    pub max_depth: Option<usize>,
    /// Fixed edit-distance threshold; length-scaled when absent.
    #[arg(long, global = true, env = "SEMQL_THRESHOLD")]
    pub threshold: Option<usize>,
    #[arg(long, global = true, env = "SEMQL_CANDIDATE_CAP")]
    pub candidate_cap: Option<usize>,
    /// Query execution timeout.
    #[arg(long, global = true, env = "SEMQL_TIMEOUT_MS")]
    pub timeout_ms: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "SEMQL_WORKERS")]
    pub workers: Option<usize>,
    /// Output file (report, trace or index directory, by command).
    #[arg(long, global = true, env = "SEMQL_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    catalog: Option<PathBuf>,
    samples: Option<PathBuf>,
    db_dir: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    mode: Option<Mode>,
    policy: Option<PolicyKind>,
    policy_cmd: Option<String>,
    ner_cmd: Option<String>,
    beam: Option<usize>,
    max_depth: Option<usize>,
    threshold: Option<usize>,
    candidate_cap: Option<usize>,
    timeout_ms: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub catalog: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub db_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub mode: Mode,
    pub policy: PolicyKind,
    pub policy_cmd: Option<String>,
    pub ner_cmd: Option<String>,
    pub search: SearchConfig,
    pub value: ValueConfig,
    pub limits: ExecLimits,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str::<FileConfig>(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => FileConfig::default(),
        };
        let a = args.clone();
        let threshold = a.threshold.or(file.threshold);
        let cfg = RunConfig {
            catalog: a.catalog.or(file.catalog),
            samples: a.samples.or(file.samples),
            db_dir: a.db_dir.or(file.db_dir),
            cache_dir: a.cache_dir.or(file.cache_dir),
            mode: a.mode.or(file.mode).unwrap_or(Mode::Full),
            policy: a.policy.or(file.policy).unwrap_or(PolicyKind::Baseline),
            policy_cmd: a.policy_cmd.or(file.policy_cmd),
            ner_cmd: a.ner_cmd.or(file.ner_cmd),
            search: SearchConfig {
                beam: a.beam.or(file.beam).unwrap_or(1),
                max_depth: a.max_depth.or(file.max_depth).unwrap_or(DEFAULT_MAX_DEPTH),
            },
            value: ValueConfig {
                threshold: threshold.map_or(ThresholdPolicy::LengthScaled, ThresholdPolicy::Fixed),
                cap: a
                    .candidate_cap
                    .or(file.candidate_cap)
                    .unwrap_or(DEFAULT_CANDIDATE_CAP),
            },
            limits: ExecLimits {
                timeout: a
                    .timeout_ms
                    .or(file.timeout_ms)
                    .map_or(ExecLimits::default().timeout, Duration::from_millis),
                ..ExecLimits::default()
            },
            workers: a
                .workers
                .or(file.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            out: a.out.or(file.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.policy == PolicyKind::External && self.policy_cmd.is_none() {
            bail!("--policy external requires --policy-cmd");
        }
        if self.policy == PolicyKind::GoldReplay && self.mode != Mode::Light {
            bail!("--policy gold-replay requires --mode light");
        }
        if self.search.beam == 0 {
            bail!("--beam must be at least 1");
        }
        if self.workers == 0 {
            bail!("--workers must be at least 1");
        }
        Ok(())
    }

    pub fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        value
            .as_deref()
            .with_context(|| format!("{flag} is required"))
    }

    pub fn policy_spec(&self) -> PolicySpec {
        match self.policy {
            PolicyKind::Baseline => PolicySpec::Baseline,
            PolicyKind::External => {
                PolicySpec::External(self.policy_cmd.clone().unwrap_or_default())
            }
            PolicyKind::GoldReplay => PolicySpec::ScriptedGold,
        }
    }

    pub fn translate_options(&self) -> TranslateOptions {
        TranslateOptions {
            value: self.value.clone(),
            search: self.search,
            limits: self.limits,
            execute: true,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            light: self.mode == Mode::Light,
            policy: self.policy_spec(),
            translate: self.translate_options(),
            workers: self.workers,
            ner_command: self.ner_cmd.clone(),
        }
    }
}
