mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Status;
use config::{CommonArgs, RunConfig};

/// Natural-language-to-SQL translation and evaluation over Spider-format data.
#[derive(Parser)]
#[command(name = "semql", version)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and cache the value index of each database.
    Index {
        /// Only these databases.
        #[arg(long = "db")]
        dbs: Vec<String>,
    },
    /// Translate one question and print the SQL.
    Translate {
        question: String,
        #[arg(long)]
        db: String,
        /// Gold query whose literals form the candidate set in light mode.
        #[arg(long)]
        gold_sql: Option<String>,
        #[arg(long)]
        show_candidates: bool,
    },
    /// Execution accuracy over a sample file.
    Evaluate {
        /// Per-sample CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON-lines trace, one verdict per line.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Stop at the first sample that is not answered correctly.
        #[arg(long)]
        fail_fast: bool,
    },
    /// Convert each gold query to SemQL and back and compare results.
    Roundtrip {
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Stop at the first query that does not round-trip.
        #[arg(long)]
        fail_fast: bool,
    },
    /// Literal counts of gold queries.
    Stats {
        /// Also measure heuristic value recall (needs --db-dir).
        #[arg(long)]
        recall: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match cli.command {
        Command::Index { dbs } => commands::index(&cfg, &dbs),
        Command::Translate {
            question,
            db,
            gold_sql,
            show_candidates,
        } => {
            commands::translate_question(&cfg, &question, &db, gold_sql.as_deref(), show_candidates)
        }
        Command::Evaluate {
            csv,
            trace,
            fail_fast,
        } => commands::evaluate(&cfg, csv.as_deref(), trace.as_deref(), fail_fast),
        Command::Roundtrip { trace, fail_fast } => {
            commands::audit_roundtrip(&cfg, trace.as_deref(), fail_fast)
        }
        Command::Stats { recall } => commands::stats(&cfg, recall),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::SampleFailures) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
