//! Running SQL against a sample database and comparing result sets.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rusqlite::Connection;
use serde::{Deserialize, Serialize};

use crate::sql::parse_query;
use crate::sqlite::Cell;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_ROW_CAP: usize = 100_000;
const REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecLimits {
    pub timeout: Duration,
    pub row_cap: usize,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            timeout: DEFAULT_TIMEOUT,
            row_cap: DEFAULT_ROW_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    /// Empty when `error` is set.
    pub rows: Vec<Vec<Cell>>,
    pub columns: usize,
    /// The statement has a top-level ORDER BY.
    pub ordered: bool,
    pub error: Option<String>,
    pub elapsed_ms: f64,
}

impl ExecutionOutcome {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }

    fn failed(msg: String, ordered: bool, started: Instant) -> Self {
        ExecutionOutcome {
            rows: Vec::new(),
            columns: 0,
            ordered,
            error: Some(msg),
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

/// Whether `sql` has an ORDER BY outside any subquery. Unparseable text
/// counts as unordered.
pub fn is_ordered(sql: &str) -> bool {
    parse_query(sql).is_ok_and(|q| q.has_top_level_order())
}

/// Execute `sql`, materializing at most `limits.row_cap` rows. Errors,
/// timeouts and overflow all come back as an error outcome.
pub fn execute(conn: &Connection, sql: &str, limits: ExecLimits) -> ExecutionOutcome {
    let started = Instant::now();
    let ordered = is_ordered(sql);
    let deadline = started + limits.timeout;
    if let Err(e) = conn.progress_handler(1_000, Some(move || Instant::now() > deadline)) {
        return ExecutionOutcome::failed(e.to_string(), ordered, started);
    }
    let result = run(conn, sql, limits.row_cap);
    // Clearing the handler cannot fail once installing it succeeded.
    let _ = conn.progress_handler(0, None::<fn() -> bool>);
    match result {
        Ok((rows, columns)) => ExecutionOutcome {
            rows,
            columns,
            ordered,
            error: None,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        },
        Err(RunError::Sqlite(rusqlite::Error::SqliteFailure(e, _)))
            if e.code == rusqlite::ErrorCode::OperationInterrupted =>
        {
            ExecutionOutcome::failed(
                format!("timeout after {:?}", limits.timeout),
                ordered,
                started,
            )
        }
        Err(RunError::Sqlite(e)) => ExecutionOutcome::failed(e.to_string(), ordered, started),
        Err(RunError::RowCap) => ExecutionOutcome::failed(
            format!("result exceeds the row cap of {}", limits.row_cap),
            ordered,
            started,
        ),
    }
}

enum RunError {
    Sqlite(rusqlite::Error),
    RowCap,
}

impl From<rusqlite::Error> for RunError {
    fn from(e: rusqlite::Error) -> Self {
        RunError::Sqlite(e)
    }
}

fn run(conn: &Connection, sql: &str, cap: usize) -> Result<(Vec<Vec<Cell>>, usize), RunError> {
    let mut stmt = conn.prepare(sql)?;
    if !stmt.readonly() {
        return Err(RunError::Sqlite(rusqlite::Error::InvalidQuery));
    }
    let columns = stmt.column_count();
    let mut rows = Vec::new();
    let mut it = stmt.query([])?;
    while let Some(row) = it.next()? {
        if rows.len() == cap {
            return Err(RunError::RowCap);
        }
        let mut out = Vec::with_capacity(columns);
        for i in 0..columns {
            out.push(Cell::from_ref(row.get_ref(i)?));
        }
        rows.push(out);
    }
    Ok((rows, columns))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Match columns by position (default) rather than as a per-row multiset.
    pub positional_columns: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            positional_columns: true,
        }
    }
}

pub fn cells_equal(a: &Cell, b: &Cell) -> bool {
    match (a, b) {
        (Cell::Null, Cell::Null) => true,
        (Cell::Int(x), Cell::Int(y)) => x == y,
        (Cell::Text(x), Cell::Text(y)) => x == y,
        (Cell::Blob(x), Cell::Blob(y)) => x == y,
        (Cell::Int(_) | Cell::Real(_), Cell::Int(_) | Cell::Real(_)) => {
            let (x, y) = (
                a.as_f64().unwrap_or(f64::NAN),
                b.as_f64().unwrap_or(f64::NAN),
            );
            x == y || (x - y).abs() <= REL_TOLERANCE * x.abs().max(y.abs())
        }
        _ => false,
    }
}

fn rank(c: &Cell) -> u8 {
    match c {
        Cell::Null => 0,
        Cell::Int(_) | Cell::Real(_) => 1,
        Cell::Text(_) => 2,
        Cell::Blob(_) => 3,
    }
}

/// Total order consistent with [`cells_equal`] up to the float tolerance.
fn cell_order(a: &Cell, b: &Cell) -> Ordering {
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Cell::Int(x), Cell::Int(y)) => x.cmp(y),
        (Cell::Int(_) | Cell::Real(_), Cell::Int(_) | Cell::Real(_)) => {
            let (x, y) = (a.as_f64().unwrap_or(0.0), b.as_f64().unwrap_or(0.0));
            x.total_cmp(&y)
        }
        (Cell::Text(x), Cell::Text(y)) => x.cmp(y),
        (Cell::Blob(x), Cell::Blob(y)) => x.cmp(y),
        _ => Ordering::Equal,
    })
}

fn row_order(a: &[Cell], b: &[Cell]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match cell_order(x, y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn rows_equal(a: &[Cell], b: &[Cell]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| cells_equal(x, y))
}

/// Same results: sequence equality when gold is ordered, multiset equality
/// otherwise. Any error outcome compares unequal.
pub fn results_equivalent(pred: &ExecutionOutcome, gold: &ExecutionOutcome) -> bool {
    results_equivalent_with(pred, gold, CompareOptions::default())
}

pub fn results_equivalent_with(
    pred: &ExecutionOutcome,
    gold: &ExecutionOutcome,
    opts: CompareOptions,
) -> bool {
    if pred.is_error() || gold.is_error() {
        return false;
    }
    if pred.columns != gold.columns || pred.rows.len() != gold.rows.len() {
        return false;
    }
    let prep = |rows: &[Vec<Cell>]| -> Vec<Vec<Cell>> {
        rows.iter()
            .map(|r| {
                let mut r = r.clone();
                if !opts.positional_columns {
                    r.sort_by(cell_order);
                }
                r
            })
            .collect()
    };
    let (mut p, mut g) = (prep(&pred.rows), prep(&gold.rows));
    if !gold.ordered {
        p.sort_by(|a, b| row_order(a, b));
        g.sort_by(|a, b| row_order(a, b));
    }
    p.iter().zip(&g).all(|(a, b)| rows_equal(a, b))
}
