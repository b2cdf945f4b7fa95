//! Rendering a value candidate as a SQL literal for a given column and use.

use serde::{Deserialize, Serialize};

use crate::normalize::canonical_number;
use crate::schema::{Column, ColumnType};
use crate::semql::AggKind;
use crate::sql::LiteralKind;
use crate::sqlite::{quote_text, Cell};
use crate::values::ValueCandidate;

/// Where `%` goes when a LIKE value carries no wildcard of its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LikeCue {
    StartsWith,
    EndsWith,
    Contains,
}

const START_WORDS: &[&str] = &[
    "start",
    "starts",
    "starting",
    "begin",
    "begins",
    "beginning",
];
const END_WORDS: &[&str] = &["end", "ends", "ending"];
const CONTAIN_WORDS: &[&str] = &[
    "contain",
    "contains",
    "containing",
    "substring",
    "has",
    "include",
    "includes",
    "including",
];

/// The cue nearest before `span` (char offsets), or anywhere in the
/// question when there is none before it.
pub fn like_cue(question: &str, span: Option<(usize, usize)>) -> LikeCue {
    let classify = |w: &str| {
        let w = w.to_lowercase();
        if START_WORDS.contains(&w.as_str()) {
            Some(LikeCue::StartsWith)
        } else if END_WORDS.contains(&w.as_str()) {
            Some(LikeCue::EndsWith)
        } else if CONTAIN_WORDS.contains(&w.as_str()) {
            Some(LikeCue::Contains)
        } else {
            None
        }
    };
    let words: Vec<(usize, &str)> = word_offsets(question);
    if let Some((start, _)) = span {
        if let Some(cue) = words
            .iter()
            .rev()
            .filter(|(o, _)| *o < start)
            .find_map(|(_, w)| classify(w))
        {
            return cue;
        }
    }
    words
        .iter()
        .find_map(|(_, w)| classify(w))
        .unwrap_or(LikeCue::Contains)
}

fn word_offsets(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (ci, (bi, ch)) in s.char_indices().enumerate() {
        if ch.is_alphanumeric() {
            if start.is_none() {
                start = Some((ci, bi));
            }
        } else if let Some((c0, b0)) = start.take() {
            out.push((c0, &s[b0..bi]));
        }
    }
    if let Some((c0, b0)) = start {
        out.push((c0, &s[b0..]));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueUse {
    /// Comparison, BETWEEN bound.
    Compare,
    Like(LikeCue),
    /// The row count of a Superlative.
    Limit,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("value {surface:?} is not numeric but column {column} is")]
    NotNumeric { surface: String, column: String },
    #[error("limit {0:?} is not a non-negative integer")]
    BadLimit(String),
}

fn numeric(c: &ValueCandidate, column: &Column) -> Result<String, FormatError> {
    canonical_number(&c.surface).ok_or_else(|| FormatError::NotNumeric {
        surface: c.surface.clone(),
        column: column.name.clone(),
    })
}

/// SQL literal for `c` used as `how` against `column` (under `agg`).
///
/// A candidate with a known literal kind keeps it. Otherwise text columns
/// quote, number columns and count/sum/avg take the canonical decimal form,
/// and other column types follow the stored value. A LIKE value that
/// already holds `%` is only quoted.
pub fn format_value(
    c: &ValueCandidate,
    column: &Column,
    agg: AggKind,
    how: ValueUse,
) -> Result<String, FormatError> {
    match how {
        ValueUse::Limit => {
            let n = canonical_number(&c.surface)
                .filter(|n| n.bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| FormatError::BadLimit(c.surface.clone()))?;
            return Ok(n);
        }
        ValueUse::Like(cue) => {
            if c.is_wildcard() {
                return Ok(quote_text(&c.surface));
            }
            let body = &c.surface;
            let pattern = match cue {
                LikeCue::StartsWith => format!("{body}%"),
                LikeCue::EndsWith => format!("%{body}"),
                LikeCue::Contains => format!("%{body}%"),
            };
            return Ok(quote_text(&pattern));
        }
        ValueUse::Compare => {}
    }
    // A literal whose kind is known (a gold option) keeps it.
    match c.literal_kind {
        Some(LiteralKind::Number) => return numeric(c, column),
        Some(LiteralKind::Text) => return Ok(quote_text(&c.surface)),
        None => {}
    }
    if matches!(agg, AggKind::Count | AggKind::Sum | AggKind::Avg) {
        return numeric(c, column);
    }
    match column.ty {
        ColumnType::Number => numeric(c, column),
        ColumnType::Text => Ok(quote_text(&c.surface)),
        ColumnType::Time | ColumnType::Boolean | ColumnType::Others => {
            let kind = match &c.stored {
                Some(Cell::Int(_) | Cell::Real(_)) => Some(LiteralKind::Number),
                Some(Cell::Text(_)) => Some(LiteralKind::Text),
                _ => None,
            };
            match kind {
                Some(LiteralKind::Number) => {
                    numeric(c, column).or_else(|_| Ok(quote_text(&c.surface)))
                }
                Some(LiteralKind::Text) => Ok(quote_text(&c.surface)),
                None => Ok(canonical_number(&c.surface).unwrap_or_else(|| quote_text(&c.surface))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::values::Origin;

    fn column(ty: ColumnType) -> Column {
        Column {
            table: Some(0),
            name: "c".into(),
            display: "c".into(),
            ty,
        }
    }

    fn cand(s: &str) -> ValueCandidate {
        ValueCandidate::new(s, Origin::Verbatim)
    }

    #[test]
    fn text_and_numbers() {
        let text = column(ColumnType::Text);
        let num = column(ColumnType::Number);
        let f = |s: &str, c: &Column, agg| format_value(&cand(s), c, agg, ValueUse::Compare);
        assert_eq!(f("France", &text, AggKind::None).unwrap(), "'France'");
        assert_eq!(f("Stark's", &text, AggKind::None).unwrap(), "'Stark''s'");
        assert_eq!(f("20", &num, AggKind::None).unwrap(), "20");
        assert_eq!(f("20.0", &num, AggKind::None).unwrap(), "20");
        assert!(f("twenty", &num, AggKind::None).is_err());
        assert_eq!(f("2", &text, AggKind::Count).unwrap(), "2");
    }

    #[test]
    fn like_wildcards_follow_cues() {
        let text = column(ColumnType::Text);
        let q = "Find songs starting with \"goodbye\"";
        let cue = like_cue(q, Some((25, 32)));
        assert_eq!(cue, LikeCue::StartsWith);
        let like = format_value(&cand("goodbye"), &text, AggKind::None, ValueUse::Like(cue));
        assert_eq!(like.unwrap(), "'goodbye%'");
        assert_eq!(like_cue("names that end with son", None), LikeCue::EndsWith);
        assert_eq!(
            like_cue("which has the substring 'Ha'", None),
            LikeCue::Contains
        );
        assert_eq!(
            like_cue("which names look like Ha", None),
            LikeCue::Contains
        );
        let time = column(ColumnType::Time);
        let pre = format_value(
            &cand("8/%"),
            &time,
            AggKind::None,
            ValueUse::Like(LikeCue::Contains),
        );
        assert_eq!(pre.unwrap(), "'8/%'");
    }

    #[test]
    fn limits_are_integers() {
        let c = column(ColumnType::Number);
        assert_eq!(
            format_value(&cand("3"), &c, AggKind::None, ValueUse::Limit).unwrap(),
            "3"
        );
        assert!(format_value(&cand("2.5"), &c, AggKind::None, ValueUse::Limit).is_err());
    }

    #[test]
    fn other_types_follow_the_literal() {
        let c = column(ColumnType::Others);
        let mut v = cand("T");
        assert_eq!(
            format_value(&v, &c, AggKind::None, ValueUse::Compare).unwrap(),
            "'T'"
        );
        v.surface = "1".into();
        v.literal_kind = Some(LiteralKind::Text);
        assert_eq!(
            format_value(&v, &c, AggKind::None, ValueUse::Compare).unwrap(),
            "'1'"
        );
        v.literal_kind = Some(LiteralKind::Number);
        let text = column(ColumnType::Text);
        assert_eq!(
            format_value(&v, &text, AggKind::None, ValueUse::Compare).unwrap(),
            "1"
        );
        v.stored = Some(Cell::Text("1".into()));
        v.literal_kind = None;
        assert_eq!(
            format_value(&v, &c, AggKind::None, ValueUse::Compare).unwrap(),
            "'1'"
        );
        v.stored = None;
        v.literal_kind = None;
        assert_eq!(
            format_value(&v, &c, AggKind::None, ValueUse::Compare).unwrap(),
            "1"
        );
    }
}
