//! Value mentions in a question: quoted spans, capitalized runs, single
//! letters and (optionally) entities from an external recognizer.

use serde::{Deserialize, Serialize};

use crate::text::char_slice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtractionSource {
    Ner,
    Quoted,
    Capitalized,
    SingleLetter,
}

impl ExtractionSource {
    /// Preference when two overlapping spans have the same length.
    fn rank(self) -> u8 {
        match self {
            ExtractionSource::Quoted => 0,
            ExtractionSource::Ner => 1,
            ExtractionSource::Capitalized => 2,
            ExtractionSource::SingleLetter => 3,
        }
    }
}

/// `span` is in chars and slices the question to `text` exactly (quote
/// characters are outside the span).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedValue {
    pub text: String,
    pub span: (usize, usize),
    pub source: ExtractionSource,
}

impl ExtractedValue {
    fn new(question: &[char], start: usize, end: usize, source: ExtractionSource) -> Self {
        ExtractedValue {
            text: question[start..end].iter().collect(),
            span: (start, end),
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.span.1 - self.span.0
    }

    pub fn is_empty(&self) -> bool {
        self.span.0 == self.span.1
    }
}

/// An entity reported by an external recognizer, offsets in chars.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub text: String,
    pub start: usize,
    pub end: usize,
    #[serde(rename = "type", default)]
    pub kind: String,
}

const QUOTE_PAIRS: [(char, char); 4] = [
    ('\'', '\''),
    ('"', '"'),
    ('\u{2018}', '\u{2019}'),
    ('\u{201c}', '\u{201d}'),
];

/// Words that start a question capitalized without naming anything.
const LEADING_WORDS: &[&str] = &[
    "a", "an", "the", "what", "which", "who", "whom", "whose", "when", "where", "why", "how",
    "show", "list", "find", "give", "return", "count", "tell", "display", "get", "is", "are",
    "was", "were", "do", "does", "did", "for", "in", "of", "on", "at", "from", "please", "compute",
    "report", "select", "sort", "order", "in", "among", "each", "all", "please", "can", "could",
    "i", "what's", "whats", "name", "provide", "identify",
];

/// Lowercase words allowed inside a capitalized run ("Charles de Gaulle").
const CONNECTORS: &[&str] = &[
    "of", "de", "la", "le", "du", "van", "von", "der", "the", "and", "&",
];

const LETTER_CUES: &[&str] = &[
    "letter",
    "character",
    "initial",
    "grade",
    "class",
    "type",
    "section",
    "code",
];

pub fn extract_values(question: &str, entities: &[Entity]) -> Vec<ExtractedValue> {
    let chars: Vec<char> = question.chars().collect();
    let mut found = quoted(&chars);
    found.extend(capitalized(&chars));
    found.extend(single_letters(&chars));
    for e in entities {
        if e.start < e.end && e.end <= chars.len() {
            found.push(ExtractedValue::new(
                &chars,
                e.start,
                e.end,
                ExtractionSource::Ner,
            ));
        }
    }
    merge_overlaps(found)
}

/// Overlapping spans collapse to the longest (ties: source preference,
/// then earliest start). Output is sorted by start.
pub fn merge_overlaps(mut found: Vec<ExtractedValue>) -> Vec<ExtractedValue> {
    found.retain(|e| !e.text.trim().is_empty());
    found.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.source.rank().cmp(&b.source.rank()))
            .then(a.span.cmp(&b.span))
    });
    let mut kept: Vec<ExtractedValue> = Vec::new();
    for e in found {
        if !kept
            .iter()
            .any(|k| k.span.0 < e.span.1 && e.span.0 < k.span.1)
        {
            kept.push(e);
        }
    }
    kept.sort_by_key(|e| e.span);
    kept
}

fn is_boundary(c: Option<&char>) -> bool {
    c.is_none_or(|c| !c.is_alphanumeric())
}

fn quoted(chars: &[char]) -> Vec<ExtractedValue> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let Some(&(_, close)) = QUOTE_PAIRS.iter().find(|(open, _)| *open == chars[i]) else {
            i += 1;
            continue;
        };
        // An apostrophe inside a word ("head's") opens nothing.
        if !is_boundary(if i == 0 { None } else { chars.get(i - 1) }) {
            i += 1;
            continue;
        }
        let end =
            (i + 1..chars.len()).find(|&j| chars[j] == close && is_boundary(chars.get(j + 1)));
        match end {
            Some(j) if j > i + 1 => {
                out.push(ExtractedValue::new(
                    chars,
                    i + 1,
                    j,
                    ExtractionSource::Quoted,
                ));
                i = j + 1;
            }
            _ => i += 1,
        }
    }
    out
}

/// Whitespace-separated words with trailing punctuation trimmed; offsets in chars.
fn words(chars: &[char]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let (mut s, mut e) = (start, i);
        while s < e && !chars[s].is_alphanumeric() {
            s += 1;
        }
        while e > s && !chars[e - 1].is_alphanumeric() {
            e -= 1;
        }
        if s < e {
            out.push((s, e));
        }
    }
    out
}

fn capitalized(chars: &[char]) -> Vec<ExtractedValue> {
    let ws = words(chars);
    let text = |&(s, e): &(usize, usize)| -> String { chars[s..e].iter().collect() };
    let is_cap = |w: &(usize, usize)| chars[w.0].is_uppercase();
    let has_digit = |w: &(usize, usize)| chars[w.0..w.1].iter().any(|c| c.is_ascii_digit());
    let mut out = Vec::new();
    let mut i = 0;
    while i < ws.len() {
        if !is_cap(&ws[i])
            || (i == 0 && LEADING_WORDS.contains(&text(&ws[i]).to_lowercase().as_str()))
        {
            i += 1;
            continue;
        }
        if text(&ws[i]) == "I" {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i + 1;
        loop {
            let Some(next) = ws.get(end) else { break };
            // Sentence punctuation between words ends the run.
            if chars[ws[end - 1].1..next.0]
                .iter()
                .any(|c| matches!(c, ',' | ';' | ':' | '?' | '!' | '.'))
            {
                break;
            }
            if is_cap(next) || has_digit(next) {
                end += 1;
            } else if CONNECTORS.contains(&text(next).to_lowercase().as_str())
                && ws.get(end + 1).is_some_and(is_cap)
            {
                end += 2;
            } else {
                break;
            }
        }
        let (s, e) = (ws[start].0, ws[end - 1].1);
        // A lone capital is left to the single-letter rule, and a lone
        // sentence-initial word is capitalized by convention only.
        if e - s == 1 || (start == 0 && end == 1) {
            i = end;
            continue;
        }
        out.push(ExtractedValue::new(
            chars,
            s,
            e,
            ExtractionSource::Capitalized,
        ));
        i = end;
    }
    out
}

fn single_letters(chars: &[char]) -> Vec<ExtractedValue> {
    let ws = words(chars);
    let mut out = Vec::new();
    for (k, &(s, e)) in ws.iter().enumerate() {
        if e - s != 1 || !chars[s].is_alphabetic() {
            continue;
        }
        let cued = k > 0 && {
            let (ps, pe) = ws[k - 1];
            let prev: String = chars[ps..pe].iter().collect::<String>().to_lowercase();
            LETTER_CUES.contains(&prev.as_str())
        };
        let c = chars[s];
        if cued || (c.is_uppercase() && c != 'A' && c != 'I') {
            out.push(ExtractedValue::new(
                chars,
                s,
                e,
                ExtractionSource::SingleLetter,
            ));
        }
    }
    out
}

/// The question with an extraction's span replaced by its text; used by
/// callers that need the raw slice.
pub fn span_text(question: &str, span: (usize, usize)) -> String {
    char_slice(question, span.0, span.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(q: &str) -> Vec<(String, ExtractionSource)> {
        extract_values(q, &[])
            .into_iter()
            .map(|e| (e.text, e.source))
            .collect()
    }

    #[test]
    fn quoted_content() {
        assert_eq!(
            texts("Whose head's name has the substring 'Ha'?"),
            vec![("Ha".to_string(), ExtractionSource::Quoted)]
        );
        assert_eq!(
            texts("Find \"goodbye\" messages"),
            vec![("goodbye".into(), ExtractionSource::Quoted)]
        );
    }

    #[test]
    fn capitalized_runs() {
        assert_eq!(
            texts("Show all flight numbers with aircraft Airbus A340-300."),
            vec![("Airbus A340-300".into(), ExtractionSource::Capitalized)]
        );
        assert_eq!(
            texts("Which flights go to John F Kennedy International Airport?"),
            vec![(
                "John F Kennedy International Airport".into(),
                ExtractionSource::Capitalized
            )]
        );
        assert_eq!(
            texts("Flights to Charles de Gaulle, please"),
            vec![("Charles de Gaulle".into(), ExtractionSource::Capitalized)]
        );
        assert!(texts("What are the names of students?").is_empty());
        assert!(texts("Flights from LAX").iter().all(|(t, _)| t == "LAX"));
        assert_eq!(
            texts("Air France flights"),
            vec![("Air France".into(), ExtractionSource::Capitalized)]
        );
    }

    #[test]
    fn single_letter() {
        assert_eq!(
            texts("Which names does not contain the letter M?"),
            vec![("M".into(), ExtractionSource::SingleLetter)]
        );
        assert!(texts("Is there a pet?").is_empty());
        assert_eq!(
            texts("students in grade b"),
            vec![("b".into(), ExtractionSource::SingleLetter)]
        );
    }

    #[test]
    fn overlaps_keep_the_longest() {
        let q = "Flights to John F Kennedy International Airport";
        let ner = [Entity {
            text: "Kennedy International".into(),
            start: 18,
            end: 39,
            kind: "FAC".into(),
        }];
        let out = extract_values(q, &ner);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].text, "John F Kennedy International Airport");
        let ner = [Entity {
            text: "Flights to John".into(),
            start: 0,
            end: 15,
            kind: "X".into(),
        }];
        let out = extract_values(q, &ner);
        assert!(
            out.iter()
                .all(|e| e.source == ExtractionSource::Capitalized),
            "{out:?}"
        );
        assert_eq!(
            out.last().unwrap().text,
            "John F Kennedy International Airport"
        );
    }

    #[test]
    fn spans_slice_the_question() {
        for q in [
            "Whose head's name has the substring 'Ha'?",
            "Zürich to “Genève Cornavin” on Route B",
            "Which teachers have pupils whose name does not contain the letter M?",
        ] {
            for e in extract_values(q, &[]) {
                assert_eq!(span_text(q, e.span), e.text);
            }
        }
    }
}
