//! Question hints (what each token refers to) and schema hints (how each
//! table and column is mentioned).

use serde::{Deserialize, Serialize};

use crate::index::ValueIndex;
use crate::normalize::is_numeric;
use crate::schema::DatabaseSchema;
use crate::text::{char_slice, identifier_stems, tokenize, Token};
use crate::values::extract::{extract_values, ExtractionSource};
use crate::values::ValueCandidate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuestionClass {
    Table,
    Column,
    Value,
    Aggregation,
    Superlative,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HintTarget {
    Table {
        table: usize,
    },
    Column {
        column: usize,
    },
    IndexHit {
        table: usize,
        column: usize,
    },
    /// Extraction span in chars; for values not found in the index.
    Span {
        start: usize,
        end: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenHint {
    pub token: Token,
    pub class: QuestionClass,
    pub target: Option<HintTarget>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionAnnotation {
    pub tokens: Vec<TokenHint>,
}

impl QuestionAnnotation {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn classes(&self) -> Vec<QuestionClass> {
        self.tokens.iter().map(|t| t.class).collect()
    }

    pub fn has_class(&self, class: QuestionClass) -> bool {
        self.tokens.iter().any(|t| t.class == class)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemaClass {
    None,
    Partial,
    ValueCandidateMatch,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaAnnotation {
    pub tables: Vec<SchemaClass>,
    /// Indexed like `DatabaseSchema::columns`; the `*` column is always NONE.
    pub columns: Vec<SchemaClass>,
}

/// Phrases classed AGGREGATION as a whole.
const AGG_PHRASES: &[&[&str]] = &[&["how", "many"], &["number", "of"]];
const AGG_WORDS: &[&str] = &[
    "count", "average", "sum", "total", "maximum", "minimum", "most", "least", "highest", "lowest",
    "oldest", "youngest",
];
const SUPERLATIVE_WORDS: &[&str] = &["most", "least", "top", "first", "last", "best", "worst"];
/// Words ending in -est that are not superlatives.
const EST_EXCEPTIONS: &[&str] = &[
    "interest",
    "forest",
    "west",
    "test",
    "request",
    "guest",
    "rest",
    "nest",
    "chest",
    "contest",
    "honest",
    "suggest",
    "modest",
    "protest",
    "harvest",
    "digest",
    "invest",
    "arrest",
    "quest",
    "manifest",
    "pest",
    "vest",
    "zest",
    "crest",
    "earnest",
    "priest",
    "conquest",
    "inquest",
    "midwest",
    "southwest",
    "northwest",
    "interest",
    "everest",
    "budapest",
    "bucharest",
    "attest",
    "detest",
    "infest",
    "arbest",
];
/// Never matched as a schema item or value on their own.
const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "by", "to", "for", "from", "with", "and", "or", "is",
    "are", "was", "were", "be", "has", "have", "had", "do", "does", "did", "what", "which", "who",
    "whose", "how", "that", "this", "it", "its", "as", "all", "each", "there", "their", "than",
    "s", "me", "show", "list", "find", "give", "return", "many", "any", "not", "no",
];

pub fn is_stopword(lower: &str) -> bool {
    STOPWORDS.contains(&lower)
}

pub fn is_superlative_word(lower: &str) -> bool {
    SUPERLATIVE_WORDS.contains(&lower)
        || (lower.len() >= 5 && lower.ends_with("est") && !EST_EXCEPTIONS.contains(&lower))
}

pub fn is_aggregation_word(lower: &str) -> bool {
    AGG_WORDS.contains(&lower)
}

/// Stem sequences under which each schema item can be mentioned: its
/// identifier split on underscores and humps, and its display name.
#[derive(Debug, Clone)]
pub struct SchemaLexicon {
    pub tables: Vec<Vec<Vec<String>>>,
    pub columns: Vec<Vec<Vec<String>>>,
}

impl SchemaLexicon {
    pub fn new(schema: &DatabaseSchema) -> Self {
        let variants = |name: &str, display: &str| {
            let mut v = vec![identifier_stems(name)];
            let d: Vec<String> = tokenize(display).into_iter().map(|t| t.stem).collect();
            if !v.contains(&d) {
                v.push(d);
            }
            v.retain(|s| !s.is_empty());
            v
        };
        SchemaLexicon {
            tables: schema
                .tables
                .iter()
                .map(|t| variants(&t.name, &t.display))
                .collect(),
            columns: schema
                .columns
                .iter()
                .map(|c| {
                    if c.is_star() {
                        Vec::new()
                    } else {
                        variants(&c.name, &c.display)
                    }
                })
                .collect(),
        }
    }
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

struct Match {
    start: usize,
    len: usize,
    /// Tables sort before columns at equal span.
    item: (u8, usize),
}

pub fn annotate_question(
    question: &str,
    schema: &DatabaseSchema,
    index: &ValueIndex,
) -> QuestionAnnotation {
    let tokens = tokenize(question);
    let n = tokens.len();
    let mut hints: Vec<(QuestionClass, Option<HintTarget>)> = vec![(QuestionClass::None, None); n];
    let free = |h: &[(QuestionClass, Option<HintTarget>)], s: usize, e: usize| {
        h[s..e].iter().all(|(c, _)| *c == QuestionClass::None)
    };
    let tokens_in = |span: (usize, usize)| -> Vec<usize> {
        (0..n)
            .filter(|&i| tokens[i].start < span.1 && span.0 < tokens[i].end)
            .collect()
    };

    // Quoted text, and extractions found verbatim in the index, are values
    // before anything else.
    let extractions = extract_values(question, &[]);
    let mut deferred = Vec::new();
    for e in &extractions {
        let hit = index.lookup_exact(&e.text).first();
        let target = match hit {
            Some(l) => HintTarget::IndexHit {
                table: l.table,
                column: l.column,
            },
            None => HintTarget::Span {
                start: e.span.0,
                end: e.span.1,
            },
        };
        if e.source == ExtractionSource::Quoted || hit.is_some() {
            for i in tokens_in(e.span) {
                hints[i] = (QuestionClass::Value, Some(target));
            }
        } else {
            deferred.push((e.span, target));
        }
    }

    for phrase in AGG_PHRASES {
        for s in 0..n.saturating_sub(phrase.len() - 1) {
            let e = s + phrase.len();
            if free(&hints, s, e)
                && tokens[s..e]
                    .iter()
                    .zip(phrase.iter())
                    .all(|(t, w)| t.lower == *w)
            {
                for h in &mut hints[s..e] {
                    h.0 = QuestionClass::Aggregation;
                }
            }
        }
    }

    let lex = SchemaLexicon::new(schema);
    let stems: Vec<String> = tokens.iter().map(|t| t.stem.clone()).collect();
    let mut matches = Vec::new();
    let items = lex
        .tables
        .iter()
        .enumerate()
        .map(|(i, v)| ((0u8, i), v))
        .chain(lex.columns.iter().enumerate().map(|(i, v)| ((1u8, i), v)));
    for (item, variants) in items {
        for v in variants {
            for s in 0..(n + 1).saturating_sub(v.len()) {
                if stems[s..s + v.len()] == v[..]
                    && !(v.len() == 1 && is_stopword(&tokens[s].lower))
                {
                    matches.push(Match {
                        start: s,
                        len: v.len(),
                        item,
                    });
                }
            }
        }
    }
    matches.sort_by(|a, b| {
        b.len
            .cmp(&a.len)
            .then(a.start.cmp(&b.start))
            .then(a.item.cmp(&b.item))
    });
    for m in matches {
        let (s, e) = (m.start, m.start + m.len);
        if !free(&hints, s, e) {
            continue;
        }
        let (class, target) = match m.item {
            (0, t) => (QuestionClass::Table, HintTarget::Table { table: t }),
            (_, c) => (QuestionClass::Column, HintTarget::Column { column: c }),
        };
        for h in &mut hints[s..e] {
            *h = (class, Some(target));
        }
    }

    for (i, t) in tokens.iter().enumerate() {
        if hints[i].0 != QuestionClass::None {
            continue;
        }
        if is_superlative_word(&t.lower) {
            hints[i].0 = QuestionClass::Superlative;
        } else if is_aggregation_word(&t.lower) {
            hints[i].0 = QuestionClass::Aggregation;
        }
    }

    for (span, target) in deferred {
        for i in tokens_in(span) {
            if hints[i].0 == QuestionClass::None {
                hints[i] = (QuestionClass::Value, Some(target));
            }
        }
    }

    // Remaining runs of up to four tokens found in the index, longest first;
    // bare numbers are values even when absent from the database.
    for len in (1..=4.min(n)).rev() {
        for s in 0..=(n - len) {
            let e = s + len;
            if !free(&hints, s, e) || (len == 1 && is_stopword(&tokens[s].lower)) {
                continue;
            }
            if tokens[s..e].iter().all(|t| is_stopword(&t.lower)) {
                continue;
            }
            let text = char_slice(question, tokens[s].start, tokens[e - 1].end);
            let target = match index.lookup_exact(&text).first() {
                Some(l) => Some(HintTarget::IndexHit {
                    table: l.table,
                    column: l.column,
                }),
                None if len == 1 && is_numeric(&text) => Some(HintTarget::Span {
                    start: tokens[s].start,
                    end: tokens[s].end,
                }),
                None => None,
            };
            if let Some(target) = target {
                for h in &mut hints[s..e] {
                    *h = (QuestionClass::Value, Some(target));
                }
            }
        }
    }

    QuestionAnnotation {
        tokens: tokens
            .into_iter()
            .zip(hints)
            .map(|(token, (class, target))| TokenHint {
                token,
                class,
                target,
            })
            .collect(),
    }
}

pub fn annotate_schema(
    question: &str,
    schema: &DatabaseSchema,
    validated: &[ValueCandidate],
) -> SchemaAnnotation {
    let lex = SchemaLexicon::new(schema);
    let tokens = tokenize(question);
    let stems: Vec<String> = tokens.iter().map(|t| t.stem.clone()).collect();
    let content: Vec<&String> = tokens
        .iter()
        .filter(|t| !is_stopword(&t.lower))
        .map(|t| &t.stem)
        .collect();
    let classify = |variants: &[Vec<String>]| {
        if variants.iter().any(|v| contains_run(&stems, v)) {
            SchemaClass::Exact
        } else if variants.iter().flatten().any(|s| content.contains(&s)) {
            SchemaClass::Partial
        } else {
            SchemaClass::None
        }
    };
    let tables = lex.tables.iter().map(|v| classify(v)).collect();
    let mut columns: Vec<SchemaClass> = lex.columns.iter().map(|v| classify(v)).collect();
    for c in validated.iter().filter(|c| c.validated) {
        for (_, col) in c.locations() {
            if let Some(slot) = columns.get_mut(col) {
                if *slot != SchemaClass::Exact {
                    *slot = SchemaClass::ValueCandidateMatch;
                }
            }
        }
    }
    SchemaAnnotation { tables, columns }
}
