//! Candidate generation: verbatim extractions, similar indexed values,
//! handcrafted heuristics and n-grams.

use crate::distance::ThresholdPolicy;
use crate::hints::{HintTarget, QuestionAnnotation, QuestionClass};
use crate::index::ValueIndex;
use crate::normalize::is_numeric;
use crate::text::{char_slice, number_phrase};

use super::candidate::{Origin, ValueCandidate};
use super::extract::{ExtractedValue, ExtractionSource};

const FEMALE: &[&str] = &[
    "female", "females", "woman", "women", "girl", "girls", "lady", "ladies",
];
const MALE: &[&str] = &[
    "male",
    "males",
    "man",
    "men",
    "boy",
    "boys",
    "gentleman",
    "gentlemen",
];
const TRUE_CUES: &[&str] = &[
    "yes",
    "true",
    "active",
    "enabled",
    "available",
    "open",
    "valid",
    "approved",
];
const FALSE_CUES: &[&str] = &[
    "no",
    "false",
    "inactive",
    "disabled",
    "unavailable",
    "closed",
    "invalid",
];
const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];
const DEMONYMS: &[(&str, &[&str])] = &[
    ("american", &["United States", "USA", "US"]),
    ("argentine", &["Argentina"]),
    ("argentinian", &["Argentina"]),
    ("australian", &["Australia"]),
    ("austrian", &["Austria"]),
    ("belgian", &["Belgium"]),
    ("brazilian", &["Brazil"]),
    ("british", &["United Kingdom", "UK"]),
    ("canadian", &["Canada"]),
    ("chinese", &["China"]),
    ("danish", &["Denmark"]),
    ("dutch", &["Netherlands"]),
    ("egyptian", &["Egypt"]),
    ("english", &["England"]),
    ("finnish", &["Finland"]),
    ("french", &["France"]),
    ("german", &["Germany"]),
    ("greek", &["Greece"]),
    ("hungarian", &["Hungary"]),
    ("indian", &["India"]),
    ("irish", &["Ireland"]),
    ("italian", &["Italy"]),
    ("japanese", &["Japan"]),
    ("kenyan", &["Kenya"]),
    ("korean", &["Korea", "South Korea"]),
    ("mexican", &["Mexico"]),
    ("nigerian", &["Nigeria"]),
    ("norwegian", &["Norway"]),
    ("polish", &["Poland"]),
    ("portuguese", &["Portugal"]),
    ("russian", &["Russia"]),
    ("scottish", &["Scotland"]),
    ("spanish", &["Spain"]),
    ("swedish", &["Sweden"]),
    ("swiss", &["Switzerland"]),
    ("turkish", &["Turkey"]),
    ("welsh", &["Wales"]),
];

/// Words of an extraction with their char spans in the question.
fn extraction_words(v: &ExtractedValue) -> Vec<(String, (usize, usize))> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for (i, ch) in v.text.chars().enumerate() {
        if ch.is_whitespace() {
            if !cur.is_empty() {
                out.push((std::mem::take(&mut cur), (v.span.0 + start, v.span.0 + i)));
            }
        } else {
            if cur.is_empty() {
                start = i;
            }
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        let n = v.text.chars().count();
        out.push((cur, (v.span.0 + start, v.span.0 + n)));
    }
    out
}

/// Every contiguous n-gram of the extraction's words, longest first and
/// including the full string: k words give k(k+1)/2 grams.
pub fn all_ngrams(v: &ExtractedValue) -> Vec<(String, (usize, usize))> {
    let words = extraction_words(v);
    let k = words.len();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for n in (1..=k).rev() {
        for w in words.windows(n) {
            let text = w
                .iter()
                .map(|(t, _)| t.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            out.push((text, (w[0].1 .0, w[n - 1].1 .1)));
        }
    }
    out
}

/// The n-grams of a multi-word extraction other than the extraction itself.
pub fn ngram_expand(v: &ExtractedValue) -> Vec<String> {
    all_ngrams(v).into_iter().skip(1).map(|(t, _)| t).collect()
}

fn candidate(surface: impl Into<String>, origin: Origin, span: (usize, usize)) -> ValueCandidate {
    let mut c = ValueCandidate::new(surface, origin).with_span(Some(span));
    c.exempt = is_numeric(&c.surface);
    c
}

/// Unvalidated candidates for one question. Similarity hits carry the
/// location they were found at; everything else is located by validation.
pub fn generate_candidates(
    question: &str,
    extracted: &[ExtractedValue],
    annotation: &QuestionAnnotation,
    index: &ValueIndex,
    threshold: &ThresholdPolicy,
) -> Vec<ValueCandidate> {
    let mut out = Vec::new();
    for e in extracted {
        let mut v = candidate(e.text.clone(), Origin::Verbatim, e.span);
        v.exempt |= e.source == ExtractionSource::Quoted;
        out.push(v);
        for hit in index.similarity_search(&e.text, threshold) {
            let mut c = candidate(hit.location.surface(), Origin::Similarity, e.span);
            c.location = Some((hit.location.table, hit.location.column));
            c.stored = Some(hit.location.raw.clone());
            c.distance = hit.distance;
            out.push(c);
        }
        for (text, span) in all_ngrams(e).into_iter().skip(1) {
            out.push(candidate(text, Origin::Ngram, span));
        }
    }

    // Value-classed tokens outside every extraction, grouped by target.
    let covered = |start: usize| {
        extracted
            .iter()
            .any(|e| e.span.0 <= start && start < e.span.1)
    };
    let mut i = 0;
    let toks = &annotation.tokens;
    while i < toks.len() {
        if toks[i].class != QuestionClass::Value || covered(toks[i].token.start) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < toks.len()
            && toks[j].class == QuestionClass::Value
            && toks[j].target == toks[i].target
        {
            j += 1;
        }
        let span = (toks[i].token.start, toks[j - 1].token.end);
        let mut c = candidate(char_slice(question, span.0, span.1), Origin::Verbatim, span);
        if let Some(HintTarget::IndexHit { table, column }) = toks[i].target {
            c.location = Some((table, column));
        }
        out.push(c);
        i = j;
    }

    out.extend(heuristic_candidates(annotation));
    out
}

fn heuristic_candidates(annotation: &QuestionAnnotation) -> Vec<ValueCandidate> {
    let toks: Vec<_> = annotation.tokens.iter().map(|t| t.token.clone()).collect();
    let mut out = Vec::new();
    let mut skip_until = 0;
    for (i, hint) in annotation.tokens.iter().enumerate() {
        let t = &hint.token;
        let span = (t.start, t.end);
        let w = t.lower.as_str();
        let mut push = |s: &str, o: Origin| out.push(candidate(s, o, span));
        if FEMALE.contains(&w) {
            push("F", Origin::HeuristicGender);
            push("female", Origin::HeuristicGender);
        } else if MALE.contains(&w) {
            push("M", Origin::HeuristicGender);
            push("male", Origin::HeuristicGender);
        }
        if TRUE_CUES.contains(&w) {
            push("1", Origin::HeuristicBoolean);
            push("true", Origin::HeuristicBoolean);
        } else if FALSE_CUES.contains(&w) {
            push("0", Origin::HeuristicBoolean);
            push("false", Origin::HeuristicBoolean);
        }
        if let Some(m) = MONTHS.iter().position(|m| *m == w) {
            // "may" is far more often the verb.
            if w != "may" || t.text.starts_with('M') {
                let n = m + 1;
                push(&format!("{n}/%"), Origin::HeuristicMonthWildcard);
                push(&format!("%-{n:02}-%"), Origin::HeuristicMonthWildcard);
                push(&t.text, Origin::HeuristicMonthWildcard);
            }
        }
        if let Some((_, countries)) = DEMONYMS.iter().find(|(d, _)| *d == w) {
            for c in *countries {
                push(c, Origin::HeuristicDemonym);
            }
        }
        if i >= skip_until && matches!(hint.class, QuestionClass::None | QuestionClass::Superlative)
        {
            if let Some((v, _, used)) = number_phrase(&toks, i) {
                let end = toks[i + used - 1].end;
                out.push(candidate(
                    v.to_string(),
                    Origin::HeuristicOrdinal,
                    (t.start, end),
                ));
                skip_until = i + used;
            }
        }
    }
    if annotation.has_class(QuestionClass::Superlative) {
        let mut one = ValueCandidate::new("1", Origin::ImplicitLimit);
        one.exempt = true;
        out.push(one);
    }
    out
}
