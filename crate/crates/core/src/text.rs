//! Question tokenization, stemming and number words.

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

/// A word of the question. Offsets are in chars, end exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub lower: String,
    pub stem: String,
}

/// Maximal alphanumeric runs, each stemmed with the English Snowball stemmer.
pub fn tokenize(text: &str) -> Vec<Token> {
    let stemmer = Stemmer::create(Algorithm::English);
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let flush = |cur: &mut String, start: usize, end: usize, out: &mut Vec<Token>| {
        if cur.is_empty() {
            return;
        }
        let lower = cur.to_lowercase();
        let stem = stemmer.stem(&lower).into_owned();
        out.push(Token {
            text: std::mem::take(cur),
            start,
            end,
            lower,
            stem,
        });
    };
    let mut n = 0;
    for (i, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            if cur.is_empty() {
                start = i;
            }
            cur.push(ch);
        } else {
            flush(&mut cur, start, i, &mut out);
        }
        n = i + 1;
    }
    flush(&mut cur, start, n, &mut out);
    out
}

/// Stems of an identifier: underscores and camel-case humps split it.
pub fn identifier_stems(ident: &str) -> Vec<String> {
    let stemmer = Stemmer::create(Algorithm::English);
    split_identifier(ident)
        .into_iter()
        .map(|w| stemmer.stem(&w).into_owned())
        .collect()
}

fn split_identifier(ident: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = ident.chars().collect();
    for (i, &ch) in chars.iter().enumerate() {
        if !ch.is_alphanumeric() {
            if !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
            continue;
        }
        let hump = ch.is_uppercase()
            && i > 0
            && (chars[i - 1].is_lowercase()
                || (chars[i - 1].is_uppercase()
                    && chars.get(i + 1).is_some_and(|c| c.is_lowercase())));
        if hump && !cur.is_empty() {
            words.push(std::mem::take(&mut cur));
        }
        cur.extend(ch.to_lowercase());
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
}

/// Substring of `s` by char offsets.
pub fn char_slice(s: &str, start: usize, end: usize) -> String {
    s.chars()
        .skip(start)
        .take(end.saturating_sub(start))
        .collect()
}

const UNITS: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];
const ORDINAL_UNITS: [&str; 20] = [
    "zeroth",
    "first",
    "second",
    "third",
    "fourth",
    "fifth",
    "sixth",
    "seventh",
    "eighth",
    "ninth",
    "tenth",
    "eleventh",
    "twelfth",
    "thirteenth",
    "fourteenth",
    "fifteenth",
    "sixteenth",
    "seventeenth",
    "eighteenth",
    "nineteenth",
];
const ORDINAL_TENS: [&str; 10] = [
    "",
    "",
    "twentieth",
    "thirtieth",
    "fortieth",
    "fiftieth",
    "sixtieth",
    "seventieth",
    "eightieth",
    "ninetieth",
];

/// Value of a cardinal word ("twenty" -> 20). Hyphenated compounds such as
/// "twenty-one" arrive as two tokens; see [`number_phrase`].
pub fn cardinal_word(w: &str) -> Option<u32> {
    let w = w.to_lowercase();
    if let Some(i) = UNITS.iter().position(|u| *u == w) {
        return Some(i as u32);
    }
    if let Some(i) = TENS.iter().position(|t| !t.is_empty() && *t == w) {
        return Some(i as u32 * 10);
    }
    match w.as_str() {
        "hundred" => Some(100),
        "thousand" => Some(1000),
        "dozen" => Some(12),
        _ => None,
    }
}

/// Value of an ordinal word or suffixed numeral ("fourth", "4th").
pub fn ordinal_word(w: &str) -> Option<u32> {
    let w = w.to_lowercase();
    if let Some(i) = ORDINAL_UNITS.iter().position(|u| *u == w) {
        return Some(i as u32);
    }
    if let Some(i) = ORDINAL_TENS.iter().position(|t| !t.is_empty() && *t == w) {
        return Some(i as u32 * 10);
    }
    for suffix in ["st", "nd", "rd", "th"] {
        if let Some(d) = w.strip_suffix(suffix) {
            if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) {
                return d.parse().ok();
            }
        }
    }
    None
}

/// A number spelled over one or two tokens starting at `i`: returns the
/// value, whether it was an ordinal, and how many tokens it used.
pub fn number_phrase(tokens: &[Token], i: usize) -> Option<(u32, bool, usize)> {
    let t = &tokens[i];
    let tens = TENS.iter().position(|x| !x.is_empty() && *x == t.lower);
    if let (Some(tens), Some(next)) = (tens, tokens.get(i + 1)) {
        // "twenty-one" or "twenty one", nothing further apart.
        if next.start == t.end + 1 {
            if let Some(u) = cardinal_word(&next.lower).filter(|u| (1..10).contains(u)) {
                return Some((tens as u32 * 10 + u, false, 2));
            }
            if let Some(u) = ordinal_word(&next.lower).filter(|u| (1..10).contains(u)) {
                return Some((tens as u32 * 10 + u, true, 2));
            }
        }
    }
    if let Some(v) = ordinal_word(&t.lower) {
        return Some((v, true, 1));
    }
    cardinal_word(&t.lower).map(|v| (v, false, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_carry_char_offsets_and_stems() {
        let q = "How many pets are owned by French students?";
        let toks = tokenize(q);
        let words: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(
            words,
            ["How", "many", "pets", "are", "owned", "by", "French", "students"]
        );
        assert_eq!(toks[2].stem, "pet");
        assert_eq!(toks[7].stem, "student");
        for t in &toks {
            assert_eq!(char_slice(q, t.start, t.end), t.text);
        }
        let multi = tokenize("Zürich's café");
        assert_eq!(multi[0].text, "Zürich");
        assert_eq!((multi[2].start, multi[2].end), (9, 13));
    }

    #[test]
    fn identifiers_split_on_underscores_and_humps() {
        assert_eq!(split_identifier("home_country"), ["home", "country"]);
        assert_eq!(split_identifier("PetType"), ["pet", "type"]);
        assert_eq!(split_identifier("StuID"), ["stu", "id"]);
        assert_eq!(split_identifier("Has_Pet"), ["has", "pet"]);
        assert_eq!(identifier_stems("Students"), ["student"]);
    }

    #[test]
    fn number_words() {
        assert_eq!(cardinal_word("twenty"), Some(20));
        assert_eq!(ordinal_word("fourth"), Some(4));
        assert_eq!(ordinal_word("21st"), Some(21));
        assert_eq!(ordinal_word("first"), Some(1));
        let toks = tokenize("the twenty-first and twenty one");
        assert_eq!(number_phrase(&toks, 1), Some((21, true, 2)));
        assert_eq!(number_phrase(&toks, 4), Some((21, false, 2)));
        let apart = tokenize("twenty, one");
        assert_eq!(number_phrase(&apart, 0), Some((20, false, 1)));
        let grade = tokenize("fourth-grade");
        assert_eq!(number_phrase(&grade, 0), Some((4, true, 1)));
    }
}
