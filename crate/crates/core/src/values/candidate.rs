use serde::{Deserialize, Serialize};

use crate::sql::LiteralKind;
use crate::sqlite::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Origin {
    Verbatim,
    /// A ground-truth value option (light mode).
    LightOption,
    Similarity,
    /// Text primary key of a row whose other column matched ("JFK").
    KeyAlias,
    HeuristicGender,
    HeuristicBoolean,
    HeuristicOrdinal,
    HeuristicMonthWildcard,
    /// Nationality adjective mapped to its country ("French" -> "France").
    HeuristicDemonym,
    /// `1` proposed for a superlative question without an explicit count.
    ImplicitLimit,
    Ngram,
}

impl Origin {
    /// Lower is kept first when the candidate set is capped.
    pub fn priority(self) -> u8 {
        match self {
            Origin::Verbatim | Origin::LightOption => 0,
            Origin::Similarity | Origin::KeyAlias => 1,
            Origin::HeuristicGender
            | Origin::HeuristicBoolean
            | Origin::HeuristicOrdinal
            | Origin::HeuristicMonthWildcard
            | Origin::HeuristicDemonym
            | Origin::ImplicitLimit => 2,
            Origin::Ngram => 3,
        }
    }

    pub fn is_heuristic(self) -> bool {
        self.priority() == 2
    }
}

/// A proposed literal, with where it was found (if anywhere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueCandidate {
    pub surface: String,
    pub origin: Origin,
    /// `(table, column)` where the value was found.
    pub location: Option<(usize, usize)>,
    /// Further locations, used when one candidate stands for several
    /// (light-mode options keep one entry per option).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub other_locations: Vec<(usize, usize)>,
    /// The value as stored in the database, when located.
    pub stored: Option<Cell>,
    pub validated: bool,
    /// Numeric or quoted candidates skip the membership requirement.
    pub exempt: bool,
    /// Kept although a database error prevented validation.
    pub unverified: bool,
    /// Character span in the question this candidate derives from.
    pub span: Option<(usize, usize)>,
    /// Literal kind when known from the source (gold SQL).
    pub literal_kind: Option<LiteralKind>,
    /// Edit distance for similarity candidates.
    pub distance: usize,
}

impl ValueCandidate {
    pub fn new(surface: impl Into<String>, origin: Origin) -> Self {
        ValueCandidate {
            surface: surface.into(),
            origin,
            location: None,
            other_locations: Vec::new(),
            stored: None,
            validated: false,
            exempt: false,
            unverified: false,
            span: None,
            literal_kind: None,
            distance: 0,
        }
    }

    /// A gold literal as a light-mode option, before any index lookup.
    pub fn from_literal(lit: &crate::sql::Literal) -> Self {
        let mut c = ValueCandidate::new(lit.text.clone(), Origin::LightOption);
        c.literal_kind = Some(lit.kind);
        c.exempt = true;
        c
    }

    pub fn with_span(mut self, span: Option<(usize, usize)>) -> Self {
        self.span = span;
        self
    }

    pub fn located_at(&self, table: usize, column: usize) -> bool {
        self.location == Some((table, column)) || self.other_locations.contains(&(table, column))
    }

    pub fn is_located_in_column(&self, column: usize) -> bool {
        self.location.is_some_and(|(_, c)| c == column)
            || self.other_locations.iter().any(|&(_, c)| c == column)
    }

    pub fn locations(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.location
            .into_iter()
            .chain(self.other_locations.iter().copied())
    }

    pub fn is_wildcard(&self) -> bool {
        self.surface.contains('%')
    }
}

/// Candidates in their final order; V payloads index into this list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub candidates: Vec<ValueCandidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&ValueCandidate> {
        self.candidates.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ValueCandidate> {
        self.candidates.iter()
    }

    /// Sort by question span, origin priority, surface and location, then
    /// drop repeated `(surface, location)` pairs.
    pub fn from_unordered(mut candidates: Vec<ValueCandidate>) -> Self {
        candidates.sort_by(|a, b| {
            let ka = (a.span.map_or(usize::MAX, |s| s.0), a.origin.priority());
            let kb = (b.span.map_or(usize::MAX, |s| s.0), b.origin.priority());
            ka.cmp(&kb)
                .then_with(|| a.surface.cmp(&b.surface))
                .then_with(|| a.location.cmp(&b.location))
                .then_with(|| a.distance.cmp(&b.distance))
        });
        let mut out: Vec<ValueCandidate> = Vec::with_capacity(candidates.len());
        for c in candidates {
            if !out
                .iter()
                .any(|o| o.surface == c.surface && o.location == c.location)
            {
                out.push(c);
            }
        }
        CandidateSet { candidates: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_deduplication() {
        let mut a = ValueCandidate::new("France", Origin::Similarity);
        a.span = Some((10, 16));
        a.location = Some((0, 4));
        let mut b = a.clone();
        b.origin = Origin::Verbatim;
        let mut c = ValueCandidate::new("20", Origin::Verbatim);
        c.span = Some((2, 4));
        let d = ValueCandidate::new("1", Origin::ImplicitLimit);
        let set = CandidateSet::from_unordered(vec![d, a, c, b]);
        let surfaces: Vec<(&str, Origin)> =
            set.iter().map(|c| (c.surface.as_str(), c.origin)).collect();
        assert_eq!(
            surfaces,
            vec![
                ("20", Origin::Verbatim),
                ("France", Origin::Verbatim),
                ("1", Origin::ImplicitLimit)
            ]
        );
    }
}
