//! Value normalization shared by the index, lookups and candidate validation.

/// Canonical decimal form of a numeric literal, or `None` if `s` is not one.
///
/// Trailing fractional zeros are stripped (`"20.0"` -> `"20"`, `"3.50"` ->
/// `"3.5"`), a leading `+` and redundant leading zeros are dropped. The
/// conversion is purely textual so large integers keep every digit.
pub fn canonical_number(s: &str) -> Option<String> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    if body.is_empty() {
        return None;
    }
    if body.contains(['e', 'E']) {
        let v: f64 = s.parse().ok()?;
        if !v.is_finite() {
            return None;
        }
        return Some(format_f64(v));
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let int_trimmed = int_part.trim_start_matches('0');
    let frac_trimmed = frac_part.trim_end_matches('0');
    let int_str = if int_trimmed.is_empty() {
        "0"
    } else {
        int_trimmed
    };
    let mut out = String::new();
    let is_zero = int_str == "0" && frac_trimmed.is_empty();
    if negative && !is_zero {
        out.push('-');
    }
    out.push_str(int_str);
    if !frac_trimmed.is_empty() {
        out.push('.');
        out.push_str(frac_trimmed);
    }
    Some(out)
}

/// Shortest round-tripping rendering of a float, integers without a point.
pub fn format_f64(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v}");
        canonical_number(&s).unwrap_or(s)
    }
}

pub fn is_numeric(s: &str) -> bool {
    canonical_number(s).is_some()
}

/// Index key for a value: trimmed, internal whitespace collapsed, case-folded;
/// numeric strings replaced by their canonical form.
pub fn normalize_value(s: &str) -> String {
    if let Some(n) = canonical_number(s) {
        return n;
    }
    let collapsed = crate::schema::collapse_whitespace(s);
    collapsed.to_lowercase()
}

/// Whitespace-separated pieces of an already normalized value.
pub fn value_tokens(normalized: &str) -> impl Iterator<Item = &str> {
    normalized.split(' ').filter(|t| !t.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_numbers() {
        assert_eq!(canonical_number("20.0").as_deref(), Some("20"));
        assert_eq!(canonical_number("3.50").as_deref(), Some("3.5"));
        assert_eq!(canonical_number("007").as_deref(), Some("7"));
        assert_eq!(canonical_number("-0.0").as_deref(), Some("0"));
        assert_eq!(canonical_number("+12").as_deref(), Some("12"));
        assert_eq!(canonical_number(".5").as_deref(), Some("0.5"));
        assert_eq!(canonical_number("1e3").as_deref(), Some("1000"));
        assert_eq!(
            canonical_number("12345678901234567890").as_deref(),
            Some("12345678901234567890")
        );
        assert_eq!(canonical_number("20a"), None);
        assert_eq!(canonical_number("-"), None);
        assert_eq!(canonical_number("."), None);
        assert_eq!(canonical_number("8/%"), None);
    }

    #[test]
    fn normalization_folds_case_and_whitespace() {
        assert_eq!(normalize_value("  John  F\tKennedy "), "john f kennedy");
        assert_eq!(normalize_value("FRANCE"), normalize_value("France"));
        assert_eq!(normalize_value("20.0"), "20");
    }

    proptest! {
        #[test]
        fn canonical_number_is_idempotent(i in -1_000_000i64..1_000_000, frac in 0u32..1000, zeros in 0usize..4) {
            let s = format!("{i}.{frac:03}{}", "0".repeat(zeros));
            let once = canonical_number(&s).unwrap();
            prop_assert_eq!(canonical_number(&once).unwrap(), once.clone());
            let parsed: f64 = once.parse().unwrap();
            let original: f64 = s.parse().unwrap();
            prop_assert!((parsed - original).abs() < 1e-9);
        }

        #[test]
        fn normalization_is_idempotent(s in "[ a-zA-Z0-9.]{0,20}") {
            let n = normalize_value(&s);
            prop_assert_eq!(normalize_value(&n), n);
        }
    }
}
