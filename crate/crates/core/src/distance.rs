//! Damerau-Levenshtein distance in its optimal-string-alignment form.
//!
//! OSA counts substitutions, insertions, deletions and transpositions of
//! adjacent characters, but never edits a substring twice. It is therefore
//! not a metric: `d("ca", "abc") = 3` while `d("ca", "ac") + d("ac", "abc") = 2`.

/// Edit distance over Unicode scalar values.
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    osa(&a, &b, usize::MAX).unwrap_or(usize::MAX)
}

/// Like [`damerau_levenshtein`], but gives up with `None` as soon as the
/// distance is known to exceed `max`.
pub fn damerau_levenshtein_bounded(a: &[char], b: &[char], max: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > max {
        return None;
    }
    osa(a, b, max)
}

fn osa(a: &[char], b: &[char], max: usize) -> Option<usize> {
    let (n, m) = (a.len(), b.len());
    if n == 0 {
        return (m <= max).then_some(m);
    }
    if m == 0 {
        return (n <= max).then_some(n);
    }
    // Three rolling rows: i-2, i-1, i.
    let mut prev2 = vec![0usize; m + 1];
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur = vec![0usize; m + 1];
    for i in 1..=n {
        cur[0] = i;
        let mut row_min = cur[0];
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut d = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                d = d.min(prev2[j - 2] + 1);
            }
            cur[j] = d;
            row_min = row_min.min(d);
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[m];
    (d <= max).then_some(d)
}

/// Maximum tolerated distance as a function of the probe length (in chars).
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ThresholdPolicy {
    /// 0 up to 3 chars, 1 for 4-6, 2 for 7-10, 3 beyond.
    #[default]
    LengthScaled,
    Fixed(usize),
}

impl ThresholdPolicy {
    pub fn threshold(&self, probe_len: usize) -> usize {
        match *self {
            ThresholdPolicy::Fixed(t) => t,
            ThresholdPolicy::LengthScaled => match probe_len {
                0..=3 => 0,
                4..=6 => 1,
                7..=10 => 2,
                _ => 3,
            },
        }
    }
}
