//! Normalized edit-distance similarity on a 0–100 scale.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A similarity percentage in `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const MAX: SimilarityScore = SimilarityScore(100.0);
    pub const MIN: SimilarityScore = SimilarityScore(0.0);

    /// Clamps `value` into `[0, 100]`. NaN maps to 0.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            return Self::MIN;
        }
        SimilarityScore(value.clamp(0.0, 100.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<SimilarityScore> for f64 {
    fn from(s: SimilarityScore) -> f64 {
        s.0
    }
}

impl fmt::Display for SimilarityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.0)
    }
}

/// Lowercases and drops every character that is not a letter or digit.
pub fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    // keep the shorter string in the row
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }

    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut curr = vec![0usize; short.len() + 1];
    for (i, lc) in long.iter().enumerate() {
        curr[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let substitution = prev[j] + usize::from(lc != sc);
            let deletion = prev[j + 1] + 1;
            let insertion = curr[j] + 1;
            curr[j + 1] = substitution.min(deletion).min(insertion);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// `100 * (1 - lev(a, b) / max(|a|, |b|))`, with two empty strings scoring 100.
///
/// Inputs are expected to be passed through [`normalize`] first; lengths are
/// counted in characters.
pub fn similarity(a: &str, b: &str) -> SimilarityScore {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return SimilarityScore::MAX;
    }
    let distance = levenshtein_chars(&a, &b);
    SimilarityScore::new(100.0 * (1.0 - distance as f64 / longest as f64))
}

/// Normalizes both sides, then scores them.
pub fn normalized_similarity(a: &str, b: &str) -> SimilarityScore {
    similarity(&normalize(a), &normalize(b))
}
