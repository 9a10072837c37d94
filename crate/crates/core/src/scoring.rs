//! Composite confidence, penalties, the multi-source bonus, and verdicts.

use crate::matching::{Issue, IssueCode, MatchEvaluation};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

pub const TITLE_MISMATCH_PENALTY: i32 = -20;
pub const AUTHOR_MISMATCH_PENALTY: i32 = -20;
pub const NOT_FOUND_PENALTY: i32 = -20;
/// Added when at least two authors are confirmed by every contributing source.
pub const MULTI_SOURCE_BONUS: f64 = 10.0;

/// Below this pre-penalty confidence the fallback sources are consulted.
pub const FALLBACK_THRESHOLD: f64 = 70.0;
/// Strictly above this a reference exists.
pub const EXISTS_THRESHOLD: f64 = 50.0;
/// Strictly above this a reference is verified.
pub const VERIFIED_THRESHOLD: f64 = 80.0;
/// The "high matching" gate of the four-way average for BibTeX input.
pub const STRUCTURED_GATE: f64 = 80.0;

/// −20 for a badly wrong venue, −10 otherwise.
pub fn journal_penalty(s_journal: f64) -> i32 {
    if s_journal < 50.0 {
        -20
    } else {
        -10
    }
}

/// −10 for a one-year drift (preprint vs. print), −15 beyond that.
pub fn year_penalty(query: i32, found: i32) -> i32 {
    if (query - found).abs() <= 1 {
        -10
    } else {
        -15
    }
}

/// −20 when two or more sources lack the name, −10 otherwise.
pub fn fake_author_penalty(flagged_by: usize) -> i32 {
    if flagged_by >= 2 {
        -20
    } else {
        -10
    }
}

/// Pre-penalty confidence of an evaluation.
///
/// * BibTeX input with every component at least 80: the four-way average.
/// * Otherwise, title above 80 but authors below 90:
///   `s_title - 0.5 * (100 - s_author)`.
/// * Otherwise the four-way average.
pub fn base_confidence(eval: &MatchEvaluation, structured: bool) -> f64 {
    let t = eval.s_title.value();
    let a = eval.s_author.value();
    match base_branch(eval, structured) {
        BaseBranch::AuthorWeighted => t - 0.5 * (100.0 - a),
        BaseBranch::StructuredAverage | BaseBranch::Average => {
            (t + a + eval.s_journal.value() + eval.s_year.value()) / 4.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BaseBranch {
    StructuredAverage,
    AuthorWeighted,
    Average,
}

pub(crate) fn base_branch(eval: &MatchEvaluation, structured: bool) -> BaseBranch {
    let scores = [eval.s_title, eval.s_author, eval.s_journal, eval.s_year];
    if structured && scores.iter().all(|s| s.value() >= STRUCTURED_GATE) {
        BaseBranch::StructuredAverage
    } else if eval.s_title.value() > 80.0 && eval.s_author.value() < 90.0 {
        BaseBranch::AuthorWeighted
    } else {
        BaseBranch::Average
    }
}

/// Adds every issue's penalty to `base`, flooring at 0.
pub fn apply_penalties(base: f64, issues: &[Issue]) -> f64 {
    let total: i32 = issues.iter().map(|i| i.penalty).sum();
    (base + f64::from(total)).max(0.0)
}

/// 10 when at least two authors were confirmed, else 0.
pub fn multi_source_bonus(confirmed_authors: &BTreeSet<String>) -> f64 {
    if confirmed_authors.len() >= 2 {
        MULTI_SOURCE_BONUS
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedPenalty {
    pub code: IssueCode,
    pub penalty: i32,
}

/// Final confidence with its breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    /// `clamp(pre_penalty + bonus_applied + Σ penalties, 0, 100)`.
    pub value: f64,
    pub pre_penalty: f64,
    pub bonus_applied: f64,
    pub penalties_applied: Vec<AppliedPenalty>,
}

impl Confidence {
    pub fn compute(pre_penalty: f64, bonus: f64, issues: &[Issue]) -> Self {
        let bonus = bonus.clamp(0.0, MULTI_SOURCE_BONUS);
        let penalties_applied: Vec<AppliedPenalty> = issues
            .iter()
            .map(|i| AppliedPenalty {
                code: i.code,
                penalty: i.penalty,
            })
            .collect();
        let total: i32 = penalties_applied.iter().map(|p| p.penalty).sum();
        let raw = pre_penalty + bonus + f64::from(total);
        Confidence {
            value: if raw.is_nan() { 0.0 } else { raw.clamp(0.0, 100.0) },
            pre_penalty,
            bonus_applied: bonus,
            penalties_applied,
        }
    }

    pub fn zero() -> Self {
        Confidence::compute(0.0, 0.0, &[])
    }
}

/// Ordered `NotFound < PartialMatch < Verified`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NotFound,
    PartialMatch,
    Verified,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Verified => "VERIFIED",
            Verdict::PartialMatch => "PARTIAL MATCH",
            Verdict::NotFound => "NOT FOUND",
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Verdict::Verified => '✔',
            Verdict::PartialMatch => '~',
            Verdict::NotFound => '✘',
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Not found at or below 50 (or with no candidates), verified above 80,
/// partial in between.
pub fn classify(confidence: f64, candidates_found: bool) -> Verdict {
    if !candidates_found || confidence <= EXISTS_THRESHOLD {
        Verdict::NotFound
    } else if confidence > VERIFIED_THRESHOLD {
        Verdict::Verified
    } else {
        Verdict::PartialMatch
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::SimilarityScore;
    use proptest::prelude::*;

    fn eval(t: f64, a: f64, j: f64, y: f64) -> MatchEvaluation {
        MatchEvaluation {
            s_title: SimilarityScore::new(t),
            s_author: SimilarityScore::new(a),
            s_journal: SimilarityScore::new(j),
            s_year: SimilarityScore::new(y),
            matched_authors: vec![],
            fake_author_tokens: vec![],
            issues: vec![],
        }
    }

    #[test]
    fn base_branches() {
        assert_eq!(base_confidence(&eval(90.0, 80.0, 100.0, 100.0), false), 80.0);
        assert_eq!(base_confidence(&eval(100.0, 100.0, 100.0, 100.0), true), 100.0);
        assert_eq!(base_confidence(&eval(85.0, 95.0, 70.0, 100.0), false), 87.5);
        // the structured average needs every component at 80 or more
        assert_eq!(base_confidence(&eval(90.0, 80.0, 80.0, 100.0), true), 87.5);
        assert_eq!(base_confidence(&eval(90.0, 70.0, 80.0, 100.0), true), 75.0);
    }

    #[test]
    fn penalty_arithmetic() {
        assert_eq!(apply_penalties(90.0, &[Issue::author_mismatch(SimilarityScore::new(50.0))]), 70.0);
        assert_eq!(apply_penalties(15.0, &[Issue::title_mismatch(SimilarityScore::new(10.0))]), 0.0);
        let issues = [
            Issue::journal_discrepancy(SimilarityScore::new(60.0), "a", "b"),
            Issue::fake_author("Ghost", 1),
        ];
        assert_eq!(apply_penalties(88.0, &issues), 68.0);
    }

    #[test]
    fn bonus_gate() {
        let set = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(multi_source_bonus(&set(&["doe", "roe"])), 10.0);
        assert_eq!(multi_source_bonus(&set(&["doe"])), 0.0);
        assert_eq!(multi_source_bonus(&set(&[])), 0.0);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(85.0, true), Verdict::Verified);
        assert_eq!(classify(75.0, true), Verdict::PartialMatch);
        assert_eq!(classify(50.0, true), Verdict::NotFound);
        assert_eq!(classify(99.0, false), Verdict::NotFound);
    }

    #[test]
    fn clamps_above_100() {
        let c = Confidence::compute(100.0, 10.0, &[]);
        assert_eq!(c.value, 100.0);
        assert_eq!(c.bonus_applied, 10.0);
    }

    proptest! {
        #[test]
        fn base_is_monotone(t in 0.0..=100.0f64, a in 0.0..=100.0f64, j in 0.0..=100.0f64,
                            y in 0.0..=100.0f64, bump in 0.0..=30.0f64, which in 0usize..4,
                            structured: bool) {
            let before = [t, a, j, y];
            let mut after = before;
            after[which] = (after[which] + bump).min(100.0);
            let e0 = eval(before[0], before[1], before[2], before[3]);
            let e1 = eval(after[0], after[1], after[2], after[3]);
            // the formula is piecewise; crossing a branch boundary can drop the score
            prop_assume!(base_branch(&e0, structured) == base_branch(&e1, structured));
            let (b0, b1) = (base_confidence(&e0, structured), base_confidence(&e1, structured));
            prop_assert!(b1 + 1e-9 >= b0, "{before:?} -> {after:?}: {b0} > {b1}");
        }

        #[test]
        fn bonus_never_lowers_the_verdict(pre in 0.0..=100.0f64, n_issues in 0usize..4) {
            let issues: Vec<Issue> = (0..n_issues).map(|_| Issue::fake_author("X", 1)).collect();
            let without = Confidence::compute(pre, 0.0, &issues);
            let with = Confidence::compute(pre, 10.0, &issues);
            prop_assert!(classify(with.value, true) >= classify(without.value, true));
        }
    }
}
