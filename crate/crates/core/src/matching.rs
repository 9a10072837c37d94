//! Candidate evaluation: title, author, venue and year similarity, plus
//! detection of author names in the query that no source knows about.

use crate::bibtex::Reference;
use crate::error::{Error, Result};
use crate::record::{Author, CandidateRecord};
use crate::scoring;
use crate::similarity::{normalize, similarity, SimilarityScore};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Title similarity below this raises [`IssueCode::TitleMismatch`].
pub const TITLE_THRESHOLD: f64 = 80.0;
/// Author similarity below this raises [`IssueCode::AuthorMismatch`].
pub const AUTHOR_THRESHOLD: f64 = 90.0;
/// Venue similarity below this raises [`IssueCode::JournalDiscrepancy`].
pub const JOURNAL_THRESHOLD: f64 = 80.0;

/// Capitalized citation scaffolding that is never an author name.
const BOILERPLATE: &[&str] = &[
    "in", "the", "proceedings", "journal", "press", "university", "vol", "no", "ed", "eds", "et",
    "al", "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep",
    "sept", "oct", "nov", "dec",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCode {
    TitleMismatch,
    AuthorMismatch,
    JournalDiscrepancy,
    YearMismatch,
    FakeAuthor,
    NotFound,
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IssueCode::TitleMismatch => "title mismatch",
            IssueCode::AuthorMismatch => "author mismatch",
            IssueCode::JournalDiscrepancy => "journal discrepancy",
            IssueCode::YearMismatch => "year mismatch",
            IssueCode::FakeAuthor => "possible fabricated author",
            IssueCode::NotFound => "not found",
        })
    }
}

/// A detected problem together with the penalty it carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub detail: String,
    pub penalty: i32,
}

impl Issue {
    pub fn title_mismatch(s_title: SimilarityScore) -> Self {
        Issue {
            code: IssueCode::TitleMismatch,
            detail: format!("title similarity {s_title}% is below {TITLE_THRESHOLD}%"),
            penalty: scoring::TITLE_MISMATCH_PENALTY,
        }
    }

    pub fn author_mismatch(s_author: SimilarityScore) -> Self {
        Issue {
            code: IssueCode::AuthorMismatch,
            detail: format!("only {s_author}% of the record's authors appear in the reference"),
            penalty: scoring::AUTHOR_MISMATCH_PENALTY,
        }
    }

    pub fn journal_discrepancy(s_journal: SimilarityScore, query: &str, found: &str) -> Self {
        Issue {
            code: IssueCode::JournalDiscrepancy,
            detail: format!("venue '{query}' differs from '{found}' ({s_journal}%)"),
            penalty: scoring::journal_penalty(s_journal.value()),
        }
    }

    pub fn year_mismatch(query: i32, found: i32) -> Self {
        Issue {
            code: IssueCode::YearMismatch,
            detail: format!("year {query} differs from {found}"),
            penalty: scoring::year_penalty(query, found),
        }
    }

    /// `flagged_by` counts the sources whose author list lacks the name.
    pub fn fake_author(name: &str, flagged_by: usize) -> Self {
        Issue {
            code: IssueCode::FakeAuthor,
            detail: format!("'{name}' matches no author in {flagged_by} source(s)"),
            penalty: scoring::fake_author_penalty(flagged_by),
        }
    }

    pub fn not_found() -> Self {
        Issue {
            code: IssueCode::NotFound,
            detail: "no source returned a candidate record".into(),
            penalty: scoring::NOT_FOUND_PENALTY,
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.code, self.detail, self.penalty)
    }
}

/// Component similarities of one candidate against the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchEvaluation {
    pub s_title: SimilarityScore,
    pub s_author: SimilarityScore,
    pub s_journal: SimilarityScore,
    pub s_year: SimilarityScore,
    pub matched_authors: Vec<String>,
    pub fake_author_tokens: Vec<String>,
    pub issues: Vec<Issue>,
}

/// Normalized family names: the part before a comma, else the last token.
pub fn extract_family_names<S: AsRef<str>>(authors: &[S]) -> Vec<String> {
    authors
        .iter()
        .map(|a| normalize(&Author::parse(a.as_ref()).family))
        .filter(|f| !f.is_empty())
        .collect()
}

/// Normalized family names of a record's authors.
pub fn record_family_names(record: &CandidateRecord) -> Vec<String> {
    record
        .authors
        .iter()
        .map(|a| normalize(&a.family))
        .filter(|f| !f.is_empty())
        .collect()
}

/// Share of `family_names` found as substrings of the normalized query.
/// An empty name list scores 100.
pub fn author_similarity(query_text: &str, family_names: &[String]) -> (SimilarityScore, Vec<String>) {
    if family_names.is_empty() {
        return (SimilarityScore::MAX, Vec::new());
    }
    let haystack = normalize(query_text);
    let matched: Vec<String> = family_names
        .iter()
        .filter(|name| haystack.contains(name.as_str()))
        .cloned()
        .collect();
    let score = 100.0 * matched.len() as f64 / family_names.len() as f64;
    (SimilarityScore::new(score), matched)
}

/// 100 when equal or either side is unknown, 50 for a one-year drift, else 0.
pub fn year_similarity(query_year: Option<i32>, candidate_year: Option<i32>) -> SimilarityScore {
    match (query_year, candidate_year) {
        (Some(q), Some(c)) if q == c => SimilarityScore::MAX,
        (Some(q), Some(c)) if (q - c).abs() == 1 => SimilarityScore::new(50.0),
        (Some(_), Some(_)) => SimilarityScore::MIN,
        _ => SimilarityScore::MAX,
    }
}

/// Splits on anything that is not a letter.
fn alpha_tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphabetic()).filter(|t| !t.is_empty())
}

/// Capitalized tokens of at least three letters from the query's author
/// region that match nothing in the candidate.
///
/// For BibTeX input the author region is the query's own family names; for
/// free text it is the whole text. A token is accounted for when its
/// normalized form is contained in a candidate title word, the venue, the
/// year, an author family or given name, or the boilerplate list.
pub fn detect_fake_authors(query: &Reference, candidate: &CandidateRecord) -> Vec<String> {
    let region = if query.is_structured() {
        query.author_family_names().join(" ")
    } else {
        query.raw_text.clone()
    };

    let title_words: Vec<String> = candidate
        .title
        .split_whitespace()
        .map(normalize)
        .filter(|w| !w.is_empty())
        .collect();
    let venue = candidate.venue.as_deref().map(normalize).unwrap_or_default();
    let year = candidate.year.map(|y| y.to_string()).unwrap_or_default();
    let mut name_parts: Vec<String> = record_family_names(candidate);
    name_parts.extend(
        candidate
            .authors
            .iter()
            .filter_map(|a| a.given.as_deref())
            .flat_map(alpha_tokens)
            .map(normalize),
    );

    let mut found: Vec<String> = Vec::new();
    for token in alpha_tokens(&region) {
        let starts_upper = token.chars().next().is_some_and(char::is_uppercase);
        if !starts_upper || token.chars().count() < 3 {
            continue;
        }
        let norm = normalize(token);
        let accounted = BOILERPLATE.contains(&norm.as_str())
            || title_words.iter().any(|w| w.contains(&norm))
            || (!venue.is_empty() && venue.contains(&norm))
            || (!year.is_empty() && year.contains(&norm))
            || name_parts.iter().any(|n| n.contains(&norm));
        if !accounted && !found.iter().any(|f| f == token) {
            found.push(token.to_string());
        }
    }
    found
}

/// Best title similarity for free text: the candidate title is compared
/// with the whole text and with every run of words whose length is within
/// two words of the title's.
fn free_text_title_similarity(raw_text: &str, candidate_title: &str) -> SimilarityScore {
    let target = normalize(candidate_title);
    let tokens: Vec<String> = raw_text
        .split_whitespace()
        .map(normalize)
        .filter(|t| !t.is_empty())
        .collect();
    let title_len = candidate_title
        .split_whitespace()
        .filter(|w| !normalize(w).is_empty())
        .count()
        .max(1);

    let mut best = similarity(&normalize(raw_text), &target);
    let lo = title_len.saturating_sub(2).max(1);
    let hi = (title_len + 2).min(tokens.len());
    for len in lo..=hi {
        for window in tokens.windows(len) {
            let s = similarity(&window.concat(), &target);
            if s > best {
                best = s;
            }
        }
    }
    best
}

/// Text searched for candidate family names.
fn author_query_text(query: &Reference) -> Option<String> {
    if query.is_structured() {
        query.authors.as_ref().map(|a| a.join(" "))
    } else {
        Some(query.raw_text.clone())
    }
}

/// Scores one candidate. `issues` is left empty; see [`detect_issues`].
pub fn evaluate(query: &Reference, candidate: &CandidateRecord) -> MatchEvaluation {
    let s_title = match &query.title {
        Some(title) => similarity(&normalize(title), &normalize(&candidate.title)),
        None => free_text_title_similarity(&query.raw_text, &candidate.title),
    };

    let (s_author, matched_authors) = match author_query_text(query) {
        Some(text) => author_similarity(&text, &record_family_names(candidate)),
        // a structured query without authors carries no evidence either way
        None => (SimilarityScore::MAX, Vec::new()),
    };

    let s_journal = match (&query.journal_or_venue, &candidate.venue) {
        (Some(q), Some(c)) => similarity(&normalize(q), &normalize(c)),
        _ => SimilarityScore::MAX,
    };

    MatchEvaluation {
        s_title,
        s_author,
        s_journal,
        s_year: year_similarity(query.year, candidate.year),
        matched_authors,
        fake_author_tokens: detect_fake_authors(query, candidate),
        issues: Vec::new(),
    }
}

/// Picks the candidate with the highest pre-penalty confidence. Ties go to
/// the higher title similarity, then the lower source rank, then the
/// earlier position.
pub fn evaluate_candidates(
    query: &Reference,
    candidates: &[CandidateRecord],
) -> Result<(CandidateRecord, MatchEvaluation)> {
    let structured = query.is_structured();
    let mut best: Option<(usize, f64, MatchEvaluation)> = None;
    for (i, candidate) in candidates.iter().enumerate() {
        let eval = evaluate(query, candidate);
        let base = scoring::base_confidence(&eval, structured);
        let better = match &best {
            None => true,
            Some((bi, bbase, beval)) => {
                let by_base = base.total_cmp(bbase);
                let by_title = eval.s_title.value().total_cmp(&beval.s_title.value());
                let by_rank = candidates[*bi].source_rank.cmp(&candidate.source_rank);
                by_base.then(by_title).then(by_rank) == Ordering::Greater
            }
        };
        if better {
            best = Some((i, base, eval));
        }
    }
    let (i, _, eval) = best.ok_or(Error::EmptyCandidateSet)?;
    Ok((candidates[i].clone(), eval))
}

/// Issues for the chosen candidate, counting each unmatched name as
/// flagged by a single source.
pub fn detect_issues(query: &Reference, best: &CandidateRecord, eval: &MatchEvaluation) -> Vec<Issue> {
    detect_issues_across(query, best, eval, &[record_family_names(best)])
}

/// Like [`detect_issues`], with fabricated-name severity taken from how many
/// of `source_family_names` lack the name.
pub fn detect_issues_across(
    query: &Reference,
    best: &CandidateRecord,
    eval: &MatchEvaluation,
    source_family_names: &[Vec<String>],
) -> Vec<Issue> {
    let mut issues = Vec::new();
    if eval.s_title.value() < TITLE_THRESHOLD {
        issues.push(Issue::title_mismatch(eval.s_title));
    }
    if eval.s_author.value() < AUTHOR_THRESHOLD {
        issues.push(Issue::author_mismatch(eval.s_author));
    }
    if let (Some(q), Some(c)) = (&query.journal_or_venue, &best.venue) {
        if eval.s_journal.value() < JOURNAL_THRESHOLD {
            issues.push(Issue::journal_discrepancy(eval.s_journal, q, c));
        }
    }
    if let (Some(q), Some(c)) = (query.year, best.year) {
        if eval.s_year.value() < 100.0 {
            issues.push(Issue::year_mismatch(q, c));
        }
    }
    for token in &eval.fake_author_tokens {
        let norm = normalize(token);
        let flagged_by = source_family_names
            .iter()
            .filter(|names| !names.iter().any(|n| n.contains(&norm)))
            .count()
            .max(1);
        issues.push(Issue::fake_author(token, flagged_by));
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bibtex::parse_bibtex;
    use crate::record::SourceId;

    fn candidate(title: &str, authors: &[(&str, &str)], venue: Option<&str>, year: Option<i32>) -> CandidateRecord {
        let mut r = CandidateRecord::new(SourceId::CrossRef, title);
        r.authors = authors.iter().map(|(f, g)| Author::new(*f, Some(g))).collect();
        r.venue = venue.map(str::to_string);
        r.year = year;
        r
    }

    #[test]
    fn family_names() {
        assert_eq!(extract_family_names(&["Doe, Jane", "Rick Roe"]), vec!["doe", "roe"]);
        assert!(extract_family_names::<&str>(&[]).is_empty());
        assert_eq!(extract_family_names(&["van der Berg, A."]), vec!["vanderberg"]);
    }

    #[test]
    fn author_proportion() {
        let names = vec!["doe".to_string(), "roe".to_string()];
        let (s, m) = author_similarity("Doe and Roe (2020). A Study.", &names);
        assert_eq!((s.value(), m.len()), (100.0, 2));
        let (s, m) = author_similarity("Doe (2020)...", &names);
        assert_eq!((s.value(), m), (50.0, vec!["doe".to_string()]));
        let (s, m) = author_similarity("anything", &[]);
        assert_eq!((s.value(), m.len()), (100.0, 0));
    }

    #[test]
    fn years() {
        assert_eq!(year_similarity(Some(2020), Some(2020)).value(), 100.0);
        assert_eq!(year_similarity(Some(2020), Some(2021)).value(), 50.0);
        assert_eq!(year_similarity(Some(2020), Some(2023)).value(), 0.0);
        assert_eq!(year_similarity(None, Some(2020)).value(), 100.0);
    }

    #[test]
    fn fake_author_in_free_text() {
        let q = Reference::free_text("Doe, Fabricato and Roe (2020). A Study of Things. Nature.").unwrap();
        let c = candidate("A Study of Things", &[("Doe", "J."), ("Roe", "R.")], Some("Nature"), Some(2020));
        assert_eq!(detect_fake_authors(&q, &c), vec!["Fabricato"]);
    }

    #[test]
    fn consistent_query_has_no_fakes() {
        let q = Reference::free_text("Doe, J., & Roe, R. (2020). A Study of Things. Nature.").unwrap();
        let c = candidate("A Study of Things", &[("Doe", "J."), ("Roe", "R.")], Some("Nature"), Some(2020));
        assert!(detect_fake_authors(&q, &c).is_empty());
    }

    #[test]
    fn et_al_is_not_an_author() {
        let q = Reference::free_text("Vaswani et al. Attention is all you need. In Proceedings, 2017.").unwrap();
        let c = candidate(
            "Attention is All you Need",
            &[("Vaswani", "Ashish"), ("Shazeer", "Noam")],
            None,
            Some(2017),
        );
        assert!(detect_fake_authors(&q, &c).is_empty());
    }

    #[test]
    fn structured_region_is_family_names_only() {
        let q = &parse_bibtex("@article{k, title={T}, author={Doe, Jane and Madeup, Zed}}")
            .unwrap()
            .references[0];
        let c = candidate("T", &[("Doe", "J.")], None, None);
        // given names of the query are not inspected
        assert_eq!(detect_fake_authors(q, &c), vec!["Madeup"]);
    }

    #[test]
    fn identical_structured_query_scores_all_100() {
        let q = &parse_bibtex(
            "@article{k, title={A Study}, author={Doe, Jane}, journal={Nature}, year={2020}}",
        )
        .unwrap()
        .references[0];
        let c = candidate("A Study", &[("Doe", "Jane")], Some("Nature"), Some(2020));
        let (_, eval) = evaluate_candidates(q, &[c]).unwrap();
        for s in [eval.s_title, eval.s_author, eval.s_journal, eval.s_year] {
            assert_eq!(s.value(), 100.0);
        }
        assert!(eval.fake_author_tokens.is_empty());
    }

    #[test]
    fn exact_title_wins() {
        let q = Reference::free_text("Doe, J. (2020). Deep learning for cats. Nature.").unwrap();
        let near = candidate("Deep learning for bats", &[("Doe", "J.")], Some("Nature"), Some(2020));
        let exact = candidate("Deep learning for cats", &[("Doe", "J.")], Some("Nature"), Some(2020));
        let (best, _) = evaluate_candidates(&q, &[near.clone(), exact.clone()]).unwrap();
        assert_eq!(best.title, exact.title);
        let (best, _) = evaluate_candidates(&q, &[exact.clone(), near]).unwrap();
        assert_eq!(best.title, exact.title);
    }

    #[test]
    fn ties_prefer_lower_source_rank() {
        let q = Reference::free_text("Doe (2020). A Study.").unwrap();
        let a = candidate("A Study", &[("Doe", "J.")], None, Some(2020)).with_source(SourceId::OpenAlex);
        let b = a.clone().with_source(SourceId::SemanticScholar);
        let (best, _) = evaluate_candidates(&q, &[a, b]).unwrap();
        assert_eq!(best.source, SourceId::SemanticScholar);
    }

    #[test]
    fn empty_candidates_error() {
        let q = Reference::free_text("x").unwrap();
        assert!(matches!(evaluate_candidates(&q, &[]), Err(Error::EmptyCandidateSet)));
    }

    fn eval_with(s_title: f64, s_author: f64) -> MatchEvaluation {
        MatchEvaluation {
            s_title: SimilarityScore::new(s_title),
            s_author: SimilarityScore::new(s_author),
            s_journal: SimilarityScore::MAX,
            s_year: SimilarityScore::MAX,
            matched_authors: vec![],
            fake_author_tokens: vec![],
            issues: vec![],
        }
    }

    #[test]
    fn issue_thresholds() {
        let q = Reference::free_text("q").unwrap();
        let c = candidate("T", &[], None, None);
        assert!(detect_issues(&q, &c, &eval_with(100.0, 100.0)).is_empty());
        let issues = detect_issues(&q, &c, &eval_with(90.0, 50.0));
        assert_eq!(issues.iter().map(|i| i.code).collect::<Vec<_>>(), vec![IssueCode::AuthorMismatch]);

        let mut e = eval_with(100.0, 100.0);
        e.fake_author_tokens = vec!["Fabricato".into()];
        let issues = detect_issues(&q, &c, &e);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, IssueCode::FakeAuthor);
        assert!(issues[0].detail.contains("Fabricato"));
        assert_eq!(issues[0].penalty, -10);
    }

    #[test]
    fn year_and_journal_need_both_sides() {
        let mut q = Reference::free_text("q 2019").unwrap();
        q.journal_or_venue = Some("Science".into());
        let c = candidate("T", &[], Some("Nature"), Some(2020));
        let mut e = eval_with(100.0, 100.0);
        e.s_journal = SimilarityScore::new(10.0);
        e.s_year = year_similarity(q.year, c.year);
        let codes: Vec<_> = detect_issues(&q, &c, &e).iter().map(|i| (i.code, i.penalty)).collect();
        assert_eq!(codes, vec![(IssueCode::JournalDiscrepancy, -20), (IssueCode::YearMismatch, -10)]);

        let c = candidate("T", &[], None, None);
        assert!(detect_issues(&q, &c, &e).is_empty());
    }

    #[test]
    fn fake_author_severity_counts_sources() {
        let q = Reference::free_text("q").unwrap();
        let c = candidate("T", &[], None, None);
        let mut e = eval_with(100.0, 100.0);
        e.fake_author_tokens = vec!["Ghost".into()];
        let lists = vec![vec!["doe".to_string()], vec!["doe".to_string()], vec!["ghost".to_string()]];
        let issues = detect_issues_across(&q, &c, &e, &lists);
        assert_eq!(issues[0].penalty, -20);
    }
}
