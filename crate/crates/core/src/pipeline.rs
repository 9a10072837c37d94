//! End-to-end verification of one reference or a batch.

use crate::bibtex::{generate_bibtex, generate_citation_key, parse_input, Reference};
use crate::error::{Error, Result};
use crate::matching::{
    detect_issues, detect_issues_across, evaluate, evaluate_candidates, record_family_names, Issue,
    IssueCode, MatchEvaluation, TITLE_THRESHOLD,
};
use crate::output::format_apa;
use crate::record::{CandidateRecord, SourceId};
use crate::scoring::{base_confidence, classify, fake_author_penalty, Confidence, Verdict, FALLBACK_THRESHOLD, MULTI_SOURCE_BONUS};
use crate::similarity::{normalize, similarity};
use crate::sources::{build_query, search_source, RateLimiter, SourceError, SourceSettings, Transport};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

/// Minimum spacing between two requests to the same source in a batch.
pub const DEFAULT_RATE_LIMIT: Duration = Duration::from_millis(800);

#[derive(Debug, Clone)]
pub struct VerifierConfig {
    pub settings: SourceSettings,
    /// Same-source request spacing used by [`Verifier::verify_batch`].
    pub rate_limit: Duration,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            settings: SourceSettings::default(),
            rate_limit: DEFAULT_RATE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationResult {
    /// The reference text after LaTeX filtering.
    pub input: String,
    /// Citation key of BibTeX input.
    pub key: Option<String>,
    pub exists: bool,
    pub confidence: Confidence,
    pub verdict: Verdict,
    pub issues: Vec<Issue>,
    pub confirmed_authors: BTreeSet<String>,
    pub suspect_authors: BTreeSet<String>,
    /// Metadata the outputs are built from. Absent when nothing was found.
    pub corrected: Option<CandidateRecord>,
    pub apa: Option<String>,
    pub bibtex: Option<String>,
    pub sources_consulted: Vec<SourceId>,
    pub fallback_used: bool,
    pub warnings: Vec<String>,
    /// Every query failed at the network level.
    pub unreachable: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Verdict counts. Unreachable results are counted as errors only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub total: usize,
    pub verified: usize,
    pub partial: usize,
    pub not_found: usize,
    pub errors: usize,
}

impl BatchSummary {
    pub fn record(&mut self, result: &VerificationResult) {
        self.total += 1;
        if result.unreachable {
            self.errors += 1;
            return;
        }
        match result.verdict {
            Verdict::Verified => self.verified += 1,
            Verdict::PartialMatch => self.partial += 1,
            Verdict::NotFound => self.not_found += 1,
        }
    }

    pub fn from_results<'a>(results: impl IntoIterator<Item = &'a VerificationResult>) -> Self {
        let mut summary = BatchSummary::default();
        for r in results {
            summary.record(r);
        }
        summary
    }
}

/// Intersection and leftover of the family-name sets of the sources that
/// returned a matching record. `None` marks a source without one; it is
/// left out of the intersection instead of emptying it.
pub fn cross_validate_authors(
    cr: Option<&[String]>,
    ss: Option<&[String]>,
    oa: Option<&[String]>,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let sets: Vec<BTreeSet<String>> = [cr, ss, oa]
        .into_iter()
        .flatten()
        .map(|names| names.iter().cloned().collect())
        .collect();
    let Some((first, rest)) = sets.split_first() else {
        return (BTreeSet::new(), BTreeSet::new());
    };
    let confirmed: BTreeSet<String> = first
        .iter()
        .filter(|n| rest.iter().all(|s| s.contains(*n)))
        .cloned()
        .collect();
    let suspect = sets
        .iter()
        .flatten()
        .filter(|n| !confirmed.contains(*n))
        .cloned()
        .collect();
    (confirmed, suspect)
}

/// Field-wise merge with precedence CrossRef, Semantic Scholar, OpenAlex.
/// Returns the merged record and any warnings about conflicting DOIs; the
/// first DOI in precedence order is kept.
pub fn merge_metadata(
    cr: Option<&CandidateRecord>,
    ss: Option<&CandidateRecord>,
    oa: Option<&CandidateRecord>,
) -> Result<(CandidateRecord, Vec<String>)> {
    let present: Vec<&CandidateRecord> = [cr, ss, oa].into_iter().flatten().collect();
    let first = *present.first().ok_or(Error::NoRecords)?;
    let mut merged = first.clone();
    let mut warnings = Vec::new();

    fn fill<T: Clone>(slot: &mut Option<T>, from: &Option<T>) {
        if slot.is_none() {
            slot.clone_from(from);
        }
    }
    for other in &present[1..] {
        if merged.title.trim().is_empty() {
            merged.title.clone_from(&other.title);
        }
        if merged.authors.is_empty() {
            merged.authors.clone_from(&other.authors);
        }
        fill(&mut merged.venue, &other.venue);
        fill(&mut merged.year, &other.year);
        fill(&mut merged.volume, &other.volume);
        fill(&mut merged.number, &other.number);
        fill(&mut merged.pages, &other.pages);
        fill(&mut merged.record_type, &other.record_type);
    }

    for other in &present {
        let Some(doi) = &other.doi else { continue };
        match &merged.doi {
            None => merged.doi = Some(doi.clone()),
            Some(kept) if kept != doi => warnings.push(format!(
                "DOI disagreement: {} reports {doi}, keeping {kept}",
                other.source
            )),
            Some(_) => {}
        }
    }
    Ok((merged, warnings))
}

/// Outcome of one source query, cached for the rest of a verification.
type Lookup = std::result::Result<Vec<CandidateRecord>, SourceError>;

/// Runs the verification cascade against a [`Transport`].
pub struct Verifier {
    transport: Arc<dyn Transport>,
    config: VerifierConfig,
    limiter: RateLimiter,
}

/// Per-reference query state.
struct Session<'a> {
    verifier: &'a Verifier,
    query: String,
    limiter: Option<&'a RateLimiter>,
    cache: BTreeMap<SourceId, Lookup>,
    consulted: Vec<SourceId>,
    warnings: Vec<String>,
}

impl Session<'_> {
    fn record(&mut self, source: SourceId, lookup: Lookup) -> Vec<CandidateRecord> {
        if !self.consulted.contains(&source) {
            self.consulted.push(source);
        }
        if let Err(e) = &lookup {
            log::warn!("{source}: {e}");
            self.warnings.push(format!("{source}: {e}"));
        }
        let records = lookup.clone().unwrap_or_default();
        self.cache.insert(source, lookup);
        records
    }

    fn search(&mut self, source: SourceId) -> Vec<CandidateRecord> {
        if let Some(cached) = self.cache.get(&source) {
            return cached.clone().unwrap_or_default();
        }
        let lookup = self.fetch(source);
        self.record(source, lookup)
    }

    fn fetch(&self, source: SourceId) -> Lookup {
        let v = self.verifier;
        search_source(source, &self.query, v.transport.as_ref(), &v.config.settings, self.limiter)
    }

    /// Queries the two fallback sources, concurrently when neither is cached.
    fn search_fallback(&mut self) -> (Vec<CandidateRecord>, Vec<CandidateRecord>) {
        let pending: Vec<SourceId> = [SourceId::SemanticScholar, SourceId::OpenAlex]
            .into_iter()
            .filter(|s| !self.cache.contains_key(s))
            .collect();
        let fetched: Vec<(SourceId, Lookup)> = thread::scope(|scope| {
            let this = &*self;
            let handles: Vec<_> = pending
                .iter()
                .map(|&s| (s, scope.spawn(move || this.fetch(s))))
                .collect();
            handles
                .into_iter()
                .map(|(s, h)| {
                    let lookup = h
                        .join()
                        .unwrap_or_else(|_| Err(SourceError::Network("query thread panicked".into())));
                    (s, lookup)
                })
                .collect()
        });
        for (source, lookup) in fetched {
            self.record(source, lookup);
        }
        (self.search(SourceId::SemanticScholar), self.search(SourceId::OpenAlex))
    }

    fn all_unreachable(&self) -> bool {
        !self.cache.is_empty()
            && self
                .cache
                .values()
                .all(|l| l.as_ref().is_err_and(SourceError::is_unreachable))
    }
}

/// Everything scoring needs after candidate selection and fallback.
struct Assessment {
    record: CandidateRecord,
    eval: MatchEvaluation,
    issues: Vec<Issue>,
    bonus: f64,
    confirmed: BTreeSet<String>,
    suspect: BTreeSet<String>,
    fallback: bool,
}

impl Verifier {
    pub fn new(transport: Arc<dyn Transport>, config: VerifierConfig) -> Self {
        let limiter = RateLimiter::new(config.rate_limit);
        Verifier {
            transport,
            config,
            limiter,
        }
    }

    pub fn config(&self) -> &VerifierConfig {
        &self.config
    }

    /// Verifies a single pasted reference (free text or one BibTeX entry).
    /// Only the first reference is verified when the text holds several.
    pub fn verify_reference(&self, text: &str) -> Result<VerificationResult> {
        let parsed = parse_input(text)?;
        let mut references = parsed.references.into_iter();
        let reference = references.next().ok_or(Error::EmptyInput)?;
        let mut result = self.verify(&reference);
        let mut warnings: Vec<String> = parsed.warnings.iter().map(ToString::to_string).collect();
        let skipped = references.count();
        if skipped > 0 {
            warnings.push(format!("{skipped} further reference(s) ignored"));
        }
        warnings.append(&mut result.warnings);
        result.warnings = warnings;
        Ok(result)
    }

    /// Verifies one parsed reference without rate limiting.
    pub fn verify(&self, reference: &Reference) -> VerificationResult {
        self.run(reference, None)
    }

    /// Verifies references one after another in input order, spacing
    /// same-source requests by the configured interval. `emit` sees each
    /// result as soon as it is ready.
    pub fn verify_batch<F>(&self, references: &[Reference], mut emit: F) -> BatchSummary
    where
        F: FnMut(usize, &VerificationResult),
    {
        let mut summary = BatchSummary::default();
        for (i, reference) in references.iter().enumerate() {
            let result = self.run(reference, Some(&self.limiter));
            summary.record(&result);
            emit(i, &result);
        }
        summary
    }

    fn run(&self, reference: &Reference, limiter: Option<&RateLimiter>) -> VerificationResult {
        let started = Instant::now();
        let mut session = Session {
            verifier: self,
            query: build_query(reference),
            limiter,
            cache: BTreeMap::new(),
            consulted: Vec::new(),
            warnings: Vec::new(),
        };

        let mut candidates = session.search(SourceId::CrossRef);
        if candidates.is_empty() {
            candidates = session.search(SourceId::SemanticScholar);
        }
        let assessment = assess(reference, &candidates, &mut session);
        let unreachable = session.all_unreachable();

        let mut result = match assessment {
            Some(a) => finish(reference, a, &mut session.warnings),
            None => VerificationResult {
                input: String::new(),
                key: None,
                exists: false,
                confidence: Confidence::compute(0.0, 0.0, &[Issue::not_found()]),
                verdict: Verdict::NotFound,
                issues: vec![Issue::not_found()],
                confirmed_authors: BTreeSet::new(),
                suspect_authors: BTreeSet::new(),
                corrected: None,
                apa: None,
                bibtex: None,
                sources_consulted: Vec::new(),
                fallback_used: true,
                warnings: Vec::new(),
                unreachable: false,
                elapsed: Duration::ZERO,
            },
        };
        result.input = reference.raw_text.clone();
        result.key = reference.key.clone();
        result.sources_consulted = session.consulted;
        result.warnings = session.warnings;
        result.unreachable = unreachable;
        result.elapsed = started.elapsed();
        result
    }
}

/// Picks the best candidate, runs the fallback when needed, and returns
/// the record to score. `None` when no source returned anything.
fn assess(reference: &Reference, candidates: &[CandidateRecord], session: &mut Session) -> Option<Assessment> {
    let structured = reference.is_structured();
    let primary = evaluate_candidates(reference, candidates).ok();
    if let Some((best, eval)) = &primary {
        let issues = detect_issues(reference, best, eval);
        if base_confidence(eval, structured) >= FALLBACK_THRESHOLD && issues.is_empty() {
            return Some(Assessment {
                record: best.clone(),
                eval: eval.clone(),
                issues,
                bonus: 0.0,
                confirmed: BTreeSet::new(),
                suspect: BTreeSet::new(),
                fallback: false,
            });
        }
    }

    let (ss, oa) = session.search_fallback();
    let mut pool: Vec<CandidateRecord> = candidates.to_vec();
    pool.extend(ss.iter().filter(|r| !candidates.contains(r)).cloned());
    pool.extend(oa.iter().cloned());
    let (best, _) = evaluate_candidates(reference, &pool).ok()?;

    // each source's own best record, kept when it describes the same work
    let mut by_source: BTreeMap<SourceId, CandidateRecord> = BTreeMap::new();
    by_source.insert(best.source, best.clone());
    for source in SourceId::ALL {
        if source == best.source {
            continue;
        }
        let records: Vec<CandidateRecord> = pool.iter().filter(|r| r.source == source).cloned().collect();
        if let Ok((rep, _)) = evaluate_candidates(reference, &records) {
            if same_work(&best, &rep) {
                by_source.insert(source, rep);
            }
        }
    }

    let families: BTreeMap<SourceId, Vec<String>> =
        by_source.iter().map(|(s, r)| (*s, record_family_names(r))).collect();
    let names = |s: SourceId| families.get(&s).map(Vec::as_slice);
    let (confirmed, db_suspects) =
        cross_validate_authors(names(SourceId::CrossRef), names(SourceId::SemanticScholar), names(SourceId::OpenAlex));

    let (record, mut merge_warnings) = merge_metadata(
        by_source.get(&SourceId::CrossRef),
        by_source.get(&SourceId::SemanticScholar),
        by_source.get(&SourceId::OpenAlex),
    )
    .ok()?;
    session.warnings.append(&mut merge_warnings);

    let eval = evaluate(reference, &record);
    let family_lists: Vec<Vec<String>> = families.values().cloned().collect();
    let mut issues = detect_issues_across(reference, &record, &eval, &family_lists);

    let mut suspect = db_suspects.clone();
    suspect.extend(eval.fake_author_tokens.iter().map(|t| normalize(t)));
    suspect.retain(|n| !confirmed.contains(n));
    for name in &db_suspects {
        let flagged_by = family_lists.iter().filter(|l| !l.contains(name)).count().max(1);
        issues.push(Issue {
            code: IssueCode::FakeAuthor,
            detail: format!("author \"{name}\" is not listed by every source"),
            penalty: fake_author_penalty(flagged_by),
        });
    }

    let bonus = if by_source.len() >= 2 && confirmed.len() >= 2 {
        MULTI_SOURCE_BONUS
    } else {
        0.0
    };
    Some(Assessment {
        record,
        eval,
        issues,
        bonus,
        confirmed,
        suspect,
        fallback: true,
    })
}

/// Same DOI, or titles at least as similar as the title threshold.
fn same_work(a: &CandidateRecord, b: &CandidateRecord) -> bool {
    if let (Some(x), Some(y)) = (&a.doi, &b.doi) {
        if x == y {
            return true;
        }
    }
    similarity(&normalize(&a.title), &normalize(&b.title)).value() >= TITLE_THRESHOLD
}

fn finish(reference: &Reference, a: Assessment, warnings: &mut Vec<String>) -> VerificationResult {
    let pre = base_confidence(&a.eval, reference.is_structured());
    let confidence = Confidence::compute(pre, a.bonus, &a.issues);
    let verdict = classify(confidence.value, true);
    let (apa, bibtex) = if verdict == Verdict::NotFound {
        (None, None)
    } else {
        let apa = format_apa(&a.record).map_err(|e| warnings.push(format!("APA: {e}"))).ok();
        let key = generate_citation_key(&a.record);
        let bibtex = generate_bibtex(&a.record, &key)
            .map_err(|e| warnings.push(format!("BibTeX: {e}")))
            .ok();
        (apa, bibtex)
    };
    VerificationResult {
        input: String::new(),
        key: None,
        exists: confidence.value > 50.0,
        confidence,
        verdict,
        issues: a.issues,
        confirmed_authors: a.confirmed,
        suspect_authors: a.suspect,
        corrected: Some(a.record),
        apa,
        bibtex,
        sources_consulted: Vec::new(),
        fallback_used: a.fallback,
        warnings: Vec::new(),
        unreachable: false,
        elapsed: Duration::ZERO,
    }
}
