//! APA 7 citations, batch reports and `.bib` export.

use crate::bibtex::{generate_bibtex, generate_citation_key, CitationKeys};
use crate::error::{Error, Result};
use crate::latex::{collapse_whitespace, filter_latex};
use crate::pipeline::{BatchSummary, VerificationResult};
use crate::record::{Author, CandidateRecord};
use crate::scoring::Verdict;
use serde::Serialize;
use std::fmt::Write as _;

/// APA lists at most this many authors before eliding.
const APA_MAX_AUTHORS: usize = 20;
/// Longer inputs are cut in text reports.
const INPUT_PREVIEW_CHARS: usize = 120;

/// Plain text safe for a citation: no LaTeX commands, no braces.
fn plain(s: &str) -> String {
    collapse_whitespace(&filter_latex(s).replace(['{', '}'], ""))
}

/// "Jean-Paul Marie" -> "J.-P. M."
fn initials(given: &str) -> String {
    given
        .split_whitespace()
        .filter_map(|word| {
            let parts: Vec<String> = word
                .split('-')
                .filter_map(|p| p.chars().find(|c| c.is_alphabetic()))
                .map(|c| format!("{}.", c.to_uppercase()))
                .collect();
            (!parts.is_empty()).then(|| parts.join("-"))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn apa_author(author: &Author) -> String {
    let family = plain(&author.family);
    match author.given.as_deref().map(|g| initials(&plain(g))) {
        Some(i) if !i.is_empty() => format!("{family}, {i}"),
        _ => family,
    }
}

fn apa_authors(authors: &[Author]) -> String {
    let names: Vec<String> = authors.iter().map(apa_author).filter(|n| !n.is_empty()).collect();
    match names.len() {
        0 => String::new(),
        1 => names[0].clone(),
        n if n <= APA_MAX_AUTHORS => {
            format!("{}, & {}", names[..n - 1].join(", "), names[n - 1])
        }
        n => format!("{}, . . . {}", names[..APA_MAX_AUTHORS - 1].join(", "), names[n - 1]),
    }
}

/// Appends `.` unless the text already ends in sentence punctuation.
fn terminated(s: &str) -> String {
    if s.ends_with(['.', '?', '!']) {
        s.to_string()
    } else {
        format!("{s}.")
    }
}

/// Formats a record as an APA 7 reference-list entry:
/// `Authors (Year). Title. Venue, Volume(Issue), Pages. https://doi.org/DOI`.
/// Missing elements are left out together with their punctuation; the
/// title keeps the case it arrived in.
pub fn format_apa(record: &CandidateRecord) -> Result<String> {
    let title = plain(&record.title);
    if title.is_empty() {
        return Err(Error::MissingTitle);
    }
    let date = match record.year {
        Some(y) => format!("({y})."),
        None => "(n.d.).".to_string(),
    };
    let authors = apa_authors(&record.authors);
    let mut parts: Vec<String> = Vec::new();
    if authors.is_empty() {
        parts.push(terminated(&title));
        parts.push(date);
    } else {
        parts.push(authors);
        parts.push(date);
        parts.push(terminated(&title));
    }

    if let Some(venue) = record.venue.as_deref().map(plain).filter(|v| !v.is_empty()) {
        let mut source = venue;
        let volume = record.volume.as_deref().map(plain).filter(|v| !v.is_empty());
        let issue = record.number.as_deref().map(plain).filter(|v| !v.is_empty());
        match (volume, issue) {
            (Some(v), Some(i)) => write!(source, ", {v}({i})").unwrap(),
            (Some(v), None) => write!(source, ", {v}").unwrap(),
            (None, Some(i)) => write!(source, ", ({i})").unwrap(),
            (None, None) => {}
        }
        if let Some(pages) = record.pages.as_deref().map(plain).filter(|p| !p.is_empty()) {
            write!(source, ", {}", pages.replace('-', "–")).unwrap();
        }
        parts.push(terminated(&source));
    }
    if let Some(doi) = &record.doi {
        parts.push(format!("https://doi.org/{doi}"));
    }
    Ok(parts.join(" "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Results of one run, in input order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool_version: String,
    /// RFC 3339 timestamp, supplied by the caller.
    pub generated_at: String,
    pub summary: Summary,
    pub results: Vec<VerificationResult>,
}

pub type Summary = BatchSummary;

impl Report {
    pub fn new(results: Vec<VerificationResult>, generated_at: impl Into<String>) -> Self {
        Report {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at: generated_at.into(),
            summary: BatchSummary::from_results(&results),
            results,
        }
    }
}

/// One text block for a result, numbered from 1.
pub fn render_result(index: usize, result: &VerificationResult) -> String {
    let mut out = String::new();
    let status = if result.unreachable {
        "ERROR (sources unreachable)".to_string()
    } else {
        result.verdict.label().to_string()
    };
    writeln!(
        out,
        "[{}] {} {} ({:.1}%)",
        index + 1,
        result.verdict.symbol(),
        status,
        result.confidence.value
    )
    .unwrap();
    let label = result.key.as_deref().unwrap_or("input");
    writeln!(out, "    {label}: {}", preview(&result.input)).unwrap();
    for issue in &result.issues {
        writeln!(out, "    ! {} ({:+})", issue.detail, issue.penalty).unwrap();
    }
    if !result.suspect_authors.is_empty() {
        let names: Vec<&str> = result.suspect_authors.iter().map(String::as_str).collect();
        writeln!(out, "    suspect authors: {}", names.join(", ")).unwrap();
    }
    if let Some(apa) = &result.apa {
        writeln!(out, "    APA: {apa}").unwrap();
    }
    for warning in &result.warnings {
        writeln!(out, "    warning: {warning}").unwrap();
    }
    out
}

fn preview(input: &str) -> String {
    match input.char_indices().nth(INPUT_PREVIEW_CHARS) {
        Some((cut, _)) => format!("{}...", input[..cut].trim_end()),
        None => input.to_string(),
    }
}

pub fn render_summary(summary: &BatchSummary) -> String {
    format!(
        "{} references: {} verified, {} partial, {} not found, {} errors\n",
        summary.total, summary.verified, summary.partial, summary.not_found, summary.errors
    )
}

/// Renders a report. JSON output is pretty-printed with a fixed key order,
/// so equal reports render to identical bytes.
pub fn render_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut json = serde_json::to_string_pretty(report).expect("report serializes");
            json.push('\n');
            json
        }
        ReportFormat::Text => {
            let mut out = String::new();
            for (i, result) in report.results.iter().enumerate() {
                out.push_str(&render_result(i, result));
                out.push('\n');
            }
            out.push_str(&render_summary(&report.summary));
            out
        }
    }
}

/// Corrected BibTeX for every result that was found, with batch-unique keys.
pub fn export_bibtex(report: &Report) -> String {
    let mut keys = CitationKeys::new();
    let entries: Vec<String> = report
        .results
        .iter()
        .filter(|r| r.verdict != Verdict::NotFound)
        .filter_map(|r| r.corrected.as_ref())
        .filter_map(|record| {
            let key = keys.assign(&generate_citation_key(record));
            generate_bibtex(record, &key).ok()
        })
        .collect();
    if entries.is_empty() {
        String::new()
    } else {
        entries.join("\n\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::SourceId;

    fn article() -> CandidateRecord {
        let mut r = CandidateRecord::new(SourceId::CrossRef, "A study");
        r.authors = vec![Author::new("Doe", Some("Jane")), Author::new("Roe", Some("Rick"))];
        r.venue = Some("Nature".into());
        r.year = Some(2020);
        r.volume = Some("5".into());
        r.number = Some("2".into());
        r.pages = Some("1-10".into());
        r.doi = Some("10.1/x".into());
        r
    }

    #[test]
    fn apa_journal_article() {
        assert_eq!(
            format_apa(&article()).unwrap(),
            "Doe, J., & Roe, R. (2020). A study. Nature, 5(2), 1–10. https://doi.org/10.1/x"
        );
    }

    #[test]
    fn apa_omits_missing_elements() {
        let mut r = CandidateRecord::new(SourceId::CrossRef, "A study");
        r.authors = vec![Author::new("Doe", Some("J."))];
        r.venue = Some("Nature".into());
        r.year = Some(2020);
        assert_eq!(format_apa(&r).unwrap(), "Doe, J. (2020). A study. Nature.");
        r.venue = None;
        r.year = None;
        assert_eq!(format_apa(&r).unwrap(), "Doe, J. (n.d.). A study.");
        r.authors.clear();
        assert_eq!(format_apa(&r).unwrap(), "A study. (n.d.).");
        assert!(matches!(
            format_apa(&CandidateRecord::new(SourceId::CrossRef, " ")),
            Err(Error::MissingTitle)
        ));
    }

    #[test]
    fn apa_initials() {
        assert_eq!(initials("Jean-Paul Marie"), "J.-P. M.");
        assert_eq!(initials("Geoffrey E."), "G. E.");
        assert_eq!(initials("émile"), "É.");
    }

    #[test]
    fn apa_elides_past_twenty_authors() {
        let mut r = article();
        r.authors = (0..22).map(|i| Author::new(format!("Name{i}"), Some("A."))).collect();
        let apa = format_apa(&r).unwrap();
        assert_eq!(apa.matches(", A.").count(), 20);
        assert_eq!(apa.matches(". . .").count(), 1);
        assert!(apa.contains("Name18, A., . . . Name21, A. (2020)"));
        assert!(!apa.contains('&'));
    }

    #[test]
    fn apa_strips_markup() {
        let mut r = article();
        r.title = "The {DNA} of \\emph{Things}".into();
        let apa = format_apa(&r).unwrap();
        assert!(apa.contains("The DNA of Things."));
        assert!(!apa.contains(['{', '}', '\\']));
    }

    #[test]
    fn empty_report() {
        let report = Report::new(vec![], "2026-01-01T00:00:00Z");
        let json = render_report(&report, ReportFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["results"], serde_json::json!([]));
        assert_eq!(v["summary"]["total"], 0);
        assert_eq!(json, render_report(&report, ReportFormat::Json));
        assert_eq!(export_bibtex(&report), "");
    }
}
