//! Semantic Scholar Graph API paper search.

use super::{clean_text, null_default, SourceError, SourceSettings, MAX_CANDIDATES};
use crate::bibtex::normalize_page_range;
use crate::record::{clean_opt, normalize_doi, Author, CandidateRecord, SourceId};
use serde::Deserialize;
use std::collections::BTreeMap;
use url::Url;

const FIELDS: &str = "title,authors,venue,year,externalIds,journal,publicationTypes";

pub fn search_url(settings: &SourceSettings, query: &str) -> String {
    let mut url = Url::parse(&settings.semantic_scholar_url).expect("valid Semantic Scholar base URL");
    url.query_pairs_mut()
        .append_pair("query", query)
        .append_pair("limit", &MAX_CANDIDATES.to_string())
        .append_pair("fields", FIELDS);
    url.into()
}

#[derive(Deserialize)]
struct Envelope {
    #[serde(default, deserialize_with = "null_default")]
    data: Vec<Paper>,
}

#[derive(Deserialize)]
struct Paper {
    title: Option<String>,
    #[serde(default, deserialize_with = "null_default")]
    authors: Vec<PaperAuthor>,
    venue: Option<String>,
    year: Option<i32>,
    #[serde(rename = "externalIds", default, deserialize_with = "null_default")]
    external_ids: BTreeMap<String, serde_json::Value>,
    journal: Option<Journal>,
    #[serde(rename = "publicationTypes", default, deserialize_with = "null_default")]
    publication_types: Vec<String>,
}

#[derive(Deserialize)]
struct PaperAuthor {
    name: Option<String>,
}

#[derive(Deserialize)]
struct Journal {
    name: Option<String>,
    volume: Option<String>,
    pages: Option<String>,
}

fn record_type(types: &[String]) -> Option<String> {
    let has = |t: &str| types.iter().any(|x| x == t);
    let kind = if has("JournalArticle") {
        "journal-article"
    } else if has("Conference") {
        "proceedings-article"
    } else if has("Book") {
        "book"
    } else {
        return None;
    };
    Some(kind.to_string())
}

fn map_paper(paper: Paper) -> Option<CandidateRecord> {
    let title = paper.title.as_deref().and_then(clean_text)?;
    let mut record = CandidateRecord::new(SourceId::SemanticScholar, title);
    record.authors = paper
        .authors
        .iter()
        .filter_map(|a| a.name.as_deref())
        .filter(|n| !n.trim().is_empty())
        .map(Author::parse)
        .collect();
    let journal = paper.journal.as_ref();
    record.venue = clean_opt(paper.venue.as_deref())
        .or_else(|| journal.and_then(|j| clean_opt(j.name.as_deref())));
    record.year = paper.year;
    record.doi = paper
        .external_ids
        .get("DOI")
        .and_then(|v| v.as_str())
        .and_then(normalize_doi);
    record.volume = journal.and_then(|j| clean_opt(j.volume.as_deref()));
    record.pages = journal
        .and_then(|j| clean_opt(j.pages.as_deref()))
        .map(|p| normalize_page_range(&p));
    record.record_type = record_type(&paper.publication_types);
    Some(record)
}

pub fn parse_response(body: &[u8]) -> Result<Vec<CandidateRecord>, SourceError> {
    let envelope: Envelope = serde_json::from_slice(body)
        .map_err(|e| SourceError::MalformedResponse(format!("Semantic Scholar: {e}")))?;
    Ok(envelope
        .data
        .into_iter()
        .filter_map(map_paper)
        .take(MAX_CANDIDATES)
        .collect())
}
