//! OpenAlex `/works` search.

use super::{clean_text, null_default, SourceError, SourceSettings, MAX_CANDIDATES};
use crate::record::{clean_opt, normalize_doi, Author, CandidateRecord, SourceId};
use serde::Deserialize;
use url::Url;

pub fn search_url(settings: &SourceSettings, query: &str) -> String {
    let mut url = Url::parse(&settings.openalex_url).expect("valid OpenAlex base URL");
    {
        let mut pairs = url.query_pairs_mut();
        pairs.append_pair("search", query);
        pairs.append_pair("per-page", &MAX_CANDIDATES.to_string());
        if let Some(email) = &settings.contact_email {
            pairs.append_pair("mailto", email);
        }
    }
    url.into()
}

#[derive(Deserialize)]
struct Envelope {
    #[serde(default, deserialize_with = "null_default")]
    results: Vec<Work>,
}

#[derive(Deserialize)]
struct Work {
    display_name: Option<String>,
    title: Option<String>,
    #[serde(default, deserialize_with = "null_default")]
    authorships: Vec<Authorship>,
    publication_year: Option<i32>,
    doi: Option<String>,
    primary_location: Option<Location>,
    /// Older responses carry the venue here.
    host_venue: Option<Source>,
    biblio: Option<Biblio>,
    #[serde(rename = "type")]
    kind: Option<String>,
    type_crossref: Option<String>,
}

#[derive(Deserialize)]
struct Authorship {
    author: Option<AuthorRef>,
    raw_author_name: Option<String>,
}

#[derive(Deserialize)]
struct AuthorRef {
    display_name: Option<String>,
}

#[derive(Deserialize)]
struct Location {
    source: Option<Source>,
}

#[derive(Deserialize)]
struct Source {
    display_name: Option<String>,
}

#[derive(Deserialize)]
struct Biblio {
    volume: Option<String>,
    issue: Option<String>,
    first_page: Option<String>,
    last_page: Option<String>,
}

fn record_type(work: &Work) -> Option<String> {
    if let Some(t) = clean_opt(work.type_crossref.as_deref()) {
        return Some(t);
    }
    let mapped = match work.kind.as_deref()? {
        "article" => "journal-article",
        "book" => "book",
        "book-chapter" => "book-chapter",
        "preprint" => "posted-content",
        other => other,
    };
    Some(mapped.to_string())
}

fn map_work(work: Work) -> Option<CandidateRecord> {
    let title = work
        .display_name
        .as_deref()
        .or(work.title.as_deref())
        .and_then(clean_text)?;
    let mut record = CandidateRecord::new(SourceId::OpenAlex, title);
    record.authors = work
        .authorships
        .iter()
        .filter_map(|a| {
            a.author
                .as_ref()
                .and_then(|r| r.display_name.as_deref())
                .or(a.raw_author_name.as_deref())
        })
        .filter(|n| !n.trim().is_empty())
        .map(Author::parse)
        .collect();
    record.venue = work
        .primary_location
        .as_ref()
        .and_then(|l| l.source.as_ref())
        .or(work.host_venue.as_ref())
        .and_then(|s| clean_opt(s.display_name.as_deref()));
    record.year = work.publication_year;
    record.doi = work.doi.as_deref().and_then(normalize_doi);
    record.record_type = record_type(&work);
    if let Some(b) = &work.biblio {
        record.volume = clean_opt(b.volume.as_deref());
        record.number = clean_opt(b.issue.as_deref());
        record.pages = match (clean_opt(b.first_page.as_deref()), clean_opt(b.last_page.as_deref())) {
            (Some(first), Some(last)) if first != last => Some(format!("{first}-{last}")),
            (Some(first), _) => Some(first),
            _ => None,
        };
    }
    Some(record)
}

pub fn parse_response(body: &[u8]) -> Result<Vec<CandidateRecord>, SourceError> {
    let envelope: Envelope =
        serde_json::from_slice(body).map_err(|e| SourceError::MalformedResponse(format!("OpenAlex: {e}")))?;
    Ok(envelope
        .results
        .into_iter()
        .filter_map(map_work)
        .take(MAX_CANDIDATES)
        .collect())
}
