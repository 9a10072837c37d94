//! CrossRef `/works` search.

use super::{clean_text, null_default, SourceError, SourceSettings, MAX_CANDIDATES};
use crate::bibtex::normalize_page_range;
use crate::record::{clean_opt, normalize_doi, Author, CandidateRecord, SourceId};
use serde::Deserialize;
use url::Url;

pub fn search_url(settings: &SourceSettings, query: &str) -> String {
    let mut url = Url::parse(&settings.crossref_url).expect("valid CrossRef base URL");
    {
        let mut pairs = url.query_pairs_mut();
        pairs.append_pair("query.bibliographic", query);
        pairs.append_pair("rows", &MAX_CANDIDATES.to_string());
        if let Some(email) = &settings.contact_email {
            pairs.append_pair("mailto", email);
        }
    }
    url.into()
}

#[derive(Deserialize)]
struct Envelope {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default, deserialize_with = "null_default")]
    items: Vec<Item>,
}

#[derive(Deserialize)]
struct Item {
    #[serde(default, deserialize_with = "null_default")]
    title: Vec<String>,
    #[serde(default, deserialize_with = "null_default")]
    author: Vec<ItemAuthor>,
    #[serde(rename = "container-title", default, deserialize_with = "null_default")]
    container_title: Vec<String>,
    #[serde(rename = "published-print")]
    published_print: Option<DateParts>,
    #[serde(rename = "published-online")]
    published_online: Option<DateParts>,
    issued: Option<DateParts>,
    #[serde(rename = "DOI")]
    doi: Option<String>,
    volume: Option<String>,
    issue: Option<String>,
    page: Option<String>,
    #[serde(rename = "type")]
    kind: Option<String>,
}

#[derive(Deserialize)]
struct ItemAuthor {
    family: Option<String>,
    given: Option<String>,
    /// Organizational authors carry only a name.
    name: Option<String>,
}

#[derive(Deserialize)]
struct DateParts {
    #[serde(rename = "date-parts", default, deserialize_with = "null_default")]
    date_parts: Vec<Vec<Option<serde_json::Value>>>,
}

impl DateParts {
    fn year(&self) -> Option<i32> {
        let first = self.date_parts.first()?.first()?.as_ref()?;
        first
            .as_i64()
            .or_else(|| first.as_str().and_then(|s| s.parse().ok()))
            .and_then(|y| i32::try_from(y).ok())
    }
}

fn map_item(item: Item) -> Option<CandidateRecord> {
    let title = item.title.first().and_then(|t| clean_text(t))?;
    let mut record = CandidateRecord::new(SourceId::CrossRef, title);
    record.authors = item
        .author
        .into_iter()
        .filter_map(|a| match (a.family, a.name) {
            (Some(family), _) if !family.trim().is_empty() => {
                Some(Author::new(family.trim(), a.given.as_deref()))
            }
            (_, Some(name)) if !name.trim().is_empty() => Some(Author::new(name.trim(), None)),
            _ => None,
        })
        .collect();
    record.venue = item.container_title.first().and_then(|v| clean_text(v));
    // earliest of print and online; `issued` only when neither is known
    record.year = [&item.published_print, &item.published_online]
        .into_iter()
        .flatten()
        .filter_map(DateParts::year)
        .min()
        .or_else(|| item.issued.as_ref().and_then(DateParts::year));
    record.doi = item.doi.as_deref().and_then(normalize_doi);
    record.volume = clean_opt(item.volume.as_deref());
    record.number = clean_opt(item.issue.as_deref());
    record.pages = clean_opt(item.page.as_deref()).map(|p| normalize_page_range(&p));
    record.record_type = clean_opt(item.kind.as_deref());
    Some(record)
}

/// Maps a `/works` response. Items without a title are dropped.
pub fn parse_response(body: &[u8]) -> Result<Vec<CandidateRecord>, SourceError> {
    let envelope: Envelope =
        serde_json::from_slice(body).map_err(|e| SourceError::MalformedResponse(format!("CrossRef: {e}")))?;
    Ok(envelope
        .message
        .items
        .into_iter()
        .filter_map(map_item)
        .take(MAX_CANDIDATES)
        .collect())
}
