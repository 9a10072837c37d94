//! Clients for CrossRef, Semantic Scholar and OpenAlex.
//!
//! Requests go through a [`Transport`], so the same code runs against the
//! live APIs ([`HttpTransport`]) or recorded responses
//! ([`FixtureTransport`]). Every response is mapped to [`CandidateRecord`]s
//! and capped at three per source.

pub mod crossref;
mod fixture;
mod http;
pub mod openalex;
mod rate_limit;
pub mod semantic_scholar;

pub use fixture::{decoded_url, glob_match, FixtureTransport, RecordingTransport};
pub use http::HttpTransport;
pub use rate_limit::{Permit, RateLimiter};

use crate::bibtex::Reference;
use crate::record::{CandidateRecord, SourceId};
use regex::Regex;
use serde::{Deserialize, Deserializer};
use std::sync::{Arc, LazyLock};
use std::thread;
use std::time::Duration;
use thiserror::Error;

/// Maximum candidates kept per source.
pub const MAX_CANDIDATES: usize = 3;
/// Free-text queries are cut to this many characters at a word boundary.
pub const MAX_QUERY_CHARS: usize = 300;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
    pub retry_after: Option<Duration>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("no recorded response for {0}")]
    NoFixture(String),
    #[error("{0}")]
    Other(String),
}

impl TransportError {
    fn is_transient(&self) -> bool {
        matches!(self, TransportError::Timeout | TransportError::Connect(_))
    }
}

/// Executes one GET request. Implementations are shared across threads.
pub trait Transport: Send + Sync {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        (**self).execute(request)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SourceError {
    #[error("network error: {0}")]
    Network(String),
    #[error("rate limited{}", retry_after.map(|d| format!(" (retry after {}s)", d.as_secs())).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("HTTP status {status}")]
    Http { status: u16 },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

impl SourceError {
    /// True when the source could not be reached at all.
    pub fn is_unreachable(&self) -> bool {
        !matches!(self, SourceError::MalformedResponse(_))
    }
}

/// Endpoints and request policy shared by the three clients.
#[derive(Debug, Clone)]
pub struct SourceSettings {
    pub crossref_url: String,
    pub semantic_scholar_url: String,
    pub openalex_url: String,
    /// Contact address for the polite pools.
    pub contact_email: Option<String>,
    pub timeout: Duration,
    /// Retries after the first attempt on transient failures.
    pub max_retries: u32,
    pub retry_backoff: Duration,
    /// Upper bound on how long a `Retry-After` header may make us wait.
    pub max_retry_after: Duration,
}

impl Default for SourceSettings {
    fn default() -> Self {
        SourceSettings {
            crossref_url: "https://api.crossref.org/works".into(),
            semantic_scholar_url: "https://api.semanticscholar.org/graph/v1/paper/search".into(),
            openalex_url: "https://api.openalex.org/works".into(),
            contact_email: None,
            timeout: Duration::from_secs(10),
            max_retries: 1,
            retry_backoff: Duration::from_secs(1),
            max_retry_after: Duration::from_secs(10),
        }
    }
}

impl SourceSettings {
    pub fn user_agent(&self) -> String {
        let version = env!("CARGO_PKG_VERSION");
        match &self.contact_email {
            Some(email) => format!("refcheck/{version} (mailto:{email})"),
            None => format!("refcheck/{version}"),
        }
    }

    fn request(&self, source: SourceId, query: &str) -> HttpRequest {
        let url = match source {
            SourceId::CrossRef => crossref::search_url(self, query),
            SourceId::SemanticScholar => semantic_scholar::search_url(self, query),
            SourceId::OpenAlex => openalex::search_url(self, query),
        };
        HttpRequest {
            url,
            headers: vec![
                ("User-Agent".into(), self.user_agent()),
                ("Accept".into(), "application/json".into()),
            ],
            timeout: self.timeout,
        }
    }
}

/// Structured references become `title family-names year`; free text is
/// passed through, cut to [`MAX_QUERY_CHARS`] at a word boundary.
pub fn build_query(reference: &Reference) -> String {
    if reference.is_structured() {
        let mut parts: Vec<String> = Vec::new();
        parts.extend(reference.title.clone());
        parts.extend(reference.author_family_names());
        parts.extend(reference.year.map(|y| y.to_string()));
        let query = parts.join(" ");
        if !query.trim().is_empty() {
            return query;
        }
    }
    truncate_at_word(&reference.raw_text, MAX_QUERY_CHARS)
}

fn truncate_at_word(text: &str, max_chars: usize) -> String {
    if text.chars().count() <= max_chars {
        return text.to_string();
    }
    let cut: String = text.chars().take(max_chars).collect();
    let next_is_space = text.chars().nth(max_chars).is_some_and(char::is_whitespace);
    if next_is_space {
        return cut.trim_end().to_string();
    }
    match cut.rfind(char::is_whitespace) {
        Some(i) => cut[..i].trim_end().to_string(),
        None => cut,
    }
}

fn parse_records(source: SourceId, body: &[u8]) -> Result<Vec<CandidateRecord>, SourceError> {
    match source {
        SourceId::CrossRef => crossref::parse_response(body),
        SourceId::SemanticScholar => semantic_scholar::parse_response(body),
        SourceId::OpenAlex => openalex::parse_response(body),
    }
}

/// Queries one source: waits for a rate-limit permit when a limiter is
/// given, retries transient failures, and maps the response.
pub fn search_source(
    source: SourceId,
    query: &str,
    transport: &dyn Transport,
    settings: &SourceSettings,
    limiter: Option<&RateLimiter>,
) -> Result<Vec<CandidateRecord>, SourceError> {
    let request = settings.request(source, query);
    let attempts = 1 + settings.max_retries;
    let mut last_error = SourceError::Network("no attempt made".into());
    for attempt in 1..=attempts {
        if let Some(limiter) = limiter {
            limiter.acquire(source);
        }
        let wait = match transport.execute(&request) {
            Ok(response) if (200..300).contains(&response.status) => {
                return parse_records(source, &response.body);
            }
            Ok(response) if response.status == 429 => {
                last_error = SourceError::RateLimited {
                    retry_after: response.retry_after,
                };
                response
                    .retry_after
                    .map(|d| d.min(settings.max_retry_after))
                    .unwrap_or(settings.retry_backoff)
            }
            Ok(response) if response.status >= 500 => {
                last_error = SourceError::Http {
                    status: response.status,
                };
                settings.retry_backoff
            }
            Ok(response) => {
                return Err(SourceError::Http {
                    status: response.status,
                })
            }
            Err(e) if e.is_transient() => {
                last_error = SourceError::Network(e.to_string());
                settings.retry_backoff
            }
            Err(e) => return Err(SourceError::Network(e.to_string())),
        };
        if attempt < attempts {
            log::debug!("{source}: attempt {attempt} failed ({last_error}), retrying");
            thread::sleep(wait);
        }
    }
    Err(last_error)
}

pub fn search_crossref(query: &str, transport: &dyn Transport, settings: &SourceSettings) -> Result<Vec<CandidateRecord>, SourceError> {
    search_source(SourceId::CrossRef, query, transport, settings, None)
}

pub fn search_semantic_scholar(query: &str, transport: &dyn Transport, settings: &SourceSettings) -> Result<Vec<CandidateRecord>, SourceError> {
    search_source(SourceId::SemanticScholar, query, transport, settings, None)
}

pub fn search_openalex(query: &str, transport: &dyn Transport, settings: &SourceSettings) -> Result<Vec<CandidateRecord>, SourceError> {
    search_source(SourceId::OpenAlex, query, transport, settings, None)
}

static MARKUP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?[A-Za-z][^>]*>").unwrap());

/// Drops inline markup (`<i>`, `<scp>`, MathML) that some sources embed in
/// titles, decodes the common entities, and collapses whitespace.
pub(crate) fn clean_text(text: &str) -> Option<String> {
    let stripped = MARKUP.replace_all(text, "");
    let decoded = stripped
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&");
    let cleaned = crate::latex::collapse_whitespace(&decoded);
    (!cleaned.is_empty()).then_some(cleaned)
}

/// `null` and missing both become the default value.
pub(crate) fn null_default<'de, D, T>(deserializer: D) -> Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: Default + Deserialize<'de>,
{
    Ok(Option::<T>::deserialize(deserializer)?.unwrap_or_default())
}
