use serde::{Deserialize, Serialize};
use std::fmt;

/// Upstream scholarly databases, in cascade order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceId {
    CrossRef,
    SemanticScholar,
    OpenAlex,
}

impl SourceId {
    pub const ALL: [SourceId; 3] = [SourceId::CrossRef, SourceId::SemanticScholar, SourceId::OpenAlex];

    /// 1 for the primary source, 2 and 3 for the fallbacks.
    pub fn rank(self) -> u8 {
        match self {
            SourceId::CrossRef => 1,
            SourceId::SemanticScholar => 2,
            SourceId::OpenAlex => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SourceId::CrossRef => "CrossRef",
            SourceId::SemanticScholar => "Semantic Scholar",
            SourceId::OpenAlex => "OpenAlex",
        }
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub family: String,
    pub given: Option<String>,
}

impl Author {
    pub fn new(family: impl Into<String>, given: Option<&str>) -> Self {
        Author {
            family: family.into(),
            given: given.map(str::trim).filter(|g| !g.is_empty()).map(str::to_string),
        }
    }

    /// Parses "Family, Given" or "Given Family". Without a comma the last
    /// whitespace token is the family name.
    pub fn parse(name: &str) -> Self {
        let name = name.trim();
        if let Some((family, given)) = name.split_once(',') {
            return Author::new(family.trim(), Some(given));
        }
        match name.rsplit_once(char::is_whitespace) {
            Some((given, family)) => Author::new(family.trim(), Some(given)),
            None => Author::new(name, None),
        }
    }

    /// "Family, Given", or just "Family".
    pub fn display_inverted(&self) -> String {
        match &self.given {
            Some(given) => format!("{}, {}", self.family, given),
            None => self.family.clone(),
        }
    }
}

/// A bibliographic record returned by one source, mapped to a common shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub source: SourceId,
    pub title: String,
    pub authors: Vec<Author>,
    pub venue: Option<String>,
    pub year: Option<i32>,
    pub doi: Option<String>,
    pub volume: Option<String>,
    pub number: Option<String>,
    pub pages: Option<String>,
    /// CrossRef-style type token, e.g. `journal-article`.
    pub record_type: Option<String>,
    pub source_rank: u8,
}

impl CandidateRecord {
    pub fn new(source: SourceId, title: impl Into<String>) -> Self {
        CandidateRecord {
            source,
            title: title.into(),
            authors: Vec::new(),
            venue: None,
            year: None,
            doi: None,
            volume: None,
            number: None,
            pages: None,
            record_type: None,
            source_rank: source.rank(),
        }
    }

    /// Re-labels the record as coming from `source`, keeping the rank in step.
    pub fn with_source(mut self, source: SourceId) -> Self {
        self.source = source;
        self.source_rank = source.rank();
        self
    }
}

/// Strips `https://doi.org/`, `doi:` and similar prefixes and lowercases.
pub fn normalize_doi(doi: &str) -> Option<String> {
    let mut d = doi.trim();
    for prefix in [
        "https://doi.org/",
        "http://doi.org/",
        "https://dx.doi.org/",
        "http://dx.doi.org/",
        "doi.org/",
        "doi:",
    ] {
        if d.len() >= prefix.len() && d[..prefix.len()].eq_ignore_ascii_case(prefix) {
            d = d[prefix.len()..].trim();
            break;
        }
    }
    if d.is_empty() {
        None
    } else {
        Some(d.to_lowercase())
    }
}

/// Trims, collapses whitespace and maps empty strings to `None`.
pub(crate) fn clean_opt(value: Option<&str>) -> Option<String> {
    value
        .map(crate::latex::collapse_whitespace)
        .filter(|s| !s.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_name_orders() {
        assert_eq!(Author::parse("Doe, Jane"), Author::new("Doe", Some("Jane")));
        assert_eq!(Author::parse("Rick Roe"), Author::new("Roe", Some("Rick")));
        assert_eq!(Author::parse("van der Berg, A."), Author::new("van der Berg", Some("A.")));
        assert_eq!(Author::parse("Plato"), Author::new("Plato", None));
    }

    #[test]
    fn doi_prefixes() {
        assert_eq!(normalize_doi("https://doi.org/10.1/X").as_deref(), Some("10.1/x"));
        assert_eq!(normalize_doi("doi:10.1162/QSS_a_00022").as_deref(), Some("10.1162/qss_a_00022"));
        assert_eq!(normalize_doi("10.1/x").as_deref(), Some("10.1/x"));
        assert_eq!(normalize_doi("  "), None);
    }

    #[test]
    fn rank_follows_source() {
        let r = CandidateRecord::new(SourceId::CrossRef, "T").with_source(SourceId::OpenAlex);
        assert_eq!(r.source_rank, 3);
    }
}
