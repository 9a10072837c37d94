//! Input detection, a forgiving BibTeX reader, and BibTeX generation with
//! automatic citation keys.
//!
//! The reader covers what reference managers usually emit: brace- or
//! quote-delimited values, `#` concatenation, and `and`-separated author
//! lists. `@string` macros and cross-references are not expanded, and
//! `@comment`/`@preamble`/`@string` blocks are skipped.

use crate::error::{Error, Result};
use crate::latex::{collapse_whitespace, filter_latex};
use crate::record::{normalize_doi, Author, CandidateRecord};
use deunicode::deunicode;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::sync::LazyLock;

/// A citation to verify, either free text or parsed BibTeX fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    /// Input text after LaTeX filtering. Never empty.
    pub raw_text: String,
    /// Present only for BibTeX input.
    pub entry_type: Option<String>,
    pub key: Option<String>,
    pub title: Option<String>,
    pub authors: Option<Vec<String>>,
    pub journal_or_venue: Option<String>,
    pub year: Option<i32>,
    pub doi: Option<String>,
    pub volume: Option<String>,
    pub number: Option<String>,
    pub pages: Option<String>,
    pub publisher: Option<String>,
    /// Every cleaned field of a BibTeX entry, keyed by lowercase field name.
    pub expected_metadata: Option<BTreeMap<String, String>>,
}

impl Reference {
    /// Builds a free-text reference. The year is picked up from the text
    /// when one is visible; everything else stays unparsed.
    pub fn free_text(text: &str) -> Result<Self> {
        let raw_text = filter_latex(text);
        if raw_text.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Reference {
            year: find_year(&raw_text),
            raw_text,
            ..Reference::default()
        })
    }

    /// True for references that came from BibTeX fields.
    pub fn is_structured(&self) -> bool {
        self.entry_type.is_some()
    }

    /// Family names of the query's own authors, in input order.
    pub fn author_family_names(&self) -> Vec<String> {
        self.authors
            .iter()
            .flatten()
            .map(|a| Author::parse(a).family)
            .filter(|f| !f.is_empty())
            .collect()
    }
}

static PAREN_YEAR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\(\s*([12][0-9]{3})[a-z]?\s*[,)]").unwrap());
static BARE_YEAR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:^|[^0-9])((?:1[5-9]|20)[0-9]{2})(?:[^0-9]|$)").unwrap());

fn find_year(text: &str) -> Option<i32> {
    PAREN_YEAR
        .captures(text)
        .or_else(|| BARE_YEAR.captures(text))
        .and_then(|c| c[1].parse().ok())
        .filter(|y| (1000..=2999).contains(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputKind {
    BibTeX,
    FreeTextSingle,
    FreeTextList,
}

static ENTRY_START: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^[ \t]*@[A-Za-z]+[ \t]*\{").unwrap());

/// BibTeX when some line starts with `@type{`; otherwise a list when there
/// are two or more non-empty lines.
pub fn detect_input_kind(text: &str) -> Result<InputKind> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    if ENTRY_START.is_match(text) {
        return Ok(InputKind::BibTeX);
    }
    let lines = text.lines().filter(|l| !l.trim().is_empty()).count();
    Ok(if lines >= 2 {
        InputKind::FreeTextList
    } else {
        InputKind::FreeTextSingle
    })
}

/// A recoverable problem with one BibTeX entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    /// 1-based line of the entry's `@`.
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

impl std::fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.key {
            Some(key) => write!(f, "line {} ({}): {}", self.line, key, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedBibtex {
    pub references: Vec<Reference>,
    pub warnings: Vec<ParseWarning>,
}

/// Any input, split into references to verify.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInput {
    pub kind: InputKind,
    pub references: Vec<Reference>,
    pub warnings: Vec<ParseWarning>,
}

/// Detects the input kind and splits the text into references: one per
/// BibTeX entry, one per non-empty line, or the whole text.
pub fn parse_input(text: &str) -> Result<ParsedInput> {
    let kind = detect_input_kind(text)?;
    let (references, warnings) = match kind {
        InputKind::BibTeX => {
            let parsed = parse_bibtex(text)?;
            (parsed.references, parsed.warnings)
        }
        InputKind::FreeTextList => {
            let refs = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .filter_map(|l| Reference::free_text(l).ok())
                .collect::<Vec<_>>();
            if refs.is_empty() {
                return Err(Error::EmptyInput);
            }
            (refs, Vec::new())
        }
        InputKind::FreeTextSingle => (vec![Reference::free_text(text)?], Vec::new()),
    };
    Ok(ParsedInput {
        kind,
        references,
        warnings,
    })
}

/// Parses every `@type{key, field = value, ...}` block. Broken entries are
/// skipped with a warning; the call fails only when nothing parses.
pub fn parse_bibtex(text: &str) -> Result<ParsedBibtex> {
    let mut reader = Reader {
        chars: text.chars().collect(),
        pos: 0,
    };
    let mut references = Vec::new();
    let mut warnings = Vec::new();

    while let Some(at) = reader.find_next('@') {
        reader.pos = at + 1;
        let line = reader.line_of(at);
        match reader.entry() {
            EntryOutcome::NotAnEntry => {}
            EntryOutcome::Skipped => {}
            EntryOutcome::Failed { key, message } => {
                warnings.push(ParseWarning { line, key, message });
                reader.pos = at + 1;
            }
            EntryOutcome::Parsed(raw) => {
                let source: String = reader.chars[at..reader.pos].iter().collect();
                match build_reference(raw, &source) {
                    Ok((reference, mut field_warnings)) => {
                        for w in &mut field_warnings {
                            w.line = line;
                        }
                        warnings.extend(field_warnings);
                        references.push(reference);
                    }
                    Err(w) => warnings.push(ParseWarning { line, ..w }),
                }
            }
        }
    }

    if references.is_empty() {
        return Err(Error::NoValidEntries { warnings });
    }
    Ok(ParsedBibtex {
        references,
        warnings,
    })
}

struct RawEntry {
    entry_type: String,
    key: String,
    fields: Vec<(String, String)>,
}

enum EntryOutcome {
    NotAnEntry,
    Skipped,
    Failed { key: Option<String>, message: String },
    Parsed(RawEntry),
}

struct Reader {
    chars: Vec<char>,
    pos: usize,
}

impl Reader {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn find_next(&self, c: char) -> Option<usize> {
        self.chars[self.pos.min(self.chars.len())..]
            .iter()
            .position(|&x| x == c)
            .map(|i| i + self.pos)
    }

    fn line_of(&self, idx: usize) -> usize {
        1 + self.chars[..idx].iter().filter(|&&c| c == '\n').count()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    /// Called with `pos` just past an `@`.
    fn entry(&mut self) -> EntryOutcome {
        let entry_type = self.take_while(|c| c.is_ascii_alphabetic()).to_lowercase();
        if entry_type.is_empty() {
            return EntryOutcome::NotAnEntry;
        }
        self.skip_ws();
        let close = match self.peek() {
            Some('{') => '}',
            Some('(') => ')',
            _ => return EntryOutcome::NotAnEntry,
        };
        let open_at = self.pos;

        if matches!(entry_type.as_str(), "comment" | "preamble" | "string") {
            if self.skip_group(open_at).is_none() {
                self.pos = open_at + 1;
            }
            return EntryOutcome::Skipped;
        }
        self.pos += 1;

        self.skip_ws();
        let key = self
            .take_while(|c| c != ',' && c != close && !c.is_whitespace())
            .trim()
            .to_string();
        let key_opt = (!key.is_empty()).then(|| key.clone());
        let fail = |message: &str| EntryOutcome::Failed {
            key: key_opt.clone(),
            message: message.to_string(),
        };

        let mut fields = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return fail("entry is not closed"),
                Some(',') => {
                    self.pos += 1;
                    continue;
                }
                Some(c) if c == close => {
                    self.pos += 1;
                    break;
                }
                _ => {}
            }
            let name = self
                .take_while(|c| c.is_alphanumeric() || "-_:.+".contains(c))
                .to_lowercase();
            if name.is_empty() {
                return fail("expected a field name");
            }
            self.skip_ws();
            if self.peek() != Some('=') {
                return fail(&format!("expected '=' after field '{name}'"));
            }
            self.pos += 1;
            match self.value(close) {
                Ok(value) => fields.push((name, value)),
                Err(message) => return fail(&message),
            }
        }

        EntryOutcome::Parsed(RawEntry {
            entry_type,
            key,
            fields,
        })
    }

    /// Skips a balanced group starting at `start`; returns the index after it.
    fn skip_group(&mut self, start: usize) -> Option<usize> {
        let (open, close) = match self.chars.get(start)? {
            '{' => ('{', '}'),
            '(' => ('(', ')'),
            _ => return None,
        };
        let mut depth = 0usize;
        for i in start..self.chars.len() {
            let c = self.chars[i];
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    self.pos = i + 1;
                    return Some(self.pos);
                }
            }
        }
        None
    }

    /// One value, possibly concatenated with `#`. Braces are kept so that
    /// author splitting can respect grouping.
    fn value(&mut self, close: char) -> std::result::Result<String, String> {
        let mut out = String::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('{') => {
                    let start = self.pos;
                    if self.skip_group(start).is_none() {
                        return Err("unclosed brace in field value".into());
                    }
                    out.extend(&self.chars[start + 1..self.pos - 1]);
                }
                Some('"') => {
                    self.pos += 1;
                    let mut depth = 0usize;
                    loop {
                        match self.peek() {
                            None => return Err("unclosed quote in field value".into()),
                            Some('"') if depth == 0 => {
                                self.pos += 1;
                                break;
                            }
                            Some(c) => {
                                match c {
                                    '{' => depth += 1,
                                    '}' => depth = depth.saturating_sub(1),
                                    _ => {}
                                }
                                out.push(c);
                                self.pos += 1;
                            }
                        }
                    }
                }
                Some(c) if c != ',' && c != close && c != '#' => {
                    let token = self.take_while(|c| {
                        !c.is_whitespace() && c != ',' && c != close && c != '#' && c != '{' && c != '"'
                    });
                    if token.is_empty() {
                        return Err("unexpected character in field value".into());
                    }
                    out.push_str(&token);
                }
                _ => return Err("missing field value".into()),
            }
            self.skip_ws();
            if self.peek() == Some('#') {
                self.pos += 1;
                continue;
            }
            return Ok(out);
        }
    }
}

/// LaTeX-filters a raw value and drops grouping braces.
fn clean_value(raw: &str) -> String {
    // a bare `~` is a tie in BibTeX values even without other markup
    let filtered = filter_latex(&raw.replace('~', " "));
    collapse_whitespace(&filtered.replace(['{', '}'], ""))
}

/// Splits an author field on `and` at brace depth zero.
fn split_authors(raw: &str) -> Vec<String> {
    let mut names = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    let words: Vec<&str> = raw.split_whitespace().collect();
    for word in words {
        if depth == 0 && word == "and" {
            names.push(std::mem::take(&mut current));
            continue;
        }
        for c in word.chars() {
            match c {
                '{' => depth += 1,
                '}' => depth = depth.saturating_sub(1),
                _ => {}
            }
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(word);
    }
    names.push(current);
    names
        .iter()
        .map(|n| clean_value(n))
        .filter(|n| !n.is_empty() && n != "others")
        .collect()
}

fn build_reference(
    raw: RawEntry,
    source: &str,
) -> std::result::Result<(Reference, Vec<ParseWarning>), ParseWarning> {
    let key = (!raw.key.is_empty()).then(|| raw.key.clone());
    let mut warnings = Vec::new();
    let mut fields = BTreeMap::new();
    let mut authors = None;
    for (name, value) in &raw.fields {
        if name == "author" {
            let list = split_authors(value);
            if !list.is_empty() {
                authors = Some(list);
            }
        }
        let cleaned = clean_value(value);
        if !cleaned.is_empty() {
            fields.insert(name.clone(), cleaned);
        }
    }
    let get = |name: &str| fields.get(name).cloned();

    let year = match get("year") {
        None => None,
        Some(y) => {
            let digits: String = y.chars().filter(char::is_ascii_digit).collect();
            match digits.parse::<i32>() {
                Ok(n) if (1000..=2999).contains(&n) => Some(n),
                _ => {
                    warnings.push(ParseWarning {
                        line: 0,
                        key: key.clone(),
                        message: format!("ignoring unusable year '{y}'"),
                    });
                    None
                }
            }
        }
    };

    let title = get("title");
    if title.is_none() && authors.is_none() {
        return Err(ParseWarning {
            line: 0,
            key,
            message: "entry has neither title nor author".into(),
        });
    }

    let publisher = get("publisher");
    let journal_or_venue = get("journal")
        .or_else(|| get("booktitle"))
        .or_else(|| get("howpublished"))
        .or_else(|| {
            if raw.entry_type == "book" {
                publisher.clone()
            } else {
                None
            }
        });

    let reference = Reference {
        raw_text: filter_latex(source),
        entry_type: Some(raw.entry_type),
        key,
        title,
        authors,
        journal_or_venue,
        year,
        doi: get("doi").as_deref().and_then(normalize_doi),
        volume: get("volume"),
        number: get("number").or_else(|| get("issue")),
        pages: get("pages").map(|p| normalize_page_range(&p)),
        publisher,
        expected_metadata: Some(fields),
    };
    Ok((reference, warnings))
}

/// Page ranges use a single hyphen in BibTeX output and internal records.
pub(crate) fn normalize_page_range(pages: &str) -> String {
    let p = pages.replace(['–', '—'], "-");
    let mut out = String::with_capacity(p.len());
    let mut last_dash = false;
    for c in p.chars() {
        if c == '-' {
            if !last_dash {
                out.push('-');
            }
            last_dash = true;
        } else {
            out.push(c);
            last_dash = false;
        }
    }
    out
}

const KEY_STOPWORDS: &[&str] = &["the", "a", "an", "on", "of", "for", "and", "with", "from"];

fn ascii_key_part(s: &str) -> String {
    deunicode(s)
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// `family + year + first significant title word`, ASCII lowercase, e.g.
/// `hendricks2020crossref`. Author-less records start with `unknown`.
pub fn generate_citation_key(record: &CandidateRecord) -> String {
    let family = record
        .authors
        .first()
        .map(|a| ascii_key_part(&a.family))
        .filter(|f| !f.is_empty())
        .unwrap_or_else(|| "unknown".to_string());
    let year = record.year.map(|y| y.to_string()).unwrap_or_default();
    let word = record
        .title
        .split_whitespace()
        .map(ascii_key_part)
        .find(|w| {
            w.chars().filter(char::is_ascii_alphabetic).count() > 3
                && !KEY_STOPWORDS.contains(&w.as_str())
        })
        .unwrap_or_default();
    format!("{family}{year}{word}")
}

/// Hands out batch-unique keys: the second `doe2020study` becomes
/// `doe2020studya`, the third `doe2020studyb`, and so on.
#[derive(Debug, Default)]
pub struct CitationKeys {
    used: HashSet<String>,
}

impl CitationKeys {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, base: &str) -> String {
        if self.used.insert(base.to_string()) {
            return base.to_string();
        }
        (0u64..)
            .map(|n| format!("{base}{}", alpha_suffix(n)))
            .find(|candidate| self.used.insert(candidate.clone()))
            .expect("suffix space is unbounded")
    }
}

/// 0 → "a", 25 → "z", 26 → "aa", ...
fn alpha_suffix(mut n: u64) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (n % 26) as u8);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

fn bibtex_entry_type(record_type: Option<&str>) -> &'static str {
    match record_type {
        Some("journal-article") => "article",
        Some("proceedings-article") => "inproceedings",
        Some("book") => "book",
        _ => "misc",
    }
}

/// Escapes characters that are special in BibTeX values. Braces and
/// backslashes from upstream data are dropped.
fn escape_value(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '{' | '}' | '\\' => {}
            '&' | '%' | '$' | '#' | '_' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            _ => out.push(c),
        }
    }
    out
}

/// Serializes one record. Fields appear in a fixed order and only when
/// present: title, author, journal/booktitle/publisher, year, volume,
/// number, pages, doi.
pub fn generate_bibtex(record: &CandidateRecord, key: &str) -> Result<String> {
    let title = record.title.trim();
    if title.is_empty() {
        return Err(Error::MissingTitle);
    }
    let entry_type = bibtex_entry_type(record.record_type.as_deref());
    let venue_field = match entry_type {
        "inproceedings" => "booktitle",
        "book" => "publisher",
        _ => "journal",
    };

    let mut fields: Vec<(&str, String)> = vec![("title", title.to_string())];
    if !record.authors.is_empty() {
        let authors = record
            .authors
            .iter()
            .map(Author::display_inverted)
            .collect::<Vec<_>>()
            .join(" and ");
        fields.push(("author", authors));
    }
    if let Some(venue) = &record.venue {
        fields.push((venue_field, venue.clone()));
    }
    if let Some(year) = record.year {
        fields.push(("year", year.to_string()));
    }
    let optional = [
        ("volume", record.volume.clone()),
        ("number", record.number.clone()),
        ("pages", record.pages.as_deref().map(normalize_page_range)),
        ("doi", record.doi.clone()),
    ];
    fields.extend(optional.into_iter().filter_map(|(n, v)| v.map(|v| (n, v))));

    let body = fields
        .iter()
        .map(|(name, value)| format!("  {name} = {{{}}}", escape_value(value)))
        .collect::<Vec<_>>()
        .join(",\n");
    Ok(format!("@{entry_type}{{{key},\n{body}\n}}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::SourceId;

    #[test]
    fn detects_kinds() {
        assert_eq!(detect_input_kind("@article{k, title={T}}").unwrap(), InputKind::BibTeX);
        assert_eq!(
            detect_input_kind("Smith, J. (2020). A paper.").unwrap(),
            InputKind::FreeTextSingle
        );
        assert_eq!(detect_input_kind("ref one\nref two").unwrap(), InputKind::FreeTextList);
        assert_eq!(detect_input_kind("  \n  @ARTICLE {x, title={T}}").unwrap(), InputKind::BibTeX);
        assert!(matches!(detect_input_kind(" \n\t"), Err(Error::EmptyInput)));
        // an @ inside a line does not make BibTeX
        assert_eq!(detect_input_kind("mail me@host{x}").unwrap(), InputKind::FreeTextSingle);
    }

    #[test]
    fn parses_a_full_entry() {
        let parsed = parse_bibtex(
            "@article{x, title={A Study}, author={Doe, Jane and Roe, Rick}, journal={Nature}, year={2020}}",
        )
        .unwrap();
        assert!(parsed.warnings.is_empty());
        let r = &parsed.references[0];
        assert_eq!(r.title.as_deref(), Some("A Study"));
        assert_eq!(
            r.authors.as_deref(),
            Some(&["Doe, Jane".to_string(), "Roe, Rick".to_string()][..])
        );
        assert_eq!(r.journal_or_venue.as_deref(), Some("Nature"));
        assert_eq!(r.year, Some(2020));
        assert_eq!(r.entry_type.as_deref(), Some("article"));
        assert_eq!(r.key.as_deref(), Some("x"));
    }

    #[test]
    fn parses_a_minimal_entry() {
        let parsed = parse_bibtex("@misc{y, title={Solo}}").unwrap();
        assert_eq!(parsed.references[0].title.as_deref(), Some("Solo"));
        assert_eq!(parsed.references[0].authors, None);
    }

    #[test]
    fn recovers_from_a_broken_entry() {
        let text = "@article{bad, title={unclosed\n@article{good, title={Fine}, year = 2019}\n";
        let parsed = parse_bibtex(text).unwrap();
        assert_eq!(parsed.references.len(), 1);
        assert_eq!(parsed.references[0].key.as_deref(), Some("good"));
        assert_eq!(parsed.references[0].year, Some(2019));
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].key.as_deref(), Some("bad"));
        assert_eq!(parsed.warnings[0].line, 1);
    }

    #[test]
    fn no_entries_is_an_error() {
        match parse_bibtex("@article{bad, title={never closed") {
            Err(Error::NoValidEntries { warnings }) => assert_eq!(warnings.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn handles_quotes_concatenation_and_latex() {
        let text = r#"@inproceedings{k,
            title = "The {BERT} \textit{Model}" # { Revisited},
            author = {M{\"u}ller, Hans and {Barnes and Noble} and others},
            booktitle = {Proc.~of ACL},
            pages = {10--20},
            doi = {https://doi.org/10.1/ABC},
        }"#;
        let r = &parse_bibtex(text).unwrap().references[0];
        assert_eq!(r.title.as_deref(), Some("The BERT Model Revisited"));
        assert_eq!(
            r.authors.as_deref(),
            Some(&["Müller, Hans".to_string(), "Barnes and Noble".to_string()][..])
        );
        assert_eq!(r.journal_or_venue.as_deref(), Some("Proc. of ACL"));
        assert_eq!(r.pages.as_deref(), Some("10-20"));
        assert_eq!(r.doi.as_deref(), Some("10.1/abc"));
    }

    #[test]
    fn skips_comment_blocks_and_bad_years() {
        let text = "@comment{ignore me}\n@string{foo = {bar}}\n@book{b, title={T}, year={19xx}}";
        let parsed = parse_bibtex(text).unwrap();
        assert_eq!(parsed.references.len(), 1);
        assert_eq!(parsed.references[0].year, None);
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].line, 3);
    }

    #[test]
    fn free_text_year() {
        let r = Reference::free_text("Doe, J. (2020). A Study. Nature, 5(2), 1–10.").unwrap();
        assert_eq!(r.year, Some(2020));
        assert!(!r.is_structured());
        let r = Reference::free_text("Doe J. A Study. Nature 1998;12:45").unwrap();
        assert_eq!(r.year, Some(1998));
        assert!(matches!(Reference::free_text("\\vspace{1mm}"), Err(Error::EmptyInput)));
    }

    #[test]
    fn splits_free_text_lists() {
        let parsed = parse_input("first ref 2001\n\n  second ref 2002 \n").unwrap();
        assert_eq!(parsed.kind, InputKind::FreeTextList);
        assert_eq!(parsed.references.len(), 2);
        assert_eq!(parsed.references[1].raw_text, "second ref 2002");
    }

    fn record(family: Option<&str>, year: Option<i32>, title: &str) -> CandidateRecord {
        let mut r = CandidateRecord::new(SourceId::CrossRef, title);
        r.authors = family.map(|f| Author::new(f, Some("G."))).into_iter().collect();
        r.year = year;
        r
    }

    #[test]
    fn citation_keys() {
        assert_eq!(
            generate_citation_key(&record(Some("Hendricks"), Some(2020), "The CrossRef Story")),
            "hendricks2020crossref"
        );
        assert_eq!(
            generate_citation_key(&record(None, Some(2022), "OpenAlex")),
            "unknown2022openalex"
        );
        assert_eq!(
            generate_citation_key(&record(Some("Gödel"), Some(1931), "With the Ünentscheidbare Sätze")),
            "godel1931unentscheidbare"
        );
        assert_eq!(
            generate_citation_key(&record(Some("van der Berg"), None, "A")),
            "vanderberg"
        );
    }

    #[test]
    fn key_collisions_get_suffixes() {
        let mut keys = CitationKeys::new();
        assert_eq!(keys.assign("doe2020study"), "doe2020study");
        assert_eq!(keys.assign("doe2020study"), "doe2020studya");
        assert_eq!(keys.assign("doe2020study"), "doe2020studyb");
        assert_eq!(alpha_suffix(25), "z");
        assert_eq!(alpha_suffix(26), "aa");
    }

    #[test]
    fn golden_article() {
        let mut r = record(None, Some(2020), "A");
        r.authors = vec![Author::new("Doe", Some("J."))];
        r.venue = Some("Nature".into());
        r.doi = Some("10.1/x".into());
        r.record_type = Some("journal-article".into());
        assert_eq!(
            generate_bibtex(&r, "doe2020a").unwrap(),
            "@article{doe2020a,\n  title = {A},\n  author = {Doe, J.},\n  journal = {Nature},\n  year = {2020},\n  doi = {10.1/x}\n}"
        );
    }

    #[test]
    fn omits_missing_fields_and_maps_types() {
        let mut r = record(Some("Doe"), Some(2020), "A Study");
        r.record_type = Some("proceedings-article".into());
        r.venue = Some("Proc. X".into());
        r.pages = Some("1–10".into());
        let out = generate_bibtex(&r, "k").unwrap();
        assert!(out.starts_with("@inproceedings{k,"));
        assert!(out.contains("  booktitle = {Proc. X},"));
        assert!(out.contains("  pages = {1-10}"));
        assert!(!out.contains("doi"));

        r.title.clear();
        assert!(matches!(generate_bibtex(&r, "k"), Err(Error::MissingTitle)));
    }

    #[test]
    fn special_characters_survive_a_round_trip() {
        let mut r = record(Some("Doe"), Some(2020), "R&D at 50% cost_model #1 ~ $x$");
        r.record_type = Some("journal-article".into());
        let text = generate_bibtex(&r, "k").unwrap();
        let back = &parse_bibtex(&text).unwrap().references[0];
        assert_eq!(back.title.as_deref(), Some(r.title.as_str()));
    }
}
