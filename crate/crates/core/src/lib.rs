//! Verification of bibliographic references against CrossRef, Semantic
//! Scholar and OpenAlex.
//!
//! The flow for one reference is: strip LaTeX markup, parse (BibTeX or free
//! text), query CrossRef for its top three candidates, score them with
//! normalized Levenshtein similarity, and fall back to the other two
//! sources when the score is low or issues were found. Authors are then
//! cross-checked across sources and the result is rendered as an APA
//! citation and a corrected BibTeX record.

pub mod bibtex;
mod error;
pub mod latex;
pub mod matching;
pub mod output;
pub mod pipeline;
pub mod record;
pub mod scoring;
pub mod similarity;
pub mod sources;

pub use bibtex::{
    detect_input_kind, generate_bibtex, generate_citation_key, parse_bibtex, parse_input,
    CitationKeys, InputKind, ParseWarning, ParsedInput, Reference,
};
pub use error::{Error, Result};
pub use latex::filter_latex;
pub use matching::{Issue, IssueCode, MatchEvaluation};
pub use output::{export_bibtex, format_apa, render_report, Report, ReportFormat, Summary};
pub use pipeline::{BatchSummary, VerificationResult, Verifier, VerifierConfig};
pub use record::{normalize_doi, Author, CandidateRecord, SourceId};
pub use scoring::{Confidence, Verdict};
pub use similarity::{levenshtein, normalize, similarity, SimilarityScore};
pub use sources::{FixtureTransport, HttpTransport, SourceError, SourceSettings, Transport};
