use crate::bibtex::ParseWarning;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,
    #[error("no valid BibTeX entries found ({} warnings)", warnings.len())]
    NoValidEntries { warnings: Vec<ParseWarning> },
    #[error("record has no title")]
    MissingTitle,
    #[error("no candidates to evaluate")]
    EmptyCandidateSet,
    #[error("no records to merge")]
    NoRecords,
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
