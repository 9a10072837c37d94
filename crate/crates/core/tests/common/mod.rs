#![allow(dead_code)]

use refcheck_core::{FixtureTransport, VerificationResult, Verifier, VerifierConfig};
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

pub const FIXED_TIMESTAMP: &str = "2026-01-01T00:00:00Z";

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

pub fn responses_dir() -> PathBuf {
    corpus_dir().join("responses")
}

/// `(file name, contents)` of every corpus input, in file name order.
pub fn corpus_inputs() -> Vec<(String, String)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(corpus_dir().join("inputs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().to_string();
            (name, fs::read_to_string(&p).unwrap())
        })
        .collect()
}

pub fn corpus_verifier() -> Verifier {
    let transport = FixtureTransport::load(responses_dir()).unwrap();
    Verifier::new(Arc::new(transport), VerifierConfig::default())
}

pub fn run_corpus() -> Vec<(String, VerificationResult)> {
    let verifier = corpus_verifier();
    corpus_inputs()
        .into_iter()
        .map(|(name, text)| {
            let result = verifier.verify_reference(&text).unwrap();
            (name, result)
        })
        .collect()
}
