mod common;

use common::{corpus_inputs, corpus_verifier, responses_dir, run_corpus};
use refcheck_core::sources::{HttpRequest, HttpResponse, TransportError};
use refcheck_core::{
    parse_input, Error, FixtureTransport, IssueCode, SourceId, Transport, Verdict, Verifier, VerifierConfig,
};
use std::sync::{Arc, Mutex};
use std::time::Duration;

/// Answers every request the same way and remembers the URLs.
struct Canned {
    answer: Result<HttpResponse, TransportError>,
    seen: Mutex<Vec<String>>,
}

impl Canned {
    fn new(answer: Result<HttpResponse, TransportError>) -> Arc<Self> {
        Arc::new(Canned {
            answer,
            seen: Mutex::new(Vec::new()),
        })
    }
}

impl Transport for Canned {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.seen.lock().unwrap().push(request.url.clone());
        self.answer.clone()
    }
}

fn fast_config() -> VerifierConfig {
    let mut config = VerifierConfig::default();
    config.settings.retry_backoff = Duration::ZERO;
    config.rate_limit = Duration::ZERO;
    config
}

#[test]
fn verified_records_carry_the_fixture_doi() {
    let expected = [
        ("01_attention.bib", "10.5555/3295222.3295349"),
        ("04_deep_learning.txt", "10.1038/nature14539"),
    ];
    let results = run_corpus();
    for (name, doi) in expected {
        let (_, result) = results.iter().find(|(n, _)| n == name).unwrap();
        let corrected = result.corrected.as_ref().unwrap();
        assert_eq!(corrected.doi.as_deref().map(str::to_lowercase).as_deref(), Some(doi), "{name}");
        assert!(result.bibtex.as_deref().unwrap().to_lowercase().contains(doi), "{name}");
    }
}

#[test]
fn fallback_runs_exactly_when_needed() {
    for (name, result) in run_corpus() {
        let c = &result.confidence;
        let clean_primary = c.bonus_applied == 0.0 && c.pre_penalty >= 70.0 && result.issues.is_empty();
        if result.fallback_used {
            if result.corrected.is_some() {
                assert!(result.sources_consulted.contains(&SourceId::OpenAlex), "{name}");
                assert!(result.sources_consulted.contains(&SourceId::SemanticScholar), "{name}");
            }
        } else {
            assert!(clean_primary, "{name}: skipped fallback with {c:?}");
            assert!(!result.sources_consulted.contains(&SourceId::OpenAlex), "{name}");
        }
    }
}

#[test]
fn fabricated_references_are_caught() {
    for (name, result) in run_corpus().into_iter().skip(5) {
        let flagged = result.issues.iter().any(|i| i.code == IssueCode::FakeAuthor);
        assert!(result.verdict == Verdict::NotFound || flagged, "{name}: {:?}", result.verdict);
        assert!(result.apa.is_none() || flagged, "{name}");
    }
}

#[test]
fn conflicting_dois_are_reported() {
    let results = run_corpus();
    let (_, result) = results.iter().find(|(n, _)| n == "10_attention_extra_author.bib").unwrap();
    assert!(result.warnings.iter().any(|w| w.contains("DOI")), "{:?}", result.warnings);
}

#[test]
fn unreachable_sources_are_flagged() {
    let transport = Canned::new(Err(TransportError::Connect("refused".into())));
    let verifier = Verifier::new(transport.clone(), fast_config());
    let result = verifier.verify_reference("Doe, J. (2020). A study. Nature.").unwrap();
    assert!(result.unreachable);
    assert_eq!(result.verdict, Verdict::NotFound);
    assert!(!result.warnings.is_empty());
    assert_eq!(result.sources_consulted.len(), 3);
    // one retry per source
    assert_eq!(transport.seen.lock().unwrap().len(), 6);
}

#[test]
fn malformed_bodies_become_warnings() {
    let transport = Canned::new(Ok(HttpResponse {
        status: 200,
        body: b"<html>not json</html>".to_vec(),
        retry_after: None,
    }));
    let verifier = Verifier::new(transport, fast_config());
    let result = verifier.verify_reference("Doe, J. (2020). A study. Nature.").unwrap();
    assert!(!result.unreachable);
    assert_eq!(result.verdict, Verdict::NotFound);
    assert!(result.warnings.iter().any(|w| w.contains("malformed")), "{:?}", result.warnings);
}

#[test]
fn batch_emits_in_input_order() {
    let text: String = corpus_inputs()
        .into_iter()
        .filter(|(n, _)| n.ends_with(".bib"))
        .map(|(_, t)| t)
        .collect::<Vec<_>>()
        .join("\n");
    let references = parse_input(&text).unwrap().references;
    let keys: Vec<Option<String>> = references.iter().map(|r| r.key.clone()).collect();

    let transport = FixtureTransport::load(responses_dir()).unwrap();
    let verifier = Verifier::new(Arc::new(transport), fast_config());
    let mut emitted = Vec::new();
    let summary = verifier.verify_batch(&references, |i, r| emitted.push((i, r.key.clone())));
    assert_eq!(emitted.len(), references.len());
    for (n, (i, key)) in emitted.into_iter().enumerate() {
        assert_eq!(i, n);
        assert_eq!(key, keys[n]);
    }
    assert_eq!(summary.total, references.len());
}

#[test]
fn single_reference_mode_warns_about_extra_entries() {
    let verifier = corpus_verifier();
    let inputs = corpus_inputs();
    let text = format!("{}\n{}", inputs[0].1, inputs[2].1);
    let result = verifier.verify_reference(&text).unwrap();
    assert!(result.warnings.iter().any(|w| w.contains("1 further reference")), "{:?}", result.warnings);
}

#[test]
fn blank_input_is_rejected() {
    let verifier = corpus_verifier();
    assert!(matches!(verifier.verify_reference(" \n\t "), Err(Error::EmptyInput)));
}
