use criterion::{criterion_group, criterion_main, Criterion};
use refcheck_core::{filter_latex, levenshtein, parse_bibtex, FixtureTransport, Verifier, VerifierConfig};
use std::hint::black_box;
use std::path::PathBuf;
use std::sync::Arc;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/corpus")
}

fn similarity(c: &mut Criterion) {
    let a = "Attention is all you need: transformers for sequence transduction";
    let b = "Attention mechanisms for quantum protein folding in sequence models";
    c.bench_function("levenshtein/64 chars", |bench| bench.iter(|| levenshtein(black_box(a), black_box(b))));
}

fn latex(c: &mut Criterion) {
    let text = "\\vspace{2mm}\\noindent LeCun, Y., Bengio, Y., \\& Hinton, G. (2015). \
                \\textit{Deep learning}. \\emph{Nature}, 521(7553), 436--444. % cited twice\n\
                G\\\"{o}del, K. \\hspace*{1em}\\mymacro{Kept}";
    c.bench_function("filter_latex/reference", |bench| bench.iter(|| filter_latex(black_box(text))));
}

fn bibtex(c: &mut Criterion) {
    let entry = std::fs::read_to_string(corpus().join("inputs/05_hallucination.bib")).unwrap();
    let file: String = (0..50).map(|i| entry.replace("ji2022survey", &format!("ji2022survey{i}"))).collect();
    c.bench_function("parse_bibtex/50 entries", |bench| bench.iter(|| parse_bibtex(black_box(&file)).unwrap()));
}

fn pipeline(c: &mut Criterion) {
    let transport = FixtureTransport::load(corpus().join("responses")).unwrap();
    let verifier = Verifier::new(Arc::new(transport), VerifierConfig::default());
    let mut group = c.benchmark_group("verify_reference");
    for (name, file) in [("primary only", "02_crossref_qss.txt"), ("with fallback", "07_deep_learning_extra_author.txt")] {
        let text = std::fs::read_to_string(corpus().join("inputs").join(file)).unwrap();
        group.bench_function(name, |bench| bench.iter(|| verifier.verify_reference(black_box(&text)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, similarity, latex, bibtex, pipeline);
criterion_main!(benches);
