//! `refcheck`: check references against CrossRef, Semantic Scholar and
//! OpenAlex from the command line.

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use refcheck_core::output::{render_result, render_summary};
use refcheck_core::sources::RecordingTransport;
use refcheck_core::{
    export_bibtex, parse_input, render_report, BatchSummary, FixtureTransport, HttpTransport,
    InputKind, Reference, Report, ReportFormat, SourceSettings, Transport, VerificationResult,
    Verifier, VerifierConfig,
};
use std::io::{self, IsTerminal, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Quick for a single free-text reference, batch otherwise.
    Auto,
    Quick,
    Batch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Verify bibliographic references against CrossRef, Semantic Scholar and OpenAlex.
///
/// Exit status: 0 all verified, 1 some partial or not found, 2 usage or
/// input error, 3 every source unreachable.
#[derive(Debug, Parser)]
#[command(name = "refcheck", version)]
struct Cli {
    /// Reference text, a file path, or `-` for standard input.
    input: String,

    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write corrected BibTeX for every found reference to this file.
    #[arg(long, value_name = "PATH")]
    export: Option<PathBuf>,

    /// Minimum spacing between requests to the same source in batch mode.
    #[arg(long, value_name = "MS", default_value_t = 800)]
    rate_limit_ms: u64,

    /// Answer requests from recorded fixtures in DIR instead of the network.
    #[arg(long, value_name = "DIR", env = "REFCHECK_OFFLINE", conflicts_with = "record")]
    offline: Option<PathBuf>,

    /// Save every live response as a fixture in DIR.
    #[arg(long, value_name = "DIR")]
    record: Option<PathBuf>,

    /// Contact e-mail sent to the APIs' polite pools.
    #[arg(long, value_name = "EMAIL", env = "REFCHECK_CONTACT")]
    contact: Option<String>,

    /// Refuse inputs with more references than this.
    #[arg(long, value_name = "N", default_value_t = 500)]
    max_refs: usize,

    /// More log output on stderr (-v warnings, -vv info, -vvv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "error",
        1 => "warn",
        2 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("refcheck: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let text = read_input(&cli.input)?;
    let parsed = parse_input(&text)?;
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    let references = parsed.references;
    if references.len() > cli.max_refs {
        bail!(
            "{} references exceed the limit of {} (see --max-refs)",
            references.len(),
            cli.max_refs
        );
    }
    let batch = match cli.mode {
        Mode::Batch => true,
        Mode::Quick if references.len() > 1 => {
            bail!("quick mode checks one reference but the input holds {}", references.len())
        }
        Mode::Quick => false,
        Mode::Auto => parsed.kind != InputKind::FreeTextSingle,
    };

    let verifier = Verifier::new(transport(cli)?, config(cli));
    let results = if batch {
        run_batch(&verifier, &references, cli.format)?
    } else {
        let result = verifier.verify(&references[0]);
        if cli.format == Format::Text {
            print!("{}", render_result(0, &result));
        }
        vec![result]
    };

    let report = Report::new(results, generated_at()?);
    if cli.format == Format::Json {
        print!("{}", render_report(&report, ReportFormat::Json));
    }
    if let Some(path) = &cli.export {
        write_export(path, &report)?;
    }
    Ok(exit_code(&report.summary))
}

fn read_input(input: &str) -> anyhow::Result<String> {
    if input == "-" {
        let mut text = String::new();
        if io::stdin().is_terminal() {
            eprintln!("reading references from standard input, end with Ctrl-D");
        }
        io::stdin().read_to_string(&mut text).context("reading standard input")?;
        return Ok(text);
    }
    let path = Path::new(input);
    if path.is_file() {
        return std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()));
    }
    Ok(input.to_string())
}

fn config(cli: &Cli) -> VerifierConfig {
    VerifierConfig {
        settings: SourceSettings {
            contact_email: cli.contact.clone().filter(|c| !c.trim().is_empty()),
            ..SourceSettings::default()
        },
        rate_limit: Duration::from_millis(cli.rate_limit_ms),
    }
}

fn transport(cli: &Cli) -> anyhow::Result<Arc<dyn Transport>> {
    if let Some(dir) = &cli.offline {
        let fixtures = FixtureTransport::load(dir).context("loading offline fixtures")?;
        log::info!("answering from {} fixtures in {}", fixtures.len(), dir.display());
        return Ok(Arc::new(fixtures));
    }
    let http = HttpTransport::new(&config(cli).settings.user_agent())?;
    Ok(match &cli.record {
        Some(dir) => Arc::new(RecordingTransport::new(http, dir).context("preparing record directory")?),
        None => Arc::new(http),
    })
}

/// Streams each result as soon as it is ready: to stdout for text output,
/// as one progress line on stderr when stdout is reserved for JSON.
fn run_batch(verifier: &Verifier, references: &[Reference], format: Format) -> anyhow::Result<Vec<VerificationResult>> {
    let total = references.len();
    let mut results = Vec::with_capacity(total);
    let mut stdout = io::stdout().lock();
    let mut failed: Option<io::Error> = None;
    let summary = verifier.verify_batch(references, |i, result| {
        let written = match format {
            Format::Text => writeln!(stdout, "{}", render_result(i, result)).and_then(|_| stdout.flush()),
            Format::Json => {
                let name = result.key.as_deref().unwrap_or("reference");
                eprintln!(
                    "[{}/{total}] {} {} ({:.1}%)",
                    i + 1,
                    result.verdict.label(),
                    name,
                    result.confidence.value
                );
                Ok(())
            }
        };
        if let Err(e) = written {
            failed.get_or_insert(e);
        }
        results.push(result.clone());
    });
    if let Some(e) = failed {
        return Err(e).context("writing results");
    }
    if format == Format::Text {
        write!(stdout, "{}", render_summary(&summary))?;
    }
    Ok(results)
}

fn write_export(path: &Path, report: &Report) -> anyhow::Result<()> {
    let bib = export_bibtex(report);
    std::fs::write(path, &bib).with_context(|| format!("writing {}", path.display()))?;
    let entries = bib.matches("\n@").count() + usize::from(bib.starts_with('@'));
    eprintln!("wrote {entries} BibTeX entries to {}", path.display());
    Ok(())
}

/// RFC 3339 time of the run. `SOURCE_DATE_EPOCH` pins it for reproducible output.
fn generated_at() -> anyhow::Result<String> {
    let time = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(secs) => {
            let secs: i64 = secs.trim().parse().context("SOURCE_DATE_EPOCH is not an integer")?;
            chrono::DateTime::from_timestamp(secs, 0).context("SOURCE_DATE_EPOCH is out of range")?
        }
        Err(_) => chrono::Utc::now(),
    };
    Ok(time.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

fn exit_code(summary: &BatchSummary) -> u8 {
    if summary.total > 0 && summary.errors == summary.total {
        3
    } else if summary.verified == summary.total {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(verified: usize, partial: usize, not_found: usize, errors: usize) -> BatchSummary {
        BatchSummary {
            total: verified + partial + not_found + errors,
            verified,
            partial,
            not_found,
            errors,
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&summary(3, 0, 0, 0)), 0);
        assert_eq!(exit_code(&summary(2, 1, 0, 0)), 1);
        assert_eq!(exit_code(&summary(2, 0, 1, 0)), 1);
        assert_eq!(exit_code(&summary(1, 0, 0, 1)), 1);
        assert_eq!(exit_code(&summary(0, 0, 0, 2)), 3);
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from(["refcheck", "--mode", "batch", "--format", "json", "--rate-limit-ms", "0", "x"]).unwrap();
        assert_eq!(cli.mode, Mode::Batch);
        assert_eq!(cli.format, Format::Json);
        assert_eq!(cli.rate_limit_ms, 0);
        assert!(Cli::try_parse_from(["refcheck"]).is_err());
        assert!(Cli::try_parse_from(["refcheck", "--offline", "a", "--record", "b", "x"]).is_err());
    }
}
