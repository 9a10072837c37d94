//! Offline playback of recorded API responses.
//!
//! A fixture directory holds pairs of files:
//!
//! ```text
//! crossref_attention.json       verbatim response body
//! crossref_attention.meta.json  {"url": "<pattern>", "status": 200}
//! ```
//!
//! The sidecar's `url` is matched against the request URL with its query
//! string percent-decoded (`+` read as a space). `*` matches any run of
//! characters and matching ignores ASCII case. Sidecars are tried in file
//! name order and the first match wins. An optional `"body"` key names a
//! different body file; a missing body file means an empty body.

use super::{HttpRequest, HttpResponse, Transport, TransportError};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use url::Url;

const SIDECAR_SUFFIX: &str = ".meta.json";

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    url: String,
    #[serde(default = "ok_status")]
    status: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    body: Option<String>,
}

fn ok_status() -> u16 {
    200
}

#[derive(Debug, Clone)]
struct Fixture {
    name: String,
    pattern: String,
    status: u16,
    body: Vec<u8>,
}

/// Deterministic, offline [`Transport`] backed by a fixture directory.
#[derive(Debug, Clone)]
pub struct FixtureTransport {
    fixtures: Vec<Fixture>,
}

impl FixtureTransport {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut sidecars: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::Fixture(format!("{}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(SIDECAR_SUFFIX))
            .collect();
        sidecars.sort();

        let mut fixtures = Vec::with_capacity(sidecars.len());
        for path in sidecars {
            let text = fs::read_to_string(&path)?;
            let sidecar: Sidecar = serde_json::from_str(&text)
                .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
            let file_name = path.file_name().unwrap_or_default().to_string_lossy().to_string();
            let stem = file_name.trim_end_matches(SIDECAR_SUFFIX).to_string();
            let body_path = dir.join(sidecar.body.clone().unwrap_or_else(|| format!("{stem}.json")));
            let body = if body_path.exists() {
                fs::read(&body_path)?
            } else {
                Vec::new()
            };
            fixtures.push(Fixture {
                name: stem,
                pattern: sidecar.url,
                status: sidecar.status,
                body,
            });
        }
        Ok(FixtureTransport { fixtures })
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }

    /// Name of the fixture that would answer `url`, if any.
    pub fn matching_fixture(&self, url: &str) -> Option<&str> {
        let decoded = decoded_url(url);
        self.fixtures
            .iter()
            .find(|f| glob_match(&f.pattern, &decoded))
            .map(|f| f.name.as_str())
    }
}

impl Transport for FixtureTransport {
    fn execute(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
        let decoded = decoded_url(&request.url);
        self.fixtures
            .iter()
            .find(|f| glob_match(&f.pattern, &decoded))
            .map(|f| HttpResponse {
                status: f.status,
                body: f.body.clone(),
                retry_after: None,
            })
            .ok_or(TransportError::NoFixture(decoded))
    }
}

/// Writes every response of an inner transport as a fixture pair whose
/// pattern is the exact decoded URL.
pub struct RecordingTransport<T> {
    inner: T,
    dir: PathBuf,
    counter: AtomicUsize,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let existing = fs::read_dir(&dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(SIDECAR_SUFFIX))
            .count();
        Ok(RecordingTransport {
            inner,
            dir,
            counter: AtomicUsize::new(existing),
        })
    }

    fn save(&self, url: &str, response: &HttpResponse) -> std::io::Result<()> {
        let n = self.counter.fetch_add(1, Ordering::SeqCst);
        let host = Url::parse(url)
            .ok()
            .and_then(|u| u.host_str().map(str::to_string))
            .unwrap_or_default();
        let label = host.trim_start_matches("api.").split('.').next().unwrap_or("source").to_string();
        let stem = format!("{label}_{n:04}");
        fs::write(self.dir.join(format!("{stem}.json")), &response.body)?;
        let sidecar = Sidecar {
            url: decoded_url(url),
            status: response.status,
            body: None,
        };
        let text = serde_json::to_string_pretty(&sidecar).map_err(std::io::Error::other)?;
        fs::write(self.dir.join(format!("{stem}{SIDECAR_SUFFIX}")), text + "\n")
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn execute(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
        let response = self.inner.execute(request)?;
        if let Err(e) = self.save(&request.url, &response) {
            log::warn!("could not record fixture for {}: {e}", request.url);
        }
        Ok(response)
    }
}

/// `scheme://host/path?k=v&...` with query values percent-decoded.
pub fn decoded_url(url: &str) -> String {
    let Ok(parsed) = Url::parse(url) else {
        return url.to_string();
    };
    let mut out = format!(
        "{}://{}{}",
        parsed.scheme(),
        parsed.host_str().unwrap_or_default(),
        parsed.path()
    );
    let pairs: Vec<String> = parsed
        .query_pairs()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    if !pairs.is_empty() {
        out.push('?');
        out.push_str(&pairs.join("&"));
    }
    out
}

/// Whole-string glob match where `*` matches any run of characters.
/// ASCII case is ignored.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().map(|c| c.to_ascii_lowercase()).collect();
    let t: Vec<char> = text.chars().map(|c| c.to_ascii_lowercase()).collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if pi < p.len() && p[pi] == t[ti] {
            pi += 1;
            ti += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}
