//! HTTP-backed provider with record/replay.
//!
//! Wire contract: `GET <base>/total` → `{"n": <int>}`,
//! `GET <base>/count?t=<term>[&t=<term>...]` → `{"count": <int>}`.
//! Every live response can be recorded; replay mode serves the log and is
//! fully network-free, failing on any unlogged query.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;
use std::sync::Mutex;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{FrequencyProvider, ProviderError, TermSet};

const LOG_HEADER: &str = "NWD-REPLAY v1";
/// Query-string escaping: reserve the URL metacharacters on top of the
/// snapshot escape set.
const QUERY_ESCAPE: &AsciiSet = &CONTROLS
    .add(b'%')
    .add(b'&')
    .add(b'=')
    .add(b'+')
    .add(b'#')
    .add(b'?')
    .add(b'/')
    .add(b' ');

#[derive(Deserialize)]
struct TotalBody {
    n: u64,
}

#[derive(Deserialize)]
struct CountBody {
    count: u64,
}

/// Request path (with query) for a count, terms in sorted order so that a
/// term set always maps to one request string.
fn count_request(terms: &TermSet) -> String {
    let qs: Vec<String> = terms
        .terms()
        .iter()
        .map(|t| format!("t={}", utf8_percent_encode(t, QUERY_ESCAPE)))
        .collect();
    format!("/count?{}", qs.join("&"))
}

/// An append-only record of (request, response body) pairs, one per line,
/// with a trailing session hash. Fields are percent-encoded and
/// tab-separated like snapshot entries.
#[derive(Debug, Default, Clone)]
pub struct ReplayLog {
    records: Vec<(String, String)>,
}

impl ReplayLog {
    pub fn new() -> Self {
        ReplayLog::default()
    }

    pub fn push(&mut self, request: String, body: String) {
        self.records.push((request, body));
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn body(&self) -> String {
        let mut out = String::new();
        out.push_str(LOG_HEADER);
        out.push('\n');
        for (req, resp) in &self.records {
            out.push_str(&utf8_percent_encode(req, super::snapshot::TERM_ESCAPE).to_string());
            out.push('\t');
            out.push_str(&utf8_percent_encode(resp, super::snapshot::TERM_ESCAPE).to_string());
            out.push('\n');
        }
        out
    }

    pub fn session_hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.body().as_bytes()))
    }

    pub fn to_string_form(&self) -> String {
        let body = self.body();
        format!("{body}HASH {}\n", self.session_hash())
    }

    pub fn save(&self, path: &Path) -> Result<(), ProviderError> {
        std::fs::write(path, self.to_string_form()).map_err(|source| ProviderError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ProviderError> {
        let malformed = |line: usize, reason: &str| ProviderError::MalformedSnapshot {
            line,
            reason: reason.to_string(),
        };
        let mut log = ReplayLog::new();
        let mut lines = text.lines().enumerate().peekable();
        let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty replay log"))?;
        if header != LOG_HEADER {
            return Err(malformed(1, "missing NWD-REPLAY v1 header"));
        }
        let mut hash_line = None;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if let Some(h) = line.strip_prefix("HASH ") {
                hash_line = Some((lineno, h.to_string()));
                continue;
            }
            if hash_line.is_some() {
                return Err(malformed(lineno, "content after session hash"));
            }
            let (req, resp) = line
                .split_once('\t')
                .ok_or_else(|| malformed(lineno, "expected request<TAB>response"))?;
            let req = percent_decode_str(req)
                .decode_utf8()
                .map_err(|_| malformed(lineno, "bad request encoding"))?;
            let resp = percent_decode_str(resp)
                .decode_utf8()
                .map_err(|_| malformed(lineno, "bad response encoding"))?;
            log.push(req.into_owned(), resp.into_owned());
        }
        let (lineno, recorded) =
            hash_line.ok_or_else(|| malformed(text.lines().count(), "missing HASH line"))?;
        if recorded != log.session_hash() {
            return Err(malformed(lineno, "session hash mismatch"));
        }
        Ok(log)
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProviderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

enum Mode {
    Live {
        base: String,
        log: Mutex<ReplayLog>,
    },
    Replay {
        responses: HashMap<String, String>,
        session: String,
    },
}

/// Frequency provider over the HTTP wire contract.
pub struct RemoteProvider {
    mode: Mode,
    cached_total: Mutex<Option<u64>>,
}

impl RemoteProvider {
    /// Live provider; every response is also recorded in memory and can be
    /// written out with [`RemoteProvider::save_log`].
    pub fn new(endpoint: impl Into<String>) -> Self {
        let base = endpoint.into().trim_end_matches('/').to_string();
        RemoteProvider {
            mode: Mode::Live {
                base,
                log: Mutex::new(ReplayLog::new()),
            },
            cached_total: Mutex::new(None),
        }
    }

    /// Network-free provider serving a previously recorded session.
    pub fn replay(log: ReplayLog) -> Self {
        let session = log.session_hash();
        let responses = log.records.into_iter().collect();
        RemoteProvider {
            mode: Mode::Replay { responses, session },
            cached_total: Mutex::new(None),
        }
    }

    pub fn replay_from(path: &Path) -> Result<Self, ProviderError> {
        Ok(Self::replay(ReplayLog::load(path)?))
    }

    /// Snapshot of the recording so far (live mode only).
    pub fn log(&self) -> ReplayLog {
        match &self.mode {
            Mode::Live { log, .. } => log.lock().unwrap().clone(),
            Mode::Replay { .. } => ReplayLog::new(),
        }
    }

    pub fn save_log(&self, path: &Path) -> Result<(), ProviderError> {
        self.log().save(path)
    }

    fn fetch(&self, request: &str) -> Result<String, ProviderError> {
        match &self.mode {
            Mode::Live { base, log } => {
                let url = format!("{base}{request}");
                let mut resp = ureq::get(&url)
                    .call()
                    .map_err(|e| ProviderError::ProviderFailure(format!("GET {url}: {e}")))?;
                let mut body = String::new();
                resp.body_mut()
                    .as_reader()
                    .read_to_string(&mut body)
                    .map_err(|e| ProviderError::ProviderFailure(format!("GET {url}: {e}")))?;
                log.lock().unwrap().push(request.to_string(), body.clone());
                Ok(body)
            }
            Mode::Replay { responses, .. } => responses
                .get(request)
                .cloned()
                .ok_or_else(|| ProviderError::ReplayMiss(request.to_string())),
        }
    }

    fn fetch_total(&self) -> Result<u64, ProviderError> {
        let mut cached = self.cached_total.lock().unwrap();
        if let Some(n) = *cached {
            return Ok(n);
        }
        let body = self.fetch("/total")?;
        let parsed: TotalBody = serde_json::from_str(&body)
            .map_err(|e| ProviderError::ProviderFailure(format!("bad /total body: {e}")))?;
        if parsed.n == 0 {
            return Err(ProviderError::ProviderFailure(
                "server reports zero indexed documents".to_string(),
            ));
        }
        *cached = Some(parsed.n);
        Ok(parsed.n)
    }
}

impl FrequencyProvider for RemoteProvider {
    fn count(&self, terms: &TermSet) -> Result<u64, ProviderError> {
        let n = self.fetch_total()?;
        let request = count_request(terms);
        let body = self.fetch(&request)?;
        let parsed: CountBody = serde_json::from_str(&body)
            .map_err(|e| ProviderError::ProviderFailure(format!("bad {request} body: {e}")))?;
        if parsed.count > n {
            return Err(ProviderError::ProviderFailure(format!(
                "server returned count {} > N {} for {}",
                parsed.count, n, terms
            )));
        }
        Ok(parsed.count)
    }

    fn total(&self) -> Result<u64, ProviderError> {
        self.fetch_total()
    }

    fn id(&self) -> String {
        match &self.mode {
            Mode::Live { base, .. } => format!("remote:{base}"),
            Mode::Replay { session, .. } => format!("replay:{}", &session[..16]),
        }
    }
}
