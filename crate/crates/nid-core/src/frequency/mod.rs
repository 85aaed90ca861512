//! Term and co-occurrence statistics: the `f(x)`, `f(x,y)`, `N` numbers
//! behind the Web distances. Providers are an offline corpus indexer, an
//! immutable snapshot file, and a remote HTTP client with record/replay.

mod index;
mod remote;
mod snapshot;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

pub use index::{index_corpus, CorpusIndex, TOKENIZER_VERSION};
pub use remote::{RemoteProvider, ReplayLog};
pub use snapshot::FrequencySnapshot;

/// Maximum number of terms a provider must count jointly. Three covers the
/// conditional distance (x, y, and the condition term).
pub const MAX_ARITY: usize = 3;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("term sets hold 1 to {MAX_ARITY} terms, got {0}")]
    ArityUnsupported(usize),
    #[error("empty term set")]
    EmptyTermSet,
    #[error("snapshot is open-world and has no entry for {0}")]
    MissingEntry(String),
    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),
    #[error("malformed snapshot at line {line}: {reason}")]
    MalformedSnapshot { line: usize, reason: String },
    #[error("provider failure: {0}")]
    ProviderFailure(String),
    #[error("replay log has no response for {0:?}")]
    ReplayMiss(String),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A sorted, deduplicated set of 1–3 terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermSet {
    terms: Vec<String>,
}

impl TermSet {
    pub fn new<I, S>(terms: I) -> Result<Self, ProviderError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut terms: Vec<String> = terms.into_iter().map(Into::into).collect();
        let arity = terms.len();
        terms.sort();
        terms.dedup();
        if terms.is_empty() {
            return Err(ProviderError::EmptyTermSet);
        }
        if arity > MAX_ARITY {
            return Err(ProviderError::ArityUnsupported(arity));
        }
        Ok(TermSet { terms })
    }

    pub fn single(t: impl Into<String>) -> Self {
        TermSet::new([t.into()]).expect("one term is a valid set")
    }

    pub fn pair(a: impl Into<String>, b: impl Into<String>) -> Self {
        TermSet::new([a.into(), b.into()]).expect("two terms are a valid set")
    }

    pub fn triple(a: impl Into<String>, b: impl Into<String>, c: impl Into<String>) -> Self {
        TermSet::new([a.into(), b.into(), c.into()]).expect("three terms are a valid set")
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All term sets formed by removing one term; empty for singletons.
    pub fn proper_subsets(&self) -> Vec<TermSet> {
        if self.terms.len() < 2 {
            return Vec::new();
        }
        (0..self.terms.len())
            .map(|skip| {
                let rest: Vec<String> = self
                    .terms
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, t)| t.clone())
                    .collect();
                TermSet { terms: rest }
            })
            .collect()
    }
}

impl std::fmt::Display for TermSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.terms.join(" + "))
    }
}

/// Document-count statistics: `count` is the number of documents containing
/// every term of the set, `total` the universe size `N`.
///
/// Implementations must be monotone under term-set superset
/// (`count({x,y}) ≤ count({x})`), bounded by `total`, and deterministic
/// within a session for the snapshot and replay backends.
pub trait FrequencyProvider: Send + Sync {
    fn count(&self, terms: &TermSet) -> Result<u64, ProviderError>;
    fn total(&self) -> Result<u64, ProviderError>;

    /// Stable identifier used in provenance fingerprints.
    fn id(&self) -> String;
}

/// Memoizing wrapper: each distinct term set is fetched from the inner
/// provider at most once. Also counts underlying fetches, which makes
/// query budgets testable.
pub struct CachedProvider<P> {
    inner: P,
    cache: Mutex<HashMap<TermSet, u64>>,
    total: Mutex<Option<u64>>,
    fetches: AtomicUsize,
}

impl<P: FrequencyProvider> CachedProvider<P> {
    pub fn new(inner: P) -> Self {
        CachedProvider {
            inner,
            cache: Mutex::new(HashMap::new()),
            total: Mutex::new(None),
            fetches: AtomicUsize::new(0),
        }
    }

    /// Number of count() calls that reached the inner provider.
    pub fn fetches(&self) -> usize {
        self.fetches.load(Ordering::SeqCst)
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: FrequencyProvider> FrequencyProvider for CachedProvider<P> {
    fn count(&self, terms: &TermSet) -> Result<u64, ProviderError> {
        if let Some(&v) = self.cache.lock().unwrap().get(terms) {
            return Ok(v);
        }
        let v = self.inner.count(terms)?;
        self.fetches.fetch_add(1, Ordering::SeqCst);
        self.cache.lock().unwrap().insert(terms.clone(), v);
        Ok(v)
    }

    fn total(&self) -> Result<u64, ProviderError> {
        let mut total = self.total.lock().unwrap();
        if let Some(n) = *total {
            return Ok(n);
        }
        let n = self.inner.total()?;
        *total = Some(n);
        Ok(n)
    }

    fn id(&self) -> String {
        self.inner.id()
    }
}

impl<P: FrequencyProvider + ?Sized> FrequencyProvider for &P {
    fn count(&self, terms: &TermSet) -> Result<u64, ProviderError> {
        (**self).count(terms)
    }

    fn total(&self) -> Result<u64, ProviderError> {
        (**self).total()
    }

    fn id(&self) -> String {
        (**self).id()
    }
}
