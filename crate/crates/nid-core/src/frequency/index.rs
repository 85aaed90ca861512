//! Offline corpus indexer: presence-based postings over case-folded
//! Unicode words, with on-demand substring matching for phrase terms.

use std::collections::{BTreeMap, HashMap};

use sha2::{Digest, Sha256};
use unicode_segmentation::UnicodeSegmentation;

use super::{FrequencyProvider, ProviderError, TermSet};

pub const TOKENIZER_VERSION: &str = "unicode-words-casefold-1";

/// Inverted index over a fixed document set. A document counts once per
/// term no matter how often the term occurs in it.
pub struct CorpusIndex {
    doc_ids: Vec<String>,
    /// Case-folded text per document, kept for phrase queries.
    folded_docs: Vec<String>,
    postings: HashMap<String, Vec<u32>>,
    content_hash: String,
}

fn fold(text: &str) -> String {
    text.to_lowercase()
}

/// Builds the index. Tokenization is Unicode word segmentation over the
/// case-folded text; no stemming.
pub fn index_corpus<I, S, T>(docs: I) -> Result<CorpusIndex, ProviderError>
where
    I: IntoIterator<Item = (S, T)>,
    S: Into<String>,
    T: AsRef<str>,
{
    let mut doc_ids = Vec::new();
    let mut folded_docs = Vec::new();
    let mut postings: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    let mut hasher = Sha256::new();

    for (id, text) in docs {
        let id = id.into();
        if !seen.insert(id.clone()) {
            return Err(ProviderError::DuplicateDocId(id));
        }
        let doc_idx = doc_ids.len() as u32;
        let folded = fold(text.as_ref());
        hasher.update(id.as_bytes());
        hasher.update([0]);
        hasher.update(folded.as_bytes());
        hasher.update([0]);
        let mut words: Vec<&str> = folded.unicode_words().collect();
        words.sort_unstable();
        words.dedup();
        for w in words {
            postings.entry(w.to_string()).or_default().push(doc_idx);
        }
        doc_ids.push(id);
        folded_docs.push(folded);
    }

    Ok(CorpusIndex {
        doc_ids,
        folded_docs,
        postings: postings.into_iter().collect(),
        content_hash: format!("{:x}", hasher.finalize()),
    })
}

impl CorpusIndex {
    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    /// Sorted ids of the documents matching one term. Terms containing
    /// whitespace are treated as phrases and matched as substrings of the
    /// folded text, computed on demand.
    fn posting(&self, term: &str) -> Vec<u32> {
        let folded = fold(term);
        if folded.split_whitespace().nth(1).is_some() {
            let needle = folded.split_whitespace().collect::<Vec<_>>().join(" ");
            self.folded_docs
                .iter()
                .enumerate()
                .filter(|(_, d)| d.contains(&needle))
                .map(|(i, _)| i as u32)
                .collect()
        } else {
            self.postings.get(folded.trim()).cloned().unwrap_or_default()
        }
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl FrequencyProvider for CorpusIndex {
    fn count(&self, terms: &TermSet) -> Result<u64, ProviderError> {
        let mut docs: Option<Vec<u32>> = None;
        for term in terms.terms() {
            let p = self.posting(term);
            docs = Some(match docs {
                None => p,
                Some(acc) => intersect_sorted(&acc, &p),
            });
        }
        Ok(docs.map_or(0, |d| d.len() as u64))
    }

    fn total(&self) -> Result<u64, ProviderError> {
        Ok(self.doc_ids.len() as u64)
    }

    fn id(&self) -> String {
        format!("corpus:{}", &self.content_hash[..16])
    }
}
