//! Embedding of terms as vectors of distances to fixed anchor terms.

use percent_encoding::{utf8_percent_encode, AsciiSet, CONTROLS};

use super::{AppError, TermDistance};

const FINGERPRINT_ESCAPE: &AsciiSet = &CONTROLS.add(b'%').add(b',');

/// Words embedded as rows of distances to the anchors: entry `(j, i)` is
/// `distance(word_j, anchor_i)`. Every entry is finite by construction.
#[derive(Clone, Debug)]
pub struct AnchorVectorSet {
    words: Vec<String>,
    anchors: Vec<String>,
    vectors: Vec<Vec<f64>>,
    labels: Option<Vec<i8>>,
    backend_id: String,
}

impl AnchorVectorSet {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn anchors(&self) -> &[String] {
        &self.anchors
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn labels(&self) -> Option<&[i8]> {
        self.labels.as_deref()
    }

    pub fn backend_id(&self) -> &str {
        &self.backend_id
    }

    /// Ties a classifier to the anchors and distance backend it was
    /// trained with.
    pub fn data_fingerprint(&self) -> String {
        let anchors: Vec<String> = self
            .anchors
            .iter()
            .map(|a| utf8_percent_encode(a, FINGERPRINT_ESCAPE).to_string())
            .collect();
        format!(
            "avs-v1|backend={}|anchors={}",
            self.backend_id,
            anchors.join(",")
        )
    }
}

/// Converts each word into its vector of anchor distances. Construction
/// fails atomically on the first infinite entry; labeled sets must carry
/// one ±1 label per word and contain both classes.
pub fn build_anchor_vectors(
    words: &[String],
    anchors: &[String],
    labels: Option<&[i8]>,
    dist: &dyn TermDistance,
) -> Result<AnchorVectorSet, AppError> {
    if anchors.is_empty() {
        return Err(AppError::EmptyAnchors);
    }
    if words.is_empty() {
        return Err(AppError::EmptyWords);
    }
    if let Some(ls) = labels {
        if ls.len() != words.len() || ls.iter().any(|&l| l != 1 && l != -1) {
            return Err(AppError::BadLabels);
        }
        let pos = ls.iter().filter(|&&l| l == 1).count();
        if pos == 0 || pos == ls.len() {
            return Err(AppError::DegenerateLabels {
                pos,
                neg: ls.len() - pos,
            });
        }
    }
    let mut vectors = Vec::with_capacity(words.len());
    for word in words {
        let mut row = Vec::with_capacity(anchors.len());
        for anchor in anchors {
            let v = dist.distance(word, anchor)?;
            if !v.is_finite() {
                return Err(AppError::InfiniteEntry {
                    word: word.clone(),
                    anchor: anchor.clone(),
                });
            }
            row.push(v);
        }
        vectors.push(row);
    }
    Ok(AnchorVectorSet {
        words: words.to_vec(),
        anchors: anchors.to_vec(),
        vectors,
        labels: labels.map(|l| l.to_vec()),
        backend_id: dist.id(),
    })
}
