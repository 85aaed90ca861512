//! Application procedures built on the distances: anchor-vector
//! classification, translation permutation matching, question-answer
//! candidate ranking, and plagiarism scoring.

mod anchors;
mod plagiarism;
mod qa;
mod svm;
mod translate;

use thiserror::Error;

use crate::distances::{DistanceError, Method};
use crate::frequency::FrequencyProvider;

pub use anchors::{build_anchor_vectors, AnchorVectorSet};
pub use plagiarism::{normalize_source, plagiarism_score};
pub use qa::{rank_answers, ranked_to_json, AnswerScore, RankedAnswer, TermScore};
pub use svm::{classify, train_classifier, TrainedClassifier};
pub use translate::{match_translation, TranslationOutcome, VocabularyBasis};

#[derive(Debug, Error)]
pub enum AppError {
    #[error("distance({word}, {anchor}) is infinite; anchor vectors must be finite")]
    InfiniteEntry { word: String, anchor: String },
    #[error("distance({a}, {b}) is infinite; correlation matching needs finite tables")]
    InfiniteDistance { a: String, b: String },
    #[error("anchor list is empty")]
    EmptyAnchors,
    #[error("word list is empty")]
    EmptyWords,
    #[error("labels must be +1/-1, one per word")]
    BadLabels,
    #[error("training needs both classes with at least 3 examples, got {pos} positive / {neg} negative")]
    DegenerateLabels { pos: usize, neg: usize },
    #[error("model fingerprint mismatch:\n  model: {expected}\n  data:  {actual}")]
    FingerprintMismatch { expected: String, actual: String },
    #[error("exhaustive permutation matching is capped at 8 unknown words, got {0}")]
    VocabularyTooLarge(usize),
    #[error("flattened distance vector has zero variance; correlation is undefined")]
    ZeroVariance,
    #[error("vocabulary basis invalid: {0}")]
    InvalidBasis(&'static str),
    #[error("no candidates supplied")]
    NoCandidates,
    #[error("no question terms supplied")]
    NoQuestionTerms,
    #[error("model parse error at line {line}: {reason}")]
    ModelParse { line: usize, reason: String },
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A total distance function over terms, with a stable identifier for
/// provenance fingerprints.
pub trait TermDistance {
    fn distance(&self, a: &str, b: &str) -> Result<f64, DistanceError>;
    fn id(&self) -> String;
}

/// Web distance over a frequency provider as a [`TermDistance`].
pub struct NwdDistance<'a, P: ?Sized> {
    provider: &'a P,
    method: Method,
    base: f64,
}

impl<'a, P: FrequencyProvider + ?Sized> NwdDistance<'a, P> {
    pub fn new(provider: &'a P, method: Method, base: f64) -> Self {
        NwdDistance {
            provider,
            method,
            base,
        }
    }

    pub fn nwd(provider: &'a P) -> Self {
        Self::new(provider, Method::Nwd, 2.0)
    }
}

impl<P: FrequencyProvider + ?Sized> TermDistance for NwdDistance<'_, P> {
    fn distance(&self, a: &str, b: &str) -> Result<f64, DistanceError> {
        let v = match self.method {
            Method::NwdMin => crate::distances::nwd_min(self.provider, a, b, self.base)?,
            _ => crate::distances::nwd(self.provider, a, b, self.base)?,
        };
        Ok(v.value)
    }

    fn id(&self) -> String {
        format!(
            "{}|{}|base={}",
            self.method.name(),
            self.provider.id(),
            self.base
        )
    }
}
