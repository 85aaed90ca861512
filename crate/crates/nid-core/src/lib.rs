//! Practical approximations of the normalized information distance.
//!
//! Two computable realizations are provided: the normalized compression
//! distance (NCD), which measures similarity between byte sequences through
//! a pluggable compressor, and the normalized Web distance (NWD), which
//! measures similarity between terms through co-occurrence counts from a
//! pluggable frequency provider. On top of the distances sit a quartet-tree
//! hierarchical clusterer and four applications: anchor-vector
//! classification, translation matching, question-answer ranking, and
//! plagiarism scoring.

pub mod applications;
pub mod compressors;
pub mod distances;
pub mod foundations;
pub mod frequency;
pub mod quartet;

pub use compressors::{CompressorHandle, DataItem};
pub use distances::{DistanceMatrix, DistanceValue};
pub use frequency::{FrequencyProvider, FrequencySnapshot};
pub use quartet::{QuartetScore, QuartetTree};
