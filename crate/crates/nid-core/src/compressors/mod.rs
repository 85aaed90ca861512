//! Deterministic compressed-length functions behind a common handle: an
//! in-repo dictionary compressor with an unbounded history window, adapters
//! for off-the-shelf codecs, and auditors that measure how far a compressor
//! is from the identity/monotonicity/symmetry/distributivity ideal.

mod adapters;
mod audit;
mod lz;
pub mod mock;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

pub use adapters::{Bzip2Adapter, DeflateAdapter};
pub use audit::{
    expansion_audit, normality_audit, AuditError, AuditOptions, Axiom, AxiomEntry, AxiomReport,
    ExpansionEntry, ExpansionReport,
};
pub use lz::{lz_compress, lz_decompress, LzError, LzUnbounded};

/// Errors raised by compressed-length computation. A failure means the
/// whole run must be discarded; lengths are never silently substituted.
#[derive(Debug, Error)]
pub enum CodecError {
    #[error("codec {codec} failed on {label}: {reason}")]
    CodecFailure {
        codec: String,
        label: String,
        reason: String,
    },
    #[error("unknown compressor {0:?} (available: {})", available().join(", "))]
    UnknownCompressor(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Effective history size of a compressor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    Bytes(usize),
    Unbounded,
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Bytes(n) => write!(f, "{n}"),
            Window::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Whether a codec reports lengths natively in bits or in whole bytes
/// (byte outputs are converted to bits as `8 * bytes`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Granularity {
    Bits,
    Bytes,
}

/// A deterministic compressed-length function. Implementations must return
/// the same length for the same input on every call.
pub trait Compressor: Send + Sync {
    fn name(&self) -> &str;
    fn window(&self) -> Window;
    fn granularity(&self) -> Granularity;

    /// Length of the compressed form of `data`, in bits.
    fn compressed_len_bits(&self, data: &[u8]) -> Result<u64, CodecError>;

    /// Frozen calibration bound on `Z(xx) − Z(x)` in bits for an input of
    /// `raw_len_bytes` bytes, or `None` when the codec makes no identity
    /// promise at that size (the doubled input exceeds its window).
    fn identity_slack_bits(&self, raw_len_bytes: usize) -> Option<f64>;
}

/// A named, shareable compressor.
#[derive(Clone)]
pub struct CompressorHandle {
    inner: Arc<dyn Compressor>,
}

impl CompressorHandle {
    pub fn new(imp: Arc<dyn Compressor>) -> Self {
        CompressorHandle { inner: imp }
    }

    /// The in-repo dictionary compressor.
    pub fn lz() -> Self {
        Self::new(Arc::new(LzUnbounded::new()))
    }

    pub fn deflate() -> Self {
        Self::new(Arc::new(DeflateAdapter::new()))
    }

    pub fn bzip2() -> Self {
        Self::new(Arc::new(Bzip2Adapter::new()))
    }

    /// Looks up a registered codec by name.
    pub fn by_name(name: &str) -> Result<Self, CodecError> {
        match name {
            "lz" => Ok(Self::lz()),
            "deflate" => Ok(Self::deflate()),
            "bzip2" => Ok(Self::bzip2()),
            other => Err(CodecError::UnknownCompressor(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        self.inner.name()
    }

    pub fn window(&self) -> Window {
        self.inner.window()
    }

    pub fn granularity(&self) -> Granularity {
        self.inner.granularity()
    }

    pub fn compressed_len_bits(&self, data: &[u8]) -> Result<u64, CodecError> {
        self.inner.compressed_len_bits(data)
    }

    pub fn identity_slack_bits(&self, raw_len_bytes: usize) -> Option<f64> {
        self.inner.identity_slack_bits(raw_len_bytes)
    }
}

impl fmt::Debug for CompressorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompressorHandle")
            .field("name", &self.name())
            .field("window", &self.window())
            .finish()
    }
}

/// Names of the codecs [`CompressorHandle::by_name`] accepts.
pub fn available() -> Vec<&'static str> {
    vec!["lz", "deflate", "bzip2"]
}

/// A labeled byte sequence; the universal input of all literal-distance
/// operations. Bytes are immutable after construction.
#[derive(Clone, Debug)]
pub struct DataItem {
    label: String,
    bytes: Arc<Vec<u8>>,
    source: String,
}

impl DataItem {
    pub fn new(label: impl Into<String>, bytes: Vec<u8>, source: impl Into<String>) -> Self {
        DataItem {
            label: label.into(),
            bytes: Arc::new(bytes),
            source: source.into(),
        }
    }

    /// Reads a file; the label is the file name.
    pub fn from_file(path: &Path) -> Result<Self, CodecError> {
        let bytes = std::fs::read(path).map_err(|source| CodecError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let label = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(DataItem::new(label, bytes, path.display().to_string()))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// `Z(x)` in bits.
pub fn compressed_length(z: &CompressorHandle, x: &DataItem) -> Result<u64, CodecError> {
    z.compressed_len_bits(x.bytes())
}

/// `Z(xy)`: the compressed length of the byte concatenation `x‖y`, with no
/// separator inserted.
pub fn concat_length(z: &CompressorHandle, x: &DataItem, y: &DataItem) -> Result<u64, CodecError> {
    let mut joined = Vec::with_capacity(x.len() + y.len());
    joined.extend_from_slice(x.bytes());
    joined.extend_from_slice(y.bytes());
    z.compressed_len_bits(&joined)
}
