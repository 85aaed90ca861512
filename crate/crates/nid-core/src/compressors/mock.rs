//! Idealized compressors for tests and calibration: a raw-length function
//! and a table-backed length function with prescribed values.

use std::collections::HashMap;

use super::{CodecError, Compressor, Granularity, Window};

/// `Z(x) = 8·ℓ(x)` bits: compresses nothing, expands nothing. Violates the
/// identity axiom maximally (`Z(xx) = 2·Z(x)`) while satisfying the others
/// exactly.
#[derive(Debug, Default)]
pub struct RawLengthCompressor;

impl Compressor for RawLengthCompressor {
    fn name(&self) -> &str {
        "mock-raw"
    }

    fn window(&self) -> Window {
        Window::Unbounded
    }

    fn granularity(&self) -> Granularity {
        Granularity::Bits
    }

    fn compressed_len_bits(&self, data: &[u8]) -> Result<u64, CodecError> {
        Ok(8 * data.len() as u64)
    }

    fn identity_slack_bits(&self, _raw_len_bytes: usize) -> Option<f64> {
        None
    }
}

/// Length function defined by an explicit content → bits table, for
/// exercising distance formulas on prescribed `Z(x)`, `Z(y)`, `Z(xy)`
/// values. Unknown content is a codec failure, never a silent guess.
#[derive(Debug, Default)]
pub struct TableCompressor {
    name: String,
    table: HashMap<Vec<u8>, u64>,
    identity_slack: Option<f64>,
}

impl TableCompressor {
    pub fn new(name: impl Into<String>) -> Self {
        TableCompressor {
            name: name.into(),
            table: HashMap::new(),
            identity_slack: None,
        }
    }

    pub fn insert(&mut self, content: &[u8], bits: u64) -> &mut Self {
        self.table.insert(content.to_vec(), bits);
        self
    }

    /// Convenience for a two-item universe: sets lengths for `x`, `y` and
    /// both concatenation orders (`xy` and `yx` equal).
    pub fn with_pair(x: &[u8], y: &[u8], zx: u64, zy: u64, zxy: u64) -> Self {
        let mut t = TableCompressor::new("mock-table");
        t.insert(x, zx).insert(y, zy);
        let mut xy = x.to_vec();
        xy.extend_from_slice(y);
        let mut yx = y.to_vec();
        yx.extend_from_slice(x);
        t.insert(&xy, zxy).insert(&yx, zxy);
        let mut xx = x.to_vec();
        xx.extend_from_slice(x);
        let mut yy = y.to_vec();
        yy.extend_from_slice(y);
        t.insert(&xx, zx).insert(&yy, zy);
        t.identity_slack = Some(0.0);
        t
    }

    pub fn set_identity_slack(&mut self, bits: f64) -> &mut Self {
        self.identity_slack = Some(bits);
        self
    }
}

impl Compressor for TableCompressor {
    fn name(&self) -> &str {
        &self.name
    }

    fn window(&self) -> Window {
        Window::Unbounded
    }

    fn granularity(&self) -> Granularity {
        Granularity::Bits
    }

    fn compressed_len_bits(&self, data: &[u8]) -> Result<u64, CodecError> {
        self.table
            .get(data)
            .copied()
            .ok_or_else(|| CodecError::CodecFailure {
                codec: self.name.clone(),
                label: String::new(),
                reason: format!("no table entry for {} bytes", data.len()),
            })
    }

    fn identity_slack_bits(&self, _raw_len_bytes: usize) -> Option<f64> {
        self.identity_slack
    }
}
