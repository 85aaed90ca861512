//! Off-the-shelf codecs registered behind the compressor handle: one
//! deflate-class and one block-sorting-class codec. Lengths are reported
//! as `8 × output bytes`.

use std::io::Write;

use super::{CodecError, Compressor, Granularity, Window};

fn failure(codec: &str, reason: impl ToString) -> CodecError {
    CodecError::CodecFailure {
        codec: codec.to_string(),
        label: String::new(),
        reason: reason.to_string(),
    }
}

/// Raw-deflate adapter, fixed level, 32 KB history window.
#[derive(Debug, Default)]
pub struct DeflateAdapter;

impl DeflateAdapter {
    pub fn new() -> Self {
        DeflateAdapter
    }
}

/// Frozen per-codec identity slack for doubled inputs that still fit the
/// deflate window, measured on the fixture corpus.
const DEFLATE_IDENTITY_SLACK_BITS: f64 = 512.0;

impl Compressor for DeflateAdapter {
    fn name(&self) -> &str {
        "deflate"
    }

    fn window(&self) -> Window {
        Window::Bytes(32 * 1024)
    }

    fn granularity(&self) -> Granularity {
        Granularity::Bytes
    }

    fn compressed_len_bits(&self, data: &[u8]) -> Result<u64, CodecError> {
        let mut enc =
            flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::new(6));
        enc.write_all(data).map_err(|e| failure("deflate", e))?;
        let out = enc.finish().map_err(|e| failure("deflate", e))?;
        Ok(8 * out.len() as u64)
    }

    fn identity_slack_bits(&self, raw_len_bytes: usize) -> Option<f64> {
        // The doubled input must fit one window for the second copy to see
        // the first.
        if 2 * raw_len_bytes <= 32 * 1024 {
            Some(DEFLATE_IDENTITY_SLACK_BITS)
        } else {
            None
        }
    }
}

/// bzip2 adapter, maximum block size (900 KB).
#[derive(Debug, Default)]
pub struct Bzip2Adapter;

impl Bzip2Adapter {
    pub fn new() -> Self {
        Bzip2Adapter
    }
}

const BZIP2_IDENTITY_SLACK_BITS: f64 = 1024.0;

impl Compressor for Bzip2Adapter {
    fn name(&self) -> &str {
        "bzip2"
    }

    fn window(&self) -> Window {
        Window::Bytes(900_000)
    }

    fn granularity(&self) -> Granularity {
        Granularity::Bytes
    }

    fn compressed_len_bits(&self, data: &[u8]) -> Result<u64, CodecError> {
        let mut enc = bzip2::write::BzEncoder::new(Vec::new(), bzip2::Compression::best());
        enc.write_all(data).map_err(|e| failure("bzip2", e))?;
        let out = enc.finish().map_err(|e| failure("bzip2", e))?;
        Ok(8 * out.len() as u64)
    }

    fn identity_slack_bits(&self, raw_len_bytes: usize) -> Option<f64> {
        if 2 * raw_len_bytes <= 900_000 {
            Some(BZIP2_IDENTITY_SLACK_BITS)
        } else {
            None
        }
    }
}
