//! Plagiarism scoring: normalize source text into a token stream that is
//! blind to identifier names, literal values, comments and whitespace,
//! then measure the sum distance under the unbounded-window compressor.

use crate::compressors::{CompressorHandle, DataItem};
use crate::distances::{ncd_sum, DistanceValue, Method};

use super::AppError;

/// Language-agnostic lexical normalization:
///
/// * identifiers (letter/underscore words) → `I`
/// * quoted spans (`'…'` or `"…"`, backslash escapes honored) → `S`
/// * digit spans → `N`
/// * `//…`, `/*…*/` and `#…` comments dropped
/// * whitespace runs dropped
/// * all other characters kept verbatim
pub fn normalize_source(src: &str) -> Vec<u8> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::with_capacity(src.len() / 2);
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && i + 1 < chars.len() && chars[i + 1] == '/' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && i + 1 < chars.len() && chars[i + 1] == '*' {
            i += 2;
            while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                i += 1;
            }
            i = (i + 2).min(chars.len());
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = c;
            i += 1;
            while i < chars.len() && chars[i] != quote {
                if chars[i] == '\\' {
                    i += 1;
                }
                i += 1;
            }
            i = (i + 1).min(chars.len());
            out.push(b'S');
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(b'I');
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push(b'N');
            continue;
        }
        let mut buf = [0u8; 4];
        out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
        i += 1;
    }
    out
}

/// Sum distance between the normalized token streams of two sources.
/// Identical streams score exactly 0 (after the compressor's identity
/// slack is checked, mirroring the matrix diagonal policy).
pub fn plagiarism_score(
    a: &str,
    b: &str,
    z: &CompressorHandle,
) -> Result<DistanceValue, AppError> {
    let na = normalize_source(a);
    let nb = normalize_source(b);
    if na == nb {
        let item = DataItem::new("normalized", na, "plagiarism");
        let v = ncd_sum(z, &item, &item)?;
        if let Some(slack) = z.identity_slack_bits(item.len()) {
            debug_assert!(
                v.numerator_bits <= 2.0 * slack,
                "identity slack exceeded on equal streams"
            );
        }
        return Ok(DistanceValue {
            value: 0.0,
            numerator_bits: v.numerator_bits,
            denominator_bits: v.denominator_bits,
            method: Method::NcdSum,
        });
    }
    let ia = DataItem::new("a", na, "plagiarism");
    let ib = DataItem::new("b", nb, "plagiarism");
    Ok(ncd_sum(z, &ia, &ib)?)
}
