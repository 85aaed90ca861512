//! Prefix-code machinery: bit strings, the self-delimiting encoding,
//! pairing, Kraft-sum checking, a density-scaled Hamming distance, and an
//! empirical density auditor.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Errors raised while decoding or evaluating prefix-code machinery.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FoundationsError {
    /// The stream does not start with a complete self-delimiting codeword.
    #[error("malformed self-delimiting code: {0}")]
    MalformedCode(&'static str),
    /// Two strings that must share a length do not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// The input lies outside the distance function's domain.
    #[error("domain error: {0}")]
    DomainError(&'static str),
}

/// A finite sequence of binary symbols.
///
/// Strings are ordered first by length, then lexicographically, and are
/// identified with their index in that ordering (the empty string is 0).
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    /// Parses a string of `0`/`1` characters; anything else panics.
    pub fn parse(s: &str) -> Self {
        BitString {
            bits: s
                .chars()
                .map(|c| match c {
                    '0' => false,
                    '1' => true,
                    _ => panic!("bit strings contain only 0 and 1, got {c:?}"),
                })
                .collect(),
        }
    }

    /// The string with index `n` in the length-then-lexicographic order:
    /// the binary expansion of `n + 1` with its leading 1 removed.
    pub fn from_index(n: u64) -> Self {
        let v = n + 1;
        let width = 63 - v.leading_zeros() as usize; // bits after the leading 1
        let bits = (0..width).rev().map(|i| (v >> i) & 1 == 1).collect();
        BitString { bits }
    }

    /// Inverse of [`BitString::from_index`]. Fails for strings of 64 or
    /// more bits, whose index does not fit in a `u64`.
    pub fn to_index(&self) -> Option<u64> {
        if self.len() >= 64 {
            return None;
        }
        let mut v: u64 = 1;
        for &b in &self.bits {
            v = (v << 1) | b as u64;
        }
        Some(v - 1)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// True when `self` is a prefix of `other` (every string prefixes itself).
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && self.bits == other.bits[..self.len()]
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

/// Self-delimiting encoding of `x`: `ℓ(x)` ones, a zero, then `x` itself.
/// The output has length `2ℓ(x) + 1`.
pub fn encode_self_delimiting(x: &BitString) -> BitString {
    let mut out = Vec::with_capacity(2 * x.len() + 1);
    out.resize(x.len(), true);
    out.push(false);
    out.extend_from_slice(x.bits());
    BitString::from_bits(out)
}

/// Strips one self-delimiting codeword off the front of `s`, returning the
/// decoded string and the remainder.
pub fn decode_self_delimiting(s: &BitString) -> Result<(BitString, BitString), FoundationsError> {
    let bits = s.bits();
    let n = bits
        .iter()
        .position(|&b| !b)
        .ok_or(FoundationsError::MalformedCode("no separator zero"))?;
    let body_start = n + 1;
    if bits.len() < body_start + n {
        return Err(FoundationsError::MalformedCode(
            "stream ends inside the codeword body",
        ));
    }
    let x = BitString::from_bits(bits[body_start..body_start + n].to_vec());
    let rest = BitString::from_bits(bits[body_start + n..].to_vec());
    Ok((x, rest))
}

/// Pairing function: the self-delimiting encoding of `x` followed by `y`.
pub fn pair(x: &BitString, y: &BitString) -> BitString {
    encode_self_delimiting(x).concat(y)
}

/// Inverse of [`pair`].
pub fn unpair(s: &BitString) -> Result<(BitString, BitString), FoundationsError> {
    decode_self_delimiting(s)
}

/// A finite set of codewords, deduplicated on construction.
#[derive(Clone, Debug, Default)]
pub struct CodewordSet {
    words: Vec<BitString>,
}

impl CodewordSet {
    pub fn new(mut words: Vec<BitString>) -> Self {
        words.sort();
        words.dedup();
        CodewordSet { words }
    }

    pub fn words(&self) -> &[BitString] {
        &self.words
    }

    /// True when no word is a proper prefix of another. Recomputed on
    /// every call; the flag is never cached.
    pub fn is_prefix_set(&self) -> bool {
        for (i, w) in self.words.iter().enumerate() {
            for v in &self.words[i + 1..] {
                if w.is_prefix_of(v) || v.is_prefix_of(w) {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of a Kraft-sum evaluation over a codeword set.
#[derive(Clone, Debug)]
pub struct KraftReport {
    /// Exact value of `Σ 2^{−ℓ(w)}` over the distinct words.
    pub sum: BigRational,
    pub is_prefix_set: bool,
    /// Whether the sum is at most 1.
    pub kraft_holds: bool,
}

/// Evaluates the Kraft sum `Σ 2^{−ℓ(w)}` exactly. Non-prefix sets are legal
/// inputs; the report flags them.
pub fn kraft_sum(set: &CodewordSet) -> KraftReport {
    let mut sum = BigRational::zero();
    for w in set.words() {
        let denom = BigInt::one() << w.len();
        sum += BigRational::new(BigInt::one(), denom);
    }
    let kraft_holds = sum <= BigRational::one();
    KraftReport {
        sum,
        is_prefix_set: set.is_prefix_set(),
        kraft_holds,
    }
}

/// Density-scaled Hamming distance between equal-length strings:
/// `2 log n + 4 log log n + 2 + m log n` bits, where `m` counts differing
/// positions; zero when the strings are equal. Logs are base 2.
pub fn hamming_admissible(x: &BitString, y: &BitString) -> Result<f64, FoundationsError> {
    if x.len() != y.len() {
        return Err(FoundationsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(FoundationsError::DomainError(
            "strings must have length at least 2",
        ));
    }
    let m = x
        .bits()
        .iter()
        .zip(y.bits())
        .filter(|(a, b)| a != b)
        .count();
    if m == 0 {
        return Ok(0.0);
    }
    let log_n = (n as f64).log2();
    Ok(2.0 * log_n + 4.0 * log_n.log2() + 2.0 + m as f64 * log_n)
}

/// Verdict for a single point of a density audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityVerdict {
    /// The partial sum already exceeds 1, a definite violation.
    Violated,
    /// The partial sum is within bound; the full (infinite) sum is unknown.
    Inconclusive,
}

/// One row of a [`DensityReport`].
#[derive(Clone, Debug)]
pub struct DensityEntry {
    pub index: usize,
    /// Partial sum `Σ_{y≠x} 2^{−d(x,y)}` over the sampled domain.
    pub partial_sum: f64,
    pub verdict: DensityVerdict,
}

/// Report of an empirical check of the density condition
/// `Σ_{y≠x} 2^{−D(x,y)} ≤ 1` over a finite sample.
#[derive(Clone, Debug)]
pub struct DensityReport {
    pub entries: Vec<DensityEntry>,
}

impl DensityReport {
    pub fn has_violation(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.verdict == DensityVerdict::Violated)
    }
}

/// Sums `2^{−d(x,y)}` over all `y ≠ x` in the sample, for each `x`. The sum
/// over a finite sample can only prove a violation, never compliance, so
/// entries below 1 are labeled inconclusive.
pub fn density_audit<D>(d: D, domain: &[BitString]) -> DensityReport
where
    D: Fn(&BitString, &BitString) -> f64,
{
    let entries = domain
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let partial_sum: f64 = domain
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, y)| 2f64.powf(-d(x, y)))
                .sum();
            let verdict = if partial_sum > 1.0 {
                DensityVerdict::Violated
            } else {
                DensityVerdict::Inconclusive
            };
            DensityEntry {
                index: i,
                partial_sum,
                verdict,
            }
        })
        .collect();
    DensityReport { entries }
}

/// All `2^n` bit strings of length `n`, in lexicographic order.
pub fn full_cube(n: usize) -> Vec<BitString> {
    assert!(n < 26, "cube too large to enumerate");
    (0u32..1 << n)
        .map(|v| BitString::from_bits((0..n).rev().map(|i| (v >> i) & 1 == 1).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        BitString::parse(s)
    }

    #[test]
    fn self_delimiting_examples() {
        assert_eq!(encode_self_delimiting(&bs("101")), bs("1110101"));
        assert_eq!(encode_self_delimiting(&BitString::new()), bs("0"));
        assert_eq!(encode_self_delimiting(&bs("0")), bs("100"));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(
            decode_self_delimiting(&bs("1110101")).unwrap(),
            (bs("101"), BitString::new())
        );
        assert_eq!(
            decode_self_delimiting(&bs("011")).unwrap(),
            (BitString::new(), bs("11"))
        );
        assert!(matches!(
            decode_self_delimiting(&bs("111")),
            Err(FoundationsError::MalformedCode(_))
        ));
        assert!(matches!(
            decode_self_delimiting(&bs("110")),
            Err(FoundationsError::MalformedCode(_))
        ));
    }

    #[test]
    fn pair_examples() {
        assert_eq!(pair(&bs("1"), &bs("0")), bs("1010"));
        assert_eq!(pair(&BitString::new(), &bs("11")), bs("011"));
    }

    #[test]
    fn index_bijection_small() {
        assert_eq!(BitString::from_index(0), BitString::new());
        assert_eq!(BitString::from_index(1), bs("0"));
        assert_eq!(BitString::from_index(2), bs("1"));
        assert_eq!(BitString::from_index(3), bs("00"));
        assert_eq!(BitString::from_index(6), bs("11"));
        for n in 0..2000 {
            assert_eq!(BitString::from_index(n).to_index(), Some(n));
        }
    }

    #[test]
    fn kraft_examples() {
        let r = kraft_sum(&CodewordSet::new(vec![bs("0"), bs("10"), bs("11")]));
        assert_eq!(r.sum, BigRational::one());
        assert!(r.is_prefix_set);
        assert!(r.kraft_holds);

        let r = kraft_sum(&CodewordSet::new(vec![bs("0"), bs("1"), bs("11")]));
        assert_eq!(r.sum, BigRational::new(BigInt::from(5), BigInt::from(4)));
        assert!(!r.is_prefix_set);
        assert!(!r.kraft_holds);

        // Complete code: all words of a fixed length.
        for k in 1..=6 {
            let words = full_cube(k);
            let r = kraft_sum(&CodewordSet::new(words));
            assert_eq!(r.sum, BigRational::one());
            assert!(r.is_prefix_set);
        }
    }

    #[test]
    fn prefix_sets_respect_kraft_exhaustively() {
        // Every subset of the strings of length <= 3 (the empty string
        // included): whenever the subset is a prefix set, the bound holds.
        let mut universe = vec![BitString::new()];
        for n in 1..=3 {
            universe.extend(full_cube(n));
        }
        assert_eq!(universe.len(), 15);
        let mut prefix_sets = 0u32;
        for mask in 0u32..1 << universe.len() {
            let words: Vec<BitString> = universe
                .iter()
                .enumerate()
                .filter(|&(i, _)| (mask >> i) & 1 == 1)
                .map(|(_, w)| w.clone())
                .collect();
            let r = kraft_sum(&CodewordSet::new(words));
            if r.is_prefix_set {
                prefix_sets += 1;
                assert!(r.kraft_holds, "prefix set violating Kraft: mask {mask:b}");
            }
        }
        assert!(prefix_sets > 100);
    }

    #[test]
    fn hamming_examples() {
        let x = bs("1010101010101010");
        assert_eq!(hamming_admissible(&x, &x).unwrap(), 0.0);

        // n = 16, m = 3: 2*4 + 4*2 + 2 + 3*4 = 30.
        let mut flipped = x.bits().to_vec();
        for i in [0, 5, 9] {
            flipped[i] = !flipped[i];
        }
        let y = BitString::from_bits(flipped);
        assert_eq!(hamming_admissible(&x, &y).unwrap(), 30.0);

        // n = 16, m = 16: 8 + 8 + 2 + 64 = 82.
        let z = BitString::from_bits(x.bits().iter().map(|b| !b).collect());
        assert_eq!(hamming_admissible(&x, &z).unwrap(), 82.0);

        assert!(matches!(
            hamming_admissible(&bs("10"), &bs("101")),
            Err(FoundationsError::LengthMismatch { .. })
        ));
        assert!(matches!(
            hamming_admissible(&bs("1"), &bs("0")),
            Err(FoundationsError::DomainError(_))
        ));
    }

    #[test]
    fn hamming_symmetric_and_zero_iff_equal() {
        let cube = full_cube(6);
        for x in &cube {
            for y in &cube {
                let d = hamming_admissible(x, y).unwrap();
                assert_eq!(d, hamming_admissible(y, x).unwrap());
                assert_eq!(d == 0.0, x == y);
            }
        }
    }

    #[test]
    fn density_audit_hamming_cube() {
        let domain = full_cube(4);
        let report = density_audit(|x, y| hamming_admissible(x, y).unwrap(), &domain);
        assert!(!report.has_violation());
        assert_eq!(report.entries.len(), 16);
    }

    #[test]
    fn density_audit_degenerate_metric() {
        // d(x,y) = 1 for all x != y over 8 strings: every partial sum is 3.5.
        let domain = full_cube(3);
        let report = density_audit(|_, _| 1.0, &domain);
        assert!(report.has_violation());
        for e in &report.entries {
            assert!((e.partial_sum - 3.5).abs() < 1e-12);
            assert_eq!(e.verdict, DensityVerdict::Violated);
        }
    }

    #[test]
    fn density_audit_singleton_domain() {
        let domain = vec![bs("1010")];
        let report = density_audit(|_, _| 1.0, &domain);
        assert!(!report.has_violation());
        assert_eq!(report.entries[0].partial_sum, 0.0);
    }

    #[test]
    fn density_audit_hamming_larger_cubes() {
        for n in [2usize, 5, 8, 12] {
            let domain = full_cube(n);
            let report = density_audit(|x, y| hamming_admissible(x, y).unwrap(), &domain);
            assert!(!report.has_violation(), "violation at n = {n}");
        }
    }
}
