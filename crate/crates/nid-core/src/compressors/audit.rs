//! Auditors that measure how far a compressor deviates from the ideal
//! length function: `Z(xx) = Z(x)`, `Z(ε) = 0`, `Z(xy) ≥ Z(x)`,
//! `Z(xy) = Z(yx)`, and `Z(xy) + Z(z) ≤ Z(xz) + Z(yz)`, each expected to
//! hold only up to an additive term logarithmic in the input length, plus
//! a worst-case expansion check against `ℓ + 2·log2(ℓ)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::{CodecError, CompressorHandle, DataItem};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("audit corpus needs at least 3 items, got {0}")]
    CorpusTooSmall(usize),
    #[error("duplicate item label {0:?}")]
    DuplicateLabel(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// The four normality axioms, with the empty-input half of the identity
/// axiom reported as its own row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Identity,
    IdentityEmpty,
    Monotonicity,
    Symmetry,
    Distributivity,
}

impl Axiom {
    fn name(self) -> &'static str {
        match self {
            Axiom::Identity => "identity",
            Axiom::IdentityEmpty => "identity-empty",
            Axiom::Monotonicity => "monotonicity",
            Axiom::Symmetry => "symmetry",
            Axiom::Distributivity => "distributivity",
        }
    }
}

/// Worst observed deviation for one axiom.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomEntry {
    pub axiom: Axiom,
    /// Worst absolute deviation, in bits.
    pub worst_bits: f64,
    /// The same deviation divided by `log2(n)`, `n` the largest binary
    /// length involved in the offending (in)equality (floored at 2).
    pub worst_per_logn: f64,
    /// Labels of the inputs achieving the worst deviation.
    pub labels: Vec<String>,
    /// Number of (in)equality instances evaluated.
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub compressor: String,
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn entry(&self, axiom: Axiom) -> &AxiomEntry {
        self.entries.iter().find(|e| e.axiom == axiom).unwrap()
    }

    /// Line-oriented table, one row per axiom.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "normality audit: {}", self.compressor);
        let _ = writeln!(
            out,
            "{:<16} {:>12} {:>14} {:>8}  {}",
            "axiom", "worst_bits", "worst_per_logn", "samples", "labels"
        );
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{:<16} {:>12.1} {:>14.3} {:>8}  {}",
                e.axiom.name(),
                e.worst_bits,
                e.worst_per_logn,
                e.samples,
                e.labels.join(", ")
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Options for [`normality_audit`]. Triples are subsampled with the given
/// seed when the corpus would otherwise produce too many.
#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub triple_samples: usize,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            triple_samples: 2000,
            seed: 0,
        }
    }
}

fn per_logn(bits: f64, n_bits: u64) -> f64 {
    bits / (n_bits.max(2) as f64).log2()
}

struct Worst {
    bits: f64,
    per_logn: f64,
    labels: Vec<String>,
    samples: usize,
}

impl Worst {
    fn new() -> Self {
        Worst {
            bits: 0.0,
            per_logn: 0.0,
            labels: Vec::new(),
            samples: 0,
        }
    }

    fn observe(&mut self, bits: f64, n_bits: u64, labels: &[&str]) {
        self.samples += 1;
        if bits > self.bits {
            self.bits = bits;
            self.per_logn = per_logn(bits, n_bits);
            self.labels = labels.iter().map(|s| s.to_string()).collect();
        }
    }

    fn into_entry(self, axiom: Axiom) -> AxiomEntry {
        AxiomEntry {
            axiom,
            worst_bits: self.bits,
            worst_per_logn: self.per_logn,
            labels: self.labels,
            samples: self.samples,
        }
    }
}

/// Measures the worst deviation from each normality axiom over the corpus:
/// every item for identity, every ordered pair for monotonicity, every
/// unordered pair for symmetry, and a seeded subsample of ordered triples
/// for distributivity. Pair lengths are computed once and shared.
pub fn normality_audit(
    z: &CompressorHandle,
    corpus: &[DataItem],
    opts: &AuditOptions,
) -> Result<AxiomReport, AuditError> {
    if corpus.len() < 3 {
        return Err(AuditError::CorpusTooSmall(corpus.len()));
    }
    {
        let mut seen = std::collections::HashSet::new();
        for item in corpus {
            if !seen.insert(item.label()) {
                return Err(AuditError::DuplicateLabel(item.label().to_string()));
            }
        }
    }

    let singles: Vec<u64> = corpus
        .par_iter()
        .map(|x| z.compressed_len_bits(x.bytes()))
        .collect::<Result<_, _>>()?;
    let doubled: Vec<u64> = corpus
        .par_iter()
        .map(|x| {
            let mut xx = x.bytes().to_vec();
            xx.extend_from_slice(x.bytes());
            z.compressed_len_bits(&xx)
        })
        .collect::<Result<_, _>>()?;

    let m = corpus.len();
    let ordered: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let pair_bits: HashMap<(usize, usize), u64> = ordered
        .par_iter()
        .map(|&(i, j)| {
            let mut xy = corpus[i].bytes().to_vec();
            xy.extend_from_slice(corpus[j].bytes());
            z.compressed_len_bits(&xy).map(|b| ((i, j), b))
        })
        .collect::<Result<_, _>>()?;
    let bits_len = |i: usize| 8 * corpus[i].len() as u64;

    let mut identity = Worst::new();
    for (i, x) in corpus.iter().enumerate() {
        let dev = (doubled[i] as f64 - singles[i] as f64).abs();
        identity.observe(dev, 2 * bits_len(i), &[x.label()]);
    }

    let empty_bits = z.compressed_len_bits(&[])? as f64;
    let mut identity_empty = Worst::new();
    identity_empty.observe(empty_bits, 0, &["ε"]);

    let mut monotonicity = Worst::new();
    let mut symmetry = Worst::new();
    for &(i, j) in &ordered {
        let zxy = pair_bits[&(i, j)];
        let dev = (singles[i] as f64 - zxy as f64).max(0.0);
        let n = bits_len(i) + bits_len(j);
        monotonicity.observe(dev, n, &[corpus[i].label(), corpus[j].label()]);
        if i < j {
            let dev = (zxy as f64 - pair_bits[&(j, i)] as f64).abs();
            symmetry.observe(dev, n, &[corpus[i].label(), corpus[j].label()]);
        }
    }

    let mut triples: Vec<(usize, usize, usize)> = (0..m)
        .flat_map(|i| {
            (0..m).flat_map(move |j| {
                (0..m)
                    .filter(move |&k| i != j && j != k && i != k)
                    .map(move |k| (i, j, k))
            })
        })
        .collect();
    if triples.len() > opts.triple_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        triples.shuffle(&mut rng);
        triples.truncate(opts.triple_samples);
    }
    let mut distributivity = Worst::new();
    for &(i, j, k) in &triples {
        let lhs = pair_bits[&(i, j)] as f64 + singles[k] as f64;
        let rhs = pair_bits[&(i, k)] as f64 + pair_bits[&(j, k)] as f64;
        let n = bits_len(i) + bits_len(j) + bits_len(k);
        distributivity.observe(
            (lhs - rhs).max(0.0),
            n,
            &[corpus[i].label(), corpus[j].label(), corpus[k].label()],
        );
    }

    Ok(AxiomReport {
        compressor: z.name().to_string(),
        entries: vec![
            identity.into_entry(Axiom::Identity),
            identity_empty.into_entry(Axiom::IdentityEmpty),
            monotonicity.into_entry(Axiom::Monotonicity),
            symmetry.into_entry(Axiom::Symmetry),
            distributivity.into_entry(Axiom::Distributivity),
        ],
    })
}

/// Per-item result of an expansion audit.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionEntry {
    pub label: String,
    /// `Z(x) − (8ℓ + 2·log2(8ℓ))` in bits (just `Z(x)` for empty input).
    pub constant_bits: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub compressor: String,
    pub ceiling_bits: f64,
    pub worst_bits: f64,
    pub worst_label: String,
    pub passed: bool,
    pub entries: Vec<ExpansionEntry>,
}

/// Checks that compression never expands an input beyond its raw length
/// plus a logarithmic term and a fixed framing constant. A compressor
/// whose constant exceeds `ceiling_bits` fails.
pub fn expansion_audit(
    z: &CompressorHandle,
    corpus: &[DataItem],
    ceiling_bits: f64,
) -> Result<ExpansionReport, CodecError> {
    let mut entries = Vec::with_capacity(corpus.len());
    for x in corpus {
        let zx = z.compressed_len_bits(x.bytes())? as f64;
        let raw_bits = 8.0 * x.len() as f64;
        let allowance = if x.is_empty() {
            0.0
        } else {
            raw_bits + 2.0 * raw_bits.log2()
        };
        entries.push(ExpansionEntry {
            label: x.label().to_string(),
            constant_bits: zx - allowance,
        });
    }
    let worst = entries
        .iter()
        .max_by(|a, b| a.constant_bits.total_cmp(&b.constant_bits))
        .expect("non-empty corpus");
    Ok(ExpansionReport {
        compressor: z.name().to_string(),
        ceiling_bits,
        worst_bits: worst.constant_bits,
        worst_label: worst.label.clone(),
        passed: worst.constant_bits <= ceiling_bits,
        entries,
    })
}
