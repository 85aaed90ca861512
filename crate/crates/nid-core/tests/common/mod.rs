// Shared fixture generators for the integration suites.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nid_core::compressors::DataItem;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// The four English prose excerpts shipped with the repository.
pub fn english_items() -> Vec<DataItem> {
    let dir = data_dir().join("english");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("data/english exists")
        .map(|e| e.expect("readable dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| DataItem::from_file(p).expect("excerpt readable"))
        .collect()
}

/// Order-1 Markov chain over the DNA alphabet with a fixed biased
/// transition table; different seeds give different samples of the same
/// source.
pub fn markov_dna(seed: u64, len: usize) -> Vec<u8> {
    let alphabet = *b"ACGT";
    // Rows sum to 1: sticky self-transitions give the run-heavy texture
    // that makes two samples of the chain visibly alike to a dictionary
    // coder.
    let table: [[f64; 4]; 4] = [
        [0.82, 0.12, 0.04, 0.02],
        [0.04, 0.82, 0.12, 0.02],
        [0.02, 0.04, 0.82, 0.12],
        [0.12, 0.02, 0.04, 0.82],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = rng.gen_range(0..4usize);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(alphabet[state]);
        let roll: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = 3;
        for (candidate, &p) in table[state].iter().enumerate() {
            acc += p;
            if roll < acc {
                next = candidate;
                break;
            }
        }
        state = next;
    }
    out
}

pub fn random_bytes(seed: u64, len: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen()).collect()
}

/// Structured repetitive binary: a seeded block tiled with a slowly
/// counting byte spliced in.
pub fn repetitive_bytes(seed: u64, len: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block: Vec<u8> = (0..24).map(|_| rng.gen()).collect();
    let mut out = Vec::with_capacity(len);
    let mut counter = 0u8;
    while out.len() < len {
        out.extend_from_slice(&block);
        out.push(counter);
        counter = counter.wrapping_add(1);
    }
    out.truncate(len);
    out
}

/// Deterministic text corpus built from the shipped excerpts: sentences
/// are shuffled and concatenated until each file reaches its target size.
pub fn text_corpus(count: usize, min_bytes: usize, max_bytes: usize, seed: u64) -> Vec<DataItem> {
    let source: String = english_items()
        .iter()
        .map(|i| String::from_utf8_lossy(i.bytes()).into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let sentences: Vec<&str> = source
        .split_inclusive(". ")
        .filter(|s| !s.trim().is_empty())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let target = min_bytes + (max_bytes - min_bytes) * i / count.max(1);
            let mut text = String::with_capacity(target + 128);
            while text.len() < target {
                text.push_str(sentences[rng.gen_range(0..sentences.len())]);
            }
            DataItem::new(format!("text{i:02}"), text.into_bytes(), "fixture")
        })
        .collect()
}
