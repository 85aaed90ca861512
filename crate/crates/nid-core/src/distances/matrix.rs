//! Labeled, exactly symmetric, zero-diagonal distance matrices with CSV,
//! PHYLIP and JSON export.

use rayon::prelude::*;

use crate::compressors::CompressorHandle;
use crate::compressors::DataItem;
use crate::frequency::FrequencyProvider;

use super::{
    format_value, ncd_from_lengths, ncd_sum_from_lengths, ncd_unnormalized_from_lengths, nwd,
    nwd_min, nwd_unnormalized, parse_value, DistanceError, DistanceValue, Method,
};

/// Identifies how every cell of a matrix was produced.
#[derive(Clone, Debug, serde::Serialize)]
pub struct MatrixFingerprint {
    pub method: Method,
    /// Compressor name or provider id.
    pub backend: String,
    pub log_base: f64,
}

/// A symmetric distance matrix over labeled items. The diagonal is exactly
/// zero; for compression methods the measured self-distance numerator is
/// retained in the diagonal cells as an audit trail.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    cells: Vec<DistanceValue>,
    fingerprint: MatrixFingerprint,
}

fn check_labels(labels: &[String]) -> Result<(), DistanceError> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(DistanceError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl DistanceMatrix {
    /// Builds an NCD-family matrix. `Z(xy)` is symmetrized over both
    /// concatenation orders, so the matrix is symmetric by construction.
    /// Each self-distance numerator is checked against the compressor's
    /// frozen identity bound before the diagonal is snapped to zero.
    pub fn from_compressor(
        z: &CompressorHandle,
        items: &[DataItem],
        method: Method,
    ) -> Result<Self, DistanceError> {
        if !method.is_compression() {
            return Err(DistanceError::MethodMismatch(
                "a compressor backend computes ncd, ncd-unnorm or ncd-sum",
            ));
        }
        if items.len() < 2 {
            return Err(DistanceError::TooFewItems(items.len()));
        }
        let labels: Vec<String> = items.iter().map(|i| i.label().to_string()).collect();
        check_labels(&labels)?;

        let singles: Vec<f64> = items
            .par_iter()
            .map(|x| z.compressed_len_bits(x.bytes()).map(|b| b as f64))
            .collect::<Result<_, _>>()?;

        // Self-distances: measure, check, then store exact zero.
        let diag_nums: Vec<f64> = items
            .par_iter()
            .map(|x| super::symmetric_concat_bits(z, x, x))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .zip(&singles)
            .map(|(zxx, &zx)| (zxx - zx).max(0.0))
            .collect();
        for (item, &num) in items.iter().zip(&diag_nums) {
            if let Some(bound) = z.identity_slack_bits(item.len()) {
                if num > bound {
                    return Err(DistanceError::DiagonalIdentity {
                        label: item.label().to_string(),
                        numerator_bits: num,
                        bound_bits: bound,
                    });
                }
            }
        }

        let n = items.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let computed: Vec<DistanceValue> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let cell = || -> Result<DistanceValue, DistanceError> {
                    let zxy = super::symmetric_concat_bits(z, &items[i], &items[j])?;
                    match method {
                        Method::Ncd => ncd_from_lengths(singles[i], singles[j], zxy),
                        Method::NcdSum => ncd_sum_from_lengths(singles[i], singles[j], zxy),
                        Method::NcdUnnorm => {
                            Ok(ncd_unnormalized_from_lengths(singles[i], singles[j], zxy))
                        }
                        _ => unreachable!("checked above"),
                    }
                };
                cell().map_err(|e| DistanceError::CellFailed {
                    a: items[i].label().to_string(),
                    b: items[j].label().to_string(),
                    source: Box::new(e),
                })
            })
            .collect::<Result<_, _>>()?;

        let mut cells = vec![
            DistanceValue {
                value: 0.0,
                numerator_bits: 0.0,
                denominator_bits: 0.0,
                method,
            };
            n * n
        ];
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            cells[i * n + j] = computed[idx];
            cells[j * n + i] = computed[idx];
        }
        for i in 0..n {
            cells[i * n + i] = DistanceValue {
                value: 0.0,
                numerator_bits: diag_nums[i],
                denominator_bits: singles[i],
                method,
            };
        }

        Ok(DistanceMatrix {
            labels,
            cells,
            fingerprint: MatrixFingerprint {
                method,
                backend: z.name().to_string(),
                log_base: 2.0,
            },
        })
    }

    /// Builds a Web-distance matrix over terms. The formulas are symmetric
    /// in their arguments, so each unordered pair is computed once.
    pub fn from_provider<P: FrequencyProvider + ?Sized>(
        p: &P,
        terms: &[String],
        method: Method,
        base: f64,
    ) -> Result<Self, DistanceError> {
        if method.is_compression() || method == Method::Imported || method == Method::NwdMinCond {
            return Err(DistanceError::MethodMismatch(
                "a provider backend computes nwd, nwd-unnorm or nwd-min",
            ));
        }
        if terms.len() < 2 {
            return Err(DistanceError::TooFewItems(terms.len()));
        }
        check_labels(terms)?;

        let n = terms.len();
        let mut cells = vec![
            DistanceValue {
                value: 0.0,
                numerator_bits: 0.0,
                denominator_bits: 0.0,
                method,
            };
            n * n
        ];
        let compute = |x: &str, y: &str| -> Result<DistanceValue, DistanceError> {
            match method {
                Method::Nwd => nwd(p, x, y, base),
                Method::NwdMin => nwd_min(p, x, y, base),
                Method::NwdUnnorm => nwd_unnormalized(p, x, y, base),
                _ => unreachable!("checked above"),
            }
        };
        for i in 0..n {
            for j in i..n {
                let v = compute(&terms[i], &terms[j]).map_err(|e| DistanceError::CellFailed {
                    a: terms[i].clone(),
                    b: terms[j].clone(),
                    source: Box::new(e),
                })?;
                cells[i * n + j] = v;
                cells[j * n + i] = v;
            }
        }

        Ok(DistanceMatrix {
            labels: terms.to_vec(),
            cells,
            fingerprint: MatrixFingerprint {
                method,
                backend: p.id(),
                log_base: base,
            },
        })
    }

    /// Assembles a matrix from explicit values (upper triangle read from a
    /// full square array); used by the importer and by tests.
    pub fn from_values(
        labels: Vec<String>,
        values: Vec<Vec<f64>>,
        fingerprint: MatrixFingerprint,
    ) -> Result<Self, DistanceError> {
        let n = labels.len();
        if n < 2 {
            return Err(DistanceError::TooFewItems(n));
        }
        check_labels(&labels)?;
        let bad = |reason: &str| DistanceError::MatrixParse {
            line: 0,
            reason: reason.to_string(),
        };
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(bad("matrix is not square"));
        }
        let mut cells = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = values[i][j];
                let w = values[j][i];
                let sym_ok = v == w
                    || (v.is_finite() && w.is_finite() && (v - w).abs() <= 1e-9 * v.abs().max(1.0));
                if !sym_ok {
                    return Err(bad(&format!(
                        "asymmetric cells ({}, {}): {v} vs {w}",
                        labels[i], labels[j]
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(bad(&format!("nonzero diagonal at {}", labels[i])));
                }
                if v.is_nan() || v < 0.0 {
                    return Err(bad("cells must be non-negative numbers or inf"));
                }
                let canon = if i <= j { values[i][j] } else { values[j][i] };
                cells.push(DistanceValue {
                    value: canon,
                    numerator_bits: canon,
                    denominator_bits: 1.0,
                    method: fingerprint.method,
                });
            }
        }
        Ok(DistanceMatrix {
            labels,
            cells,
            fingerprint,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn fingerprint(&self) -> &MatrixFingerprint {
        &self.fingerprint
    }

    pub fn cell(&self, i: usize, j: usize) -> &DistanceValue {
        &self.cells[i * self.labels.len() + j]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j).value
    }

    /// True when no cell holds the infinity sentinel.
    pub fn all_finite(&self) -> bool {
        self.cells.iter().all(|c| c.value.is_finite())
    }

    /// CSV: a header row of labels, then one labeled row per item.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["label".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.len() {
            let mut row = vec![self.labels[i].clone()];
            row.extend((0..self.len()).map(|j| format_value(self.value(i, j), 6)));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    /// Parses a matrix produced by [`DistanceMatrix::to_csv`]. Lines
    /// starting with `#` are ignored.
    pub fn from_csv(text: &str) -> Result<Self, DistanceError> {
        let cleaned: String = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n");
        let mut r = csv::Reader::from_reader(cleaned.as_bytes());
        let headers = r
            .headers()
            .map_err(|e| DistanceError::MatrixParse {
                line: 1,
                reason: e.to_string(),
            })?
            .clone();
        let labels: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
        let mut values = Vec::new();
        for (idx, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| DistanceError::MatrixParse {
                line: idx + 2,
                reason: e.to_string(),
            })?;
            let row_label = rec.get(0).unwrap_or_default();
            if row_label != labels[values.len()] {
                return Err(DistanceError::MatrixParse {
                    line: idx + 2,
                    reason: format!(
                        "row label {row_label:?} does not match header order ({:?} expected)",
                        labels[values.len()]
                    ),
                });
            }
            let row: Vec<f64> = rec
                .iter()
                .skip(1)
                .map(|s| {
                    parse_value(s).ok_or_else(|| DistanceError::MatrixParse {
                        line: idx + 2,
                        reason: format!("bad value {s:?}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if row.len() != labels.len() {
                return Err(DistanceError::MatrixParse {
                    line: idx + 2,
                    reason: "row width does not match header".to_string(),
                });
            }
            values.push(row);
        }
        if values.len() != labels.len() {
            return Err(DistanceError::MatrixParse {
                line: 0,
                reason: "row count does not match header".to_string(),
            });
        }
        Self::from_values(
            labels,
            values,
            MatrixFingerprint {
                method: Method::Imported,
                backend: "csv".to_string(),
                log_base: 2.0,
            },
        )
    }

    /// PHYLIP square format: item count, then rows of a 10-character
    /// padded label and space-separated values.
    pub fn to_phylip(&self) -> String {
        let mut out = format!("{}\n", self.len());
        for i in 0..self.len() {
            let mut label: String = self.labels[i].chars().take(10).collect();
            while label.len() < 10 {
                label.push(' ');
            }
            let row: Vec<String> = (0..self.len())
                .map(|j| format_value(self.value(i, j), 6))
                .collect();
            out.push_str(&label);
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// JSON with the fingerprint block; infinities become the string
    /// `"inf"`.
    pub fn to_json(&self) -> String {
        use serde_json::{json, Value};
        let cells: Vec<Vec<Value>> = (0..self.len())
            .map(|i| {
                (0..self.len())
                    .map(|j| {
                        let v = self.value(i, j);
                        if v.is_infinite() {
                            Value::String("inf".to_string())
                        } else {
                            json!(v)
                        }
                    })
                    .collect()
            })
            .collect();
        let doc = json!({
            "labels": self.labels,
            "fingerprint": {
                "method": self.fingerprint.method.name(),
                "backend": self.fingerprint.backend,
                "log_base": self.fingerprint.log_base,
            },
            "cells": cells,
        });
        serde_json::to_string_pretty(&doc).expect("matrix serializes")
    }
}
