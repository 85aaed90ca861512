//! Immutable frequency snapshots with a canonical line-oriented file form:
//!
//! ```text
//! NWD-SNAPSHOT v1
//! N <total>
//! <term>[\t<term>[\t<term>]]\t<count>
//! ```
//!
//! Terms are percent-encoded, sorted within a tuple, and tuples are sorted;
//! saving is canonical, so save∘load∘save is byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use sha2::{Digest, Sha256};

use super::{FrequencyProvider, ProviderError, TermSet, MAX_ARITY};

const HEADER: &str = "NWD-SNAPSHOT v1";
/// Tab, newline and CR are in CONTROLS; '%' must round-trip too.
pub(crate) const TERM_ESCAPE: &AsciiSet = &CONTROLS.add(b'%');

/// A frozen universe of term-tuple counts plus the total `N`.
///
/// Snapshots marked closed-world answer 0 for absent tuples; open-world
/// snapshots (the default for hand-written files) refuse with
/// [`ProviderError::MissingEntry`] so incomplete data cannot silently
/// masquerade as zero co-occurrence.
#[derive(Clone, Debug)]
pub struct FrequencySnapshot {
    id: String,
    n: u64,
    entries: BTreeMap<TermSet, u64>,
    closed_world: bool,
    /// In-memory provenance; not part of the canonical file form.
    pub created: Option<String>,
    pub tokenizer_version: Option<String>,
}

impl FrequencySnapshot {
    pub fn new<I>(n: u64, entries: I, closed_world: bool) -> Result<Self, ProviderError>
    where
        I: IntoIterator<Item = (TermSet, u64)>,
    {
        let mut map = BTreeMap::new();
        for (terms, count) in entries {
            if map.insert(terms.clone(), count).is_some() {
                return Err(ProviderError::MalformedSnapshot {
                    line: 0,
                    reason: format!("duplicate tuple {terms}"),
                });
            }
        }
        let mut snap = FrequencySnapshot {
            id: String::new(),
            n,
            entries: map,
            closed_world,
            created: None,
            tokenizer_version: None,
        };
        snap.validate()?;
        snap.id = snap.content_hash();
        Ok(snap)
    }

    /// Freezes counts for the given tuples out of a live provider.
    pub fn capture<P, I>(provider: &P, tuples: I, closed_world: bool) -> Result<Self, ProviderError>
    where
        P: FrequencyProvider + ?Sized,
        I: IntoIterator<Item = TermSet>,
    {
        let n = provider.total()?;
        let mut entries = BTreeMap::new();
        for t in tuples {
            let c = provider.count(&t)?;
            entries.insert(t, c);
        }
        let mut snap = FrequencySnapshot::new(n, entries, closed_world)?;
        snap.created = Some("capture".to_string());
        Ok(snap)
    }

    fn validate(&self) -> Result<(), ProviderError> {
        if self.n == 0 {
            return Err(ProviderError::MalformedSnapshot {
                line: 0,
                reason: "total N must be positive".to_string(),
            });
        }
        for (terms, &count) in &self.entries {
            if count > self.n {
                return Err(ProviderError::MalformedSnapshot {
                    line: 0,
                    reason: format!("count {count} for {terms} exceeds N = {}", self.n),
                });
            }
            for sub in terms.proper_subsets() {
                if let Some(&sub_count) = self.entries.get(&sub) {
                    if count > sub_count {
                        return Err(ProviderError::MalformedSnapshot {
                            line: 0,
                            reason: format!(
                                "count {count} for {terms} exceeds count {sub_count} of subset {sub}"
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Content hash of the canonical form; doubles as the snapshot id.
    fn content_hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_canonical_string().as_bytes()))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn closed_world(&self) -> bool {
        self.closed_world
    }

    pub fn set_closed_world(&mut self, closed: bool) {
        self.closed_world = closed;
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TermSet, u64)> {
        self.entries.iter().map(|(t, &c)| (t, c))
    }

    /// Canonical text form.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        out.push_str(&format!("N {}\n", self.n));
        for (terms, count) in &self.entries {
            let encoded: Vec<String> = terms
                .terms()
                .iter()
                .map(|t| utf8_percent_encode(t, TERM_ESCAPE).to_string())
                .collect();
            out.push_str(&encoded.join("\t"));
            out.push('\t');
            out.push_str(&count.to_string());
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ProviderError> {
        std::fs::write(path, self.to_canonical_string()).map_err(|source| ProviderError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Parses the text form. Loaded snapshots default to open-world.
    pub fn parse(text: &str) -> Result<Self, ProviderError> {
        let malformed = |line: usize, reason: &str| ProviderError::MalformedSnapshot {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
        if header != HEADER {
            return Err(malformed(1, "missing NWD-SNAPSHOT v1 header"));
        }
        let (_, n_line) = lines.next().ok_or_else(|| malformed(2, "missing N line"))?;
        let n = n_line
            .strip_prefix("N ")
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| malformed(2, "expected `N <integer>`"))?;

        let mut entries = BTreeMap::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 || fields.len() > MAX_ARITY + 1 {
                return Err(malformed(lineno, "expected 1-3 terms and a count"));
            }
            let count: u64 = fields[fields.len() - 1]
                .parse()
                .map_err(|_| malformed(lineno, "count is not a non-negative integer"))?;
            let mut terms = Vec::new();
            for raw in &fields[..fields.len() - 1] {
                let decoded = percent_decode_str(raw)
                    .decode_utf8()
                    .map_err(|_| malformed(lineno, "term is not valid UTF-8 after decoding"))?;
                terms.push(decoded.into_owned());
            }
            let set = TermSet::new(terms).map_err(|e| malformed(lineno, &e.to_string()))?;
            if entries.insert(set, count).is_some() {
                return Err(malformed(lineno, "duplicate tuple"));
            }
        }
        let snap = FrequencySnapshot::new(n, entries, false)?;
        Ok(snap)
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProviderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

impl FrequencyProvider for FrequencySnapshot {
    fn count(&self, terms: &TermSet) -> Result<u64, ProviderError> {
        match self.entries.get(terms) {
            Some(&c) => Ok(c),
            None if self.closed_world => Ok(0),
            None => Err(ProviderError::MissingEntry(terms.to_string())),
        }
    }

    fn total(&self) -> Result<u64, ProviderError> {
        Ok(self.n)
    }

    fn id(&self) -> String {
        format!("snapshot:{}", &self.id[..16])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example34() -> FrequencySnapshot {
        FrequencySnapshot::new(
            8_058_044_651,
            [
                (TermSet::single("horse"), 46_700_000),
                (TermSet::single("rider"), 12_200_000),
                (TermSet::pair("horse", "rider"), 2_630_000),
            ],
            false,
        )
        .unwrap()
    }

    #[test]
    fn canonical_form_and_round_trip() {
        let snap = example34();
        let text = snap.to_canonical_string();
        assert_eq!(
            text,
            "NWD-SNAPSHOT v1\nN 8058044651\nhorse\t46700000\nhorse\trider\t2630000\nrider\t12200000\n"
        );
        let reloaded = FrequencySnapshot::parse(&text).unwrap();
        assert_eq!(reloaded.to_canonical_string(), text);
        assert_eq!(reloaded.id(), snap.id());
        assert_eq!(reloaded.count(&TermSet::pair("rider", "horse")).unwrap(), 2_630_000);
    }

    #[test]
    fn tampered_count_rejected() {
        let text = "NWD-SNAPSHOT v1\nN 100\nhorse\t101\n";
        assert!(matches!(
            FrequencySnapshot::parse(text),
            Err(ProviderError::MalformedSnapshot { .. })
        ));
    }

    #[test]
    fn pair_exceeding_single_rejected() {
        let text = "NWD-SNAPSHOT v1\nN 100\nhorse\t10\nhorse\trider\t20\n";
        assert!(matches!(
            FrequencySnapshot::parse(text),
            Err(ProviderError::MalformedSnapshot { .. })
        ));
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let text = "NWD-SNAPSHOT v1\nN 100\nhorse\tnot-a-number\n";
        match FrequencySnapshot::parse(text) {
            Err(ProviderError::MalformedSnapshot { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(FrequencySnapshot::parse("BOGUS\n").is_err());
    }

    #[test]
    fn open_vs_closed_world() {
        let mut snap = example34();
        assert!(matches!(
            snap.count(&TermSet::single("zebra")),
            Err(ProviderError::MissingEntry(_))
        ));
        snap.set_closed_world(true);
        assert_eq!(snap.count(&TermSet::single("zebra")).unwrap(), 0);
    }

    #[test]
    fn percent_encoding_round_trips_awkward_terms() {
        let snap = FrequencySnapshot::new(
            10,
            [
                (TermSet::single("has\ttab"), 1),
                (TermSet::single("has%percent"), 2),
                (TermSet::single("Lake Washington"), 3),
            ],
            false,
        )
        .unwrap();
        let text = snap.to_canonical_string();
        let reloaded = FrequencySnapshot::parse(&text).unwrap();
        assert_eq!(reloaded.count(&TermSet::single("has\ttab")).unwrap(), 1);
        assert_eq!(reloaded.count(&TermSet::single("has%percent")).unwrap(), 2);
        assert_eq!(reloaded.count(&TermSet::single("Lake Washington")).unwrap(), 3);
        assert_eq!(reloaded.to_canonical_string(), text);
    }

    #[test]
    fn capture_from_index() {
        use crate::frequency::index_corpus;
        let idx = index_corpus([("1", "red apple"), ("2", "red sky")]).unwrap();
        let snap = FrequencySnapshot::capture(
            &idx,
            [TermSet::single("red"), TermSet::pair("red", "apple")],
            true,
        )
        .unwrap();
        assert_eq!(snap.n(), 2);
        assert!(snap.closed_world());
        assert_eq!(snap.count(&TermSet::pair("apple", "red")).unwrap(), 1);
    }
}
