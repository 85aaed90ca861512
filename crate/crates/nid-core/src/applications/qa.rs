//! Question-answer candidate ranking by the min Web distance, which favors
//! well-known concepts whose irrelevant bulk would otherwise inflate the
//! plain distance.

use serde_json::json;

use crate::distances::{nwd_min, nwd_min_conditional, DistanceError};
use crate::frequency::{FrequencyProvider, TermSet};

use super::AppError;

/// Score of one candidate: the mean min-distance to the question terms.
#[derive(Clone, Debug, PartialEq)]
pub enum AnswerScore {
    Finite(f64),
    /// Zero co-occurrence with at least one question term.
    Infinite,
    /// The provider failed for this candidate; kept in the ranking rather
    /// than dropped silently.
    Unscorable(String),
}

#[derive(Clone, Debug)]
pub struct TermScore {
    pub term: String,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct RankedAnswer {
    pub candidate: String,
    pub score: AnswerScore,
    /// Frequency of the candidate term; the tie-breaker (ties prefer the
    /// better-known candidate).
    pub frequency: Option<u64>,
    pub basis: Vec<TermScore>,
}

/// Scores every candidate against every question term with the min Web
/// distance (conditioned on `condition` when given) and returns them best
/// first: finite scores ascending, then infinities, then unscorable
/// candidates; ties prefer the higher candidate frequency.
pub fn rank_answers<P: FrequencyProvider + ?Sized>(
    question_terms: &[String],
    candidates: &[String],
    provider: &P,
    condition: Option<&str>,
    base: f64,
) -> Result<Vec<RankedAnswer>, AppError> {
    if question_terms.is_empty() {
        return Err(AppError::NoQuestionTerms);
    }
    if candidates.is_empty() {
        return Err(AppError::NoCandidates);
    }
    // Unknown question terms (or an unknown condition) poison every
    // candidate; fail the call instead of emitting an all-unscorable list.
    for term in question_terms {
        if provider.count(&TermSet::single(term)).map_err(DistanceError::from)? == 0 {
            return Err(AppError::Distance(DistanceError::UnknownTerm(term.clone())));
        }
    }
    if let Some(c) = condition {
        if provider.count(&TermSet::single(c)).map_err(DistanceError::from)? == 0 {
            return Err(AppError::Distance(DistanceError::UnknownTerm(c.to_string())));
        }
    }

    let mut out = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let mut basis = Vec::new();
        let mut failed: Option<String> = None;
        for term in question_terms {
            let res = match condition {
                Some(c) => nwd_min_conditional(provider, term, candidate, c, base),
                None => nwd_min(provider, term, candidate, base),
            };
            match res {
                Ok(v) => basis.push(TermScore {
                    term: term.clone(),
                    value: v.value,
                }),
                Err(e) => {
                    failed = Some(e.to_string());
                    break;
                }
            }
        }
        let frequency = provider.count(&TermSet::single(candidate)).ok();
        let score = match failed {
            Some(reason) => AnswerScore::Unscorable(reason),
            None => {
                let mean = basis.iter().map(|t| t.value).sum::<f64>() / basis.len() as f64;
                if mean.is_finite() {
                    AnswerScore::Finite(mean)
                } else {
                    AnswerScore::Infinite
                }
            }
        };
        out.push(RankedAnswer {
            candidate: candidate.clone(),
            score,
            frequency,
            basis,
        });
    }

    out.sort_by(|a, b| {
        let class = |s: &AnswerScore| match s {
            AnswerScore::Finite(_) => 0u8,
            AnswerScore::Infinite => 1,
            AnswerScore::Unscorable(_) => 2,
        };
        class(&a.score)
            .cmp(&class(&b.score))
            .then_with(|| match (&a.score, &b.score) {
                (AnswerScore::Finite(x), AnswerScore::Finite(y)) => x.total_cmp(y),
                _ => std::cmp::Ordering::Equal,
            })
            .then_with(|| b.frequency.unwrap_or(0).cmp(&a.frequency.unwrap_or(0)))
            .then_with(|| a.candidate.cmp(&b.candidate))
    });
    Ok(out)
}

/// JSON list of `{candidate, score, basis}` objects; infinities render as
/// the string `"inf"` and unscorable candidates carry a `note` instead of
/// a score.
pub fn ranked_to_json(ranked: &[RankedAnswer]) -> String {
    let items: Vec<serde_json::Value> = ranked
        .iter()
        .map(|r| {
            let score = match &r.score {
                AnswerScore::Finite(v) => json!(v),
                AnswerScore::Infinite => json!("inf"),
                AnswerScore::Unscorable(_) => serde_json::Value::Null,
            };
            let basis: Vec<serde_json::Value> = r
                .basis
                .iter()
                .map(|t| {
                    json!({
                        "term": t.term,
                        "value": if t.value.is_finite() { json!(t.value) } else { json!("inf") },
                    })
                })
                .collect();
            let mut obj = json!({
                "candidate": r.candidate,
                "score": score,
                "frequency": r.frequency,
                "basis": basis,
            });
            if let AnswerScore::Unscorable(reason) = &r.score {
                obj["note"] = json!(reason);
            }
            obj
        })
        .collect();
    serde_json::to_string_pretty(&items).expect("answers serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::nwd;
    use crate::frequency::FrequencySnapshot;

    /// A synthetic universe where the plain Web distance prefers candidate
    /// A but the min distance prefers the better-known candidate B.
    pub(crate) fn flip_snapshot(scale: u64) -> FrequencySnapshot {
        FrequencySnapshot::new(
            1_000_000_000 * scale,
            [
                (TermSet::single("key"), 1_000_000 * scale),
                (TermSet::single("cand_a"), 100_000 * scale),
                (TermSet::single("cand_b"), 10_000_000 * scale),
                (TermSet::single("cand_c"), 1_000_000 * scale),
                (TermSet::pair("key", "cand_a"), 50_000 * scale),
                (TermSet::pair("key", "cand_b"), 800_000 * scale),
                (TermSet::pair("key", "cand_c"), 1_000 * scale),
            ],
            false,
        )
        .unwrap()
    }

    #[test]
    fn min_distance_flips_the_winner() {
        let snap = flip_snapshot(1);
        // Oracle: direct evaluation of both formulas on the raw counts.
        let lg = |v: f64| v.log2();
        let (n, fk) = (1e9, 1e6);
        let (fa, fka) = (1e5, 5e4);
        let (fb, fkb) = (1e7, 8e5);
        let nwd_a = (lg(fk).max(lg(fa)) - lg(fka)) / (lg(n) - lg(fk).min(lg(fa)));
        let nwd_b = (lg(fk).max(lg(fb)) - lg(fkb)) / (lg(n) - lg(fk).min(lg(fb)));
        assert!(nwd_a < nwd_b, "plain distance prefers A");
        let min_a = (lg(fk).min(lg(fa)) - lg(fka)) / (lg(n) - lg(fk).max(lg(fa)));
        let min_b = (lg(fk).min(lg(fb)) - lg(fkb)) / (lg(n) - lg(fk).max(lg(fb)));
        assert!(min_b < min_a, "min distance prefers B");

        let got_a = nwd(&snap, "key", "cand_a", 2.0).unwrap().value;
        let got_b = nwd(&snap, "key", "cand_b", 2.0).unwrap().value;
        assert!((got_a - nwd_a).abs() < 1e-12);
        assert!((got_b - nwd_b).abs() < 1e-12);
        assert!(got_a < got_b);

        let key = vec!["key".to_string()];
        let candidates: Vec<String> =
            ["cand_a", "cand_b", "cand_c"].iter().map(|s| s.to_string()).collect();
        let ranked = rank_answers(&key, &candidates, &snap, None, 2.0).unwrap();
        assert_eq!(ranked[0].candidate, "cand_b");
        match ranked[0].score {
            AnswerScore::Finite(v) => assert!((v - min_b).abs() < 1e-12),
            ref other => panic!("unexpected score {other:?}"),
        }
    }

    #[test]
    fn scale_invariance_to_twelve_digits() {
        let key = vec!["key".to_string()];
        let candidates: Vec<String> =
            ["cand_a", "cand_b", "cand_c"].iter().map(|s| s.to_string()).collect();
        let r1 = rank_answers(&key, &candidates, &flip_snapshot(1), None, 2.0).unwrap();
        let r2 = rank_answers(&key, &candidates, &flip_snapshot(2), None, 2.0).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(a.candidate, b.candidate);
            match (&a.score, &b.score) {
                (AnswerScore::Finite(x), AnswerScore::Finite(y)) => {
                    assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}");
                }
                (x, y) => assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn single_candidate_returned_regardless() {
        let snap = flip_snapshot(1);
        let ranked = rank_answers(
            &["key".to_string()],
            &["cand_c".to_string()],
            &snap,
            None,
            2.0,
        )
        .unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].candidate, "cand_c");
    }

    #[test]
    fn zero_cooccurrence_ranks_last_as_inf() {
        let snap = FrequencySnapshot::new(
            1_000_000,
            [
                (TermSet::single("key"), 1_000),
                (TermSet::single("near"), 2_000),
                (TermSet::single("far"), 5_000),
                (TermSet::pair("key", "near"), 500),
                (TermSet::pair("key", "far"), 0),
            ],
            false,
        )
        .unwrap();
        let ranked = rank_answers(
            &["key".to_string()],
            &["far".to_string(), "near".to_string()],
            &snap,
            None,
            2.0,
        )
        .unwrap();
        assert_eq!(ranked[0].candidate, "near");
        assert_eq!(ranked[1].candidate, "far");
        assert_eq!(ranked[1].score, AnswerScore::Infinite);
        let js = ranked_to_json(&ranked);
        assert!(js.contains("\"inf\""));
    }

    /// Conditioning on a clue term flips the preferred answer.
    pub(crate) fn conditional_flip_snapshot() -> FrequencySnapshot {
        FrequencySnapshot::new(
            1_000_000_000,
            [
                (TermSet::single("key"), 100_000),
                (TermSet::single("l1"), 10_000_000),
                (TermSet::single("l2"), 1_000_000),
                (TermSet::single("clue"), 1_000_000),
                (TermSet::pair("key", "l1"), 60_000),
                (TermSet::pair("key", "l2"), 10_000),
                (TermSet::pair("key", "clue"), 50_000),
                (TermSet::pair("l1", "clue"), 100_000),
                (TermSet::pair("l2", "clue"), 200_000),
                (TermSet::triple("key", "l1", "clue"), 1_000),
                (TermSet::triple("key", "l2", "clue"), 10_000),
            ],
            false,
        )
        .unwrap()
    }

    #[test]
    fn condition_term_flips_the_answer() {
        let snap = conditional_flip_snapshot();
        let key = vec!["key".to_string()];
        let candidates: Vec<String> = ["l1", "l2"].iter().map(|s| s.to_string()).collect();
        let plain = rank_answers(&key, &candidates, &snap, None, 2.0).unwrap();
        assert_eq!(plain[0].candidate, "l1");
        let conditioned = rank_answers(&key, &candidates, &snap, Some("clue"), 2.0).unwrap();
        assert_eq!(conditioned[0].candidate, "l2");
    }

    #[test]
    fn unknown_key_term_fails_whole_call() {
        let snap = flip_snapshot(1);
        let err = rank_answers(
            &["nonexistent".to_string()],
            &["cand_a".to_string()],
            &snap.closed(),
            None,
            2.0,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            AppError::Distance(DistanceError::UnknownTerm(_))
        ));
    }

    #[test]
    fn provider_failure_marks_candidate_unscorable() {
        // Open-world snapshot missing one candidate's pair entry: that
        // candidate is unscorable, the rest are ranked.
        let snap = FrequencySnapshot::new(
            1_000_000,
            [
                (TermSet::single("key"), 1_000),
                (TermSet::single("ok"), 2_000),
                (TermSet::single("broken"), 2_000),
                (TermSet::pair("key", "ok"), 500),
            ],
            false,
        )
        .unwrap();
        let ranked = rank_answers(
            &["key".to_string()],
            &["broken".to_string(), "ok".to_string()],
            &snap,
            None,
            2.0,
        )
        .unwrap();
        assert_eq!(ranked[0].candidate, "ok");
        assert!(matches!(ranked[1].score, AnswerScore::Unscorable(_)));
        assert!(ranked_to_json(&ranked).contains("note"));
    }

    impl FrequencySnapshot {
        fn closed(&self) -> Self {
            let mut c = self.clone();
            c.set_closed_world(true);
            c
        }
    }
}
