//! Sentence matching statistics: exact matches against the reference and
//! inconsistent translations of repeated source segments.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EvaluationCorpus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error("{left} segments compared against {right}")]
    Alignment { left: usize, right: usize },
}

fn aligned<A, B>(a: &[A], b: &[B]) -> Result<(), DiagnosticsError> {
    if a.len() != b.len() {
        return Err(DiagnosticsError::Alignment { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// Number of segments byte-identical to the reference.
pub fn exact_match<S: AsRef<str>, R: AsRef<str>>(system: &[S], reference: &[R]) -> Result<usize, DiagnosticsError> {
    aligned(system, reference)?;
    Ok(system.iter().zip(reference).filter(|(s, r)| s.as_ref() == r.as_ref()).count())
}

/// Positions grouped by source string, keeping only repeated sources.
fn duplicate_groups<S: AsRef<str>>(sources: &[S]) -> Vec<Vec<usize>> {
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, s) in sources.iter().enumerate() {
        groups.entry(s.as_ref()).or_default().push(i);
    }
    groups.into_values().filter(|g| g.len() >= 2).collect()
}

/// Counts for one translation stream over repeated sources.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MismatchCounts {
    /// Positions whose translation differs from another position of the same source.
    pub mismatches: usize,
    /// Positions whose source occurs more than once.
    pub duplicated: usize,
    /// Sum over repeated sources of (distinct translations - 1).
    pub extra_variants: usize,
}

pub fn self_mismatch<S: AsRef<str>, T: AsRef<str>>(
    sources: &[S],
    translations: &[T],
) -> Result<MismatchCounts, DiagnosticsError> {
    aligned(sources, translations)?;
    let mut counts = MismatchCounts::default();
    for group in duplicate_groups(sources) {
        let distinct: HashSet<&str> = group.iter().map(|&i| translations[i].as_ref()).collect();
        counts.duplicated += group.len();
        if distinct.len() > 1 {
            counts.mismatches += group.len();
        }
        counts.extra_variants += distinct.len() - 1;
    }
    Ok(counts)
}

/// Rendered as `system/reference/duplicated/total`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfMismatchStats {
    pub system_mismatches: usize,
    pub reference_mismatches: usize,
    pub duplicated_sources: usize,
    pub total_segments: usize,
}

impl fmt::Display for SelfMismatchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.system_mismatches, self.reference_mismatches, self.duplicated_sources, self.total_segments
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub system_id: String,
    pub exact_match: usize,
    pub self_mismatch: SelfMismatchStats,
    /// Variant counting alternative: extra distinct translations of the
    /// system and of the reference over repeated sources.
    pub system_variants: usize,
    pub reference_variants: usize,
}

/// One record per system, compared with the first reference.
pub fn diagnostics_table(corpus: &EvaluationCorpus) -> Vec<DiagnosticsRecord> {
    let sources = corpus.sources();
    let reference = &corpus.references()[0].segments;
    let ref_counts = self_mismatch(sources, reference).expect("corpus streams are aligned");
    corpus
        .systems()
        .iter()
        .map(|s| {
            let sys = self_mismatch(sources, &s.segments).expect("corpus streams are aligned");
            DiagnosticsRecord {
                system_id: s.system_id.clone(),
                exact_match: exact_match(&s.segments, reference).expect("corpus streams are aligned"),
                self_mismatch: SelfMismatchStats {
                    system_mismatches: sys.mismatches,
                    reference_mismatches: ref_counts.mismatches,
                    duplicated_sources: sys.duplicated,
                    total_segments: corpus.segment_count(),
                },
                system_variants: sys.extra_variants,
                reference_variants: ref_counts.extra_variants,
            }
        })
        .collect()
}

pub fn records_to_json(records: &[DiagnosticsRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

pub fn records_to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["system", "exact_match", "self_mismatch", "system_variants", "reference_variants"])
        .expect("in-memory write");
    for r in records {
        w.write_record([
            r.system_id.clone(),
            r.exact_match.to_string(),
            r.self_mismatch.to_string(),
            r.system_variants.to_string(),
            r.reference_variants.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_matches() {
        assert_eq!(exact_match(&["a", "b"], &["a", "b"]).unwrap(), 2);
        assert_eq!(exact_match(&["a", "b"], &["x", "y"]).unwrap(), 0);
        assert!(exact_match(&["a"], &["a", "b"]).is_err());
    }

    #[test]
    fn mismatch_examples() {
        let none = self_mismatch(&["a", "b"], &["x", "y"]).unwrap();
        assert_eq!((none.mismatches, none.duplicated), (0, 0));
        let one = self_mismatch(&["s", "s", "t"], &["x", "y", "z"]).unwrap();
        assert_eq!((one.mismatches, one.duplicated, one.extra_variants), (2, 2, 1));
        let same = self_mismatch(&["s", "s"], &["x", "x"]).unwrap();
        assert_eq!((same.mismatches, same.duplicated), (0, 2));
    }

    #[test]
    fn every_member_of_an_inconsistent_group_counts() {
        let c = self_mismatch(&["s", "s", "s"], &["x", "x", "y"]).unwrap();
        assert_eq!((c.mismatches, c.extra_variants), (3, 1));
    }

    #[test]
    fn quadruple_rendering() {
        let s = SelfMismatchStats {
            system_mismatches: 47,
            reference_mismatches: 63,
            duplicated_sources: 122,
            total_segments: 2037,
        };
        assert_eq!(s.to_string(), "47/63/122/2037");
    }
}
