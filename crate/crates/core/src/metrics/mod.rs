//! Corpus and segment level BLEU and chrF.
//!
//! Both metrics reproduce sacreBLEU 2.1.0 scores bit for bit. Corpus scores
//! are computed from per-segment sufficient statistics, which are integer
//! counts, so parallel extraction cannot change the result.

mod bleu;
mod chrf;
mod signature;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{
    bleu_corpus, bleu_segment, bleu_statistics, compute_bleu, BleuConfig, BleuStatistics, Smoothing, MAX_NGRAM_ORDER,
};
pub use chrf::{chrf_corpus, chrf_segment, chrf_statistics, ChrfConfig, ChrfStatistics};
pub use signature::{parse_signature, render_signature, MetricConfig, RefCount, Signature, SignatureError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
    #[error("{hyps} hypotheses but references for {refs} segments")]
    Alignment { hyps: usize, refs: usize },
    #[error("segment {segment} has no non-empty reference")]
    NoReference { segment: usize },
    #[error("invalid metric parameter: {0}")]
    InvalidParameter(String),
}

/// A corpus-level score with optional segment-level values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    /// Short display name such as `BLEU`, `chrF2` or a learned-metric model id.
    pub metric: String,
    pub value: f64,
    pub per_segment: Option<Vec<f64>>,
    pub signature: String,
}

/// Writes `segment_index<TAB>score` lines.
pub fn write_segment_scores<W: Write>(out: &mut W, scores: &[f64]) -> io::Result<()> {
    for (i, s) in scores.iter().enumerate() {
        writeln!(out, "{i}\t{s}")?;
    }
    Ok(())
}

/// Drops empty references and checks that every segment keeps at least one.
pub(crate) fn usable_references<S: AsRef<str>>(
    refs: &[Vec<S>],
    hyps: usize,
) -> Result<(Vec<Vec<&str>>, RefCount), MetricError> {
    if hyps == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    if refs.len() != hyps {
        return Err(MetricError::Alignment { hyps, refs: refs.len() });
    }
    let mut counts = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(refs.len());
    for (segment, seg_refs) in refs.iter().enumerate() {
        let kept: Vec<&str> = seg_refs.iter().map(AsRef::as_ref).filter(|r| !r.is_empty()).collect();
        if kept.is_empty() {
            return Err(MetricError::NoReference { segment });
        }
        counts.insert(kept.len());
        out.push(kept);
    }
    let nrefs = if counts.len() == 1 { RefCount::Fixed(*counts.first().unwrap()) } else { RefCount::Variable };
    Ok((out, nrefs))
}

/// Sorted run-length encoding: each distinct item with its multiplicity.
pub(crate) fn runs<T: Ord + Copy>(mut items: Vec<T>) -> Vec<(T, u64)> {
    items.sort_unstable();
    let mut out: Vec<(T, u64)> = Vec::with_capacity(items.len());
    for it in items {
        match out.last_mut() {
            Some((last, n)) if *last == it => *n += 1,
            _ => out.push((it, 1)),
        }
    }
    out
}

/// Clipped match count between two sorted run lists.
pub(crate) fn clipped_matches<T: Ord>(hyp: &[(T, u64)], reference: &[(T, u64)]) -> u64 {
    let (mut i, mut j, mut m) = (0, 0, 0);
    while i < hyp.len() && j < reference.len() {
        match hyp[i].0.cmp(&reference[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                m += hyp[i].1.min(reference[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    m
}
