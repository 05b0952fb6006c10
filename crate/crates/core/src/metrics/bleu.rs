use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::signature::{MetricConfig, RefCount, Signature};
use super::{clipped_matches, runs, usable_references, MetricError, MetricScore};
use crate::tokenize::{py_rstrip, TokenSequence, Tokenizer};

pub const MAX_NGRAM_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    None,
    /// NIST geometric smoothing: the k-th zero precision becomes 1/(2^k t_n).
    Exp,
}

impl Smoothing {
    pub fn name(self) -> &'static str {
        match self {
            Smoothing::None => "none",
            Smoothing::Exp => "exp",
        }
    }
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Smoothing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Smoothing::None),
            "exp" => Ok(Smoothing::Exp),
            other => Err(format!("unsupported smoothing {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub tokenizer: Tokenizer,
    pub smoothing: Smoothing,
    pub lowercase: bool,
    /// Stop averaging at the highest order with any hypothesis n-grams.
    pub effective_order: bool,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { tokenizer: Tokenizer::V13a, smoothing: Smoothing::Exp, lowercase: false, effective_order: false }
    }
}

impl BleuConfig {
    pub fn for_target(lang: &str) -> Self {
        BleuConfig { tokenizer: Tokenizer::for_target(lang), ..BleuConfig::default() }
    }

    pub fn signature(&self, nrefs: RefCount) -> Signature {
        Signature::new(nrefs, MetricConfig::Bleu(self.clone()))
    }

    /// Lowercasing (if enabled), trailing whitespace removal and tokenization.
    pub fn preprocess(&self, text: &str) -> TokenSequence {
        if self.lowercase {
            self.tokenizer.tokenize(py_rstrip(&text.to_lowercase()))
        } else {
            self.tokenizer.tokenize(py_rstrip(text))
        }
    }

    /// Per-segment statistics for raw text. Empty references are ignored.
    pub fn segment_statistics<H, R>(
        &self,
        hyps: &[H],
        refs: &[Vec<R>],
    ) -> Result<(Vec<BleuStatistics>, RefCount), MetricError>
    where
        H: AsRef<str> + Sync,
        R: AsRef<str> + Sync,
    {
        let (refs, nrefs) = usable_references(refs, hyps.len())?;
        let stats = hyps
            .par_iter()
            .zip(refs.par_iter())
            .map(|(h, rs)| {
                let rs: Vec<TokenSequence> = rs.iter().map(|r| self.preprocess(r)).collect();
                bleu_statistics(&self.preprocess(h.as_ref()), &rs)
            })
            .collect();
        Ok((stats, nrefs))
    }

    /// Corpus BLEU over raw text, with segment-level BLEU in `per_segment`.
    pub fn corpus_score<H, R>(&self, hyps: &[H], refs: &[Vec<R>]) -> Result<MetricScore, MetricError>
    where
        H: AsRef<str> + Sync,
        R: AsRef<str> + Sync,
    {
        let (stats, nrefs) = self.segment_statistics(hyps, refs)?;
        Ok(self.score_from_statistics(&stats, nrefs))
    }

    pub fn score_from_statistics(&self, stats: &[BleuStatistics], nrefs: RefCount) -> MetricScore {
        let total = BleuStatistics::sum(stats);
        MetricScore {
            metric: "BLEU".to_string(),
            value: compute_bleu(&total, self.smoothing, self.effective_order),
            per_segment: Some(stats.iter().map(BleuStatistics::segment_score).collect()),
            signature: self.signature(nrefs).to_string(),
        }
    }
}

/// Sufficient statistics of BLEU for one segment or a whole corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BleuStatistics {
    /// Hypothesis length in tokens.
    pub hyp_len: u64,
    /// Closest reference length in tokens.
    pub ref_len: u64,
    pub correct: [u64; MAX_NGRAM_ORDER],
    pub total: [u64; MAX_NGRAM_ORDER],
}

impl BleuStatistics {
    pub fn sum<'a>(stats: impl IntoIterator<Item = &'a BleuStatistics>) -> BleuStatistics {
        let mut acc = BleuStatistics::default();
        for s in stats {
            acc += *s;
        }
        acc
    }

    /// Sentence BLEU: exp smoothing with effective order.
    pub fn segment_score(&self) -> f64 {
        compute_bleu(self, Smoothing::Exp, true)
    }
}

impl AddAssign for BleuStatistics {
    fn add_assign(&mut self, o: BleuStatistics) {
        self.hyp_len += o.hyp_len;
        self.ref_len += o.ref_len;
        for n in 0..MAX_NGRAM_ORDER {
            self.correct[n] += o.correct[n];
            self.total[n] += o.total[n];
        }
    }
}

fn ngram_runs(tokens: &[String], n: usize) -> Vec<(&[String], u64)> {
    runs(tokens.windows(n).collect())
}

fn closest_ref_len(hyp_len: u64, ref_lens: &[u64]) -> u64 {
    let mut best: Option<(u64, u64)> = None;
    for &r in ref_lens {
        let diff = hyp_len.abs_diff(r);
        best = match best {
            Some((d, l)) if diff > d || (diff == d && r >= l) => Some((d, l)),
            _ => Some((diff, r)),
        };
    }
    best.map_or(0, |(_, l)| l)
}

/// Statistics of one hypothesis against its references. Clipping uses the
/// maximum count of each n-gram over all references.
pub fn bleu_statistics(hyp: &TokenSequence, refs: &[TokenSequence]) -> BleuStatistics {
    let ref_lens: Vec<u64> = refs.iter().map(|r| r.len() as u64).collect();
    let mut stats = BleuStatistics {
        hyp_len: hyp.len() as u64,
        ref_len: closest_ref_len(hyp.len() as u64, &ref_lens),
        ..BleuStatistics::default()
    };
    for n in 1..=MAX_NGRAM_ORDER {
        let hyp_runs = ngram_runs(hyp.tokens(), n);
        stats.total[n - 1] = hyp_runs.iter().map(|r| r.1).sum();
        let ref_runs: Vec<_> = refs.iter().map(|r| ngram_runs(r.tokens(), n)).collect();
        stats.correct[n - 1] = match ref_runs.as_slice() {
            [] => 0,
            [single] => clipped_matches(&hyp_runs, single),
            many => hyp_runs
                .iter()
                .map(|(g, c)| {
                    let max_ref = many
                        .iter()
                        .filter_map(|rr| rr.binary_search_by(|(k, _)| k.cmp(g)).ok().map(|i| rr[i].1))
                        .max()
                        .unwrap_or(0);
                    (*c).min(max_ref)
                })
                .sum(),
        };
    }
    stats
}

fn floored_log(x: f64) -> f64 {
    if x == 0.0 {
        -9_999_999_999.0
    } else {
        x.ln()
    }
}

/// BLEU from aggregated statistics, following the reference scorer's
/// order of floating point operations.
pub fn compute_bleu(stats: &BleuStatistics, smoothing: Smoothing, effective_order: bool) -> f64 {
    let (sys_len, ref_len) = (stats.hyp_len, stats.ref_len);
    let bp = if sys_len < ref_len {
        if sys_len > 0 {
            (1.0 - ref_len as f64 / sys_len as f64).exp()
        } else {
            0.0
        }
    } else {
        1.0
    };
    if stats.correct.iter().all(|&c| c == 0) {
        return 0.0;
    }
    let mut precisions = [0.0f64; MAX_NGRAM_ORDER];
    let mut smooth = 1.0f64;
    let mut eff_order = MAX_NGRAM_ORDER;
    for n in 1..=MAX_NGRAM_ORDER {
        let (correct, total) = (stats.correct[n - 1], stats.total[n - 1]);
        if total == 0 {
            break;
        }
        if effective_order {
            eff_order = n;
        }
        if correct == 0 {
            if smoothing == Smoothing::Exp {
                smooth *= 2.0;
                precisions[n - 1] = 100.0 / (smooth * total as f64);
            }
        } else {
            precisions[n - 1] = 100.0 * correct as f64 / total as f64;
        }
    }
    // exp(ln 100) is not exactly 100 in floating point; keep the identity exact.
    if bp == 1.0 && precisions[..eff_order].iter().all(|&p| p == 100.0) {
        return 100.0;
    }
    let log_sum = precisions[..eff_order].iter().fold(0.0, |acc, &p| acc + floored_log(p));
    bp * (log_sum / eff_order as f64).exp()
}

/// Corpus BLEU over pre-tokenized segments. `refs[i]` lists the references
/// of segment `i`. The tokenizer in `config` is only used for the signature.
pub fn bleu_corpus(
    hyps: &[TokenSequence],
    refs: &[Vec<TokenSequence>],
    config: &BleuConfig,
) -> Result<MetricScore, MetricError> {
    if hyps.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if refs.len() != hyps.len() {
        return Err(MetricError::Alignment { hyps: hyps.len(), refs: refs.len() });
    }
    if let Some(segment) = refs.iter().position(Vec::is_empty) {
        return Err(MetricError::NoReference { segment });
    }
    let stats: Vec<BleuStatistics> =
        hyps.par_iter().zip(refs.par_iter()).map(|(h, rs)| bleu_statistics(h, rs)).collect();
    let counts: std::collections::BTreeSet<usize> = refs.iter().map(Vec::len).collect();
    let nrefs = match counts.len() {
        1 => RefCount::Fixed(refs[0].len()),
        _ => RefCount::Variable,
    };
    Ok(config.score_from_statistics(&stats, nrefs))
}

/// Sentence BLEU with exp smoothing and effective order.
pub fn bleu_segment(hyp: &TokenSequence, refs: &[TokenSequence]) -> Result<f64, MetricError> {
    if refs.is_empty() {
        return Err(MetricError::NoReference { segment: 0 });
    }
    Ok(bleu_statistics(hyp, refs).segment_score())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::tokenize_13a;

    fn tok(s: &str) -> TokenSequence {
        TokenSequence::from_whitespace(s)
    }

    #[test]
    fn tonight_today() {
        let s = bleu_corpus(
            &[tok("the cat sat on the mat tonight")],
            &[vec![tok("the cat sat on the mat today")]],
            &BleuConfig::default(),
        )
        .unwrap();
        assert!((s.value - 100.0 * (3.0f64 / 7.0).powf(0.25)).abs() < 1e-9);
        assert!((s.value - 80.91).abs() < 0.01);
    }

    #[test]
    fn identity_and_zero() {
        let h = tok("a b c d e");
        let s = bleu_corpus(std::slice::from_ref(&h), &[vec![h.clone()]], &BleuConfig::default()).unwrap();
        assert_eq!(s.value, 100.0);
        let none = BleuConfig { smoothing: Smoothing::None, ..BleuConfig::default() };
        let z = bleu_corpus(&[tok("x y z")], &[vec![tok("a b c")]], &none).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn short_segment_uses_effective_order() {
        let h = tok("a b c");
        assert_eq!(bleu_segment(&h, std::slice::from_ref(&h)).unwrap(), 100.0);
    }

    #[test]
    fn closest_length_prefers_shorter_on_tie() {
        assert_eq!(closest_ref_len(5, &[6, 4]), 4);
        assert_eq!(closest_ref_len(5, &[4, 6]), 4);
        assert_eq!(closest_ref_len(5, &[7, 6]), 6);
    }

    #[test]
    fn multi_reference_clipping_takes_max() {
        let h = tok("the the the");
        let st = bleu_statistics(&h, &[tok("the cat"), tok("the the dog")]);
        assert_eq!(st.correct[0], 2);
        assert_eq!(st.ref_len, 3);
    }

    #[test]
    fn raw_text_drops_empty_references() {
        let c = BleuConfig::default();
        let s = c.corpus_score(&["Hello, world!", "ok"], &[vec!["Hello, world!", ""], vec!["ok", "fine"]]).unwrap();
        assert!(s.signature.starts_with("nrefs:var|"));
        assert!(c.corpus_score(&["x"], &[vec![""]]).is_err());
        assert_eq!(c.preprocess("Hi!  \t"), tokenize_13a("Hi!"));
    }
}
