use std::ops::AddAssign;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::signature::{MetricConfig, RefCount, Signature};
use super::{clipped_matches, runs, usable_references, MetricError, MetricScore};
use crate::tokenize::is_py_whitespace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub char_order: usize,
    pub beta: u32,
    pub remove_whitespace: bool,
    /// Average only over orders that both sides can produce. When false,
    /// every order contributes an epsilon-smoothed F score instead.
    pub effective_order: bool,
    pub lowercase: bool,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig { char_order: 6, beta: 2, remove_whitespace: true, effective_order: true, lowercase: false }
    }
}

/// Per-order `[hypothesis, reference, match]` character n-gram counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChrfStatistics {
    pub orders: Vec<[u64; 3]>,
}

impl ChrfStatistics {
    pub fn zeros(order: usize) -> Self {
        ChrfStatistics { orders: vec![[0; 3]; order] }
    }

    pub fn sum<'a>(order: usize, stats: impl IntoIterator<Item = &'a ChrfStatistics>) -> Self {
        let mut acc = ChrfStatistics::zeros(order);
        for s in stats {
            acc += s;
        }
        acc
    }
}

impl AddAssign<&ChrfStatistics> for ChrfStatistics {
    fn add_assign(&mut self, o: &ChrfStatistics) {
        for (a, b) in self.orders.iter_mut().zip(&o.orders) {
            for k in 0..3 {
                a[k] += b[k];
            }
        }
    }
}

impl ChrfConfig {
    pub fn name(&self) -> String {
        format!("chrF{}", self.beta)
    }

    pub fn signature(&self, nrefs: RefCount) -> Signature {
        Signature::new(nrefs, MetricConfig::Chrf(self.clone()))
    }

    fn chars(&self, text: &str) -> Vec<char> {
        let keep = |c: &char| !self.remove_whitespace || !is_py_whitespace(*c);
        if self.lowercase {
            text.to_lowercase().chars().filter(keep).collect()
        } else {
            text.chars().filter(keep).collect()
        }
    }

    /// F score in [0, 100] from (possibly aggregated) statistics.
    pub fn f_score(&self, stats: &ChrfStatistics) -> f64 {
        const EPS: f64 = 1e-16;
        let factor = (self.beta * self.beta) as f64;
        let mut eps_score = 0.0;
        let (mut avg_prec, mut avg_rec) = (0.0, 0.0);
        let mut effective = 0usize;
        for &[n_hyp, n_ref, n_match] in &stats.orders {
            let prec = if n_hyp > 0 { n_match as f64 / n_hyp as f64 } else { EPS };
            let rec = if n_ref > 0 { n_match as f64 / n_ref as f64 } else { EPS };
            let denom = factor * prec + rec;
            eps_score += if denom > 0.0 { (1.0 + factor) * prec * rec / denom } else { EPS };
            if n_hyp > 0 && n_ref > 0 {
                avg_prec += prec;
                avg_rec += rec;
                effective += 1;
            }
        }
        if !self.effective_order {
            return 100.0 * eps_score / self.char_order as f64;
        }
        if effective == 0 {
            avg_prec = 0.0;
            avg_rec = 0.0;
        } else {
            avg_prec /= effective as f64;
            avg_rec /= effective as f64;
        }
        if avg_prec + avg_rec != 0.0 {
            let score = (1.0 + factor) * avg_prec * avg_rec;
            100.0 * (score / (factor * avg_prec + avg_rec))
        } else {
            0.0
        }
    }

    /// Statistics against the reference giving the highest segment F score.
    /// The first reference wins ties.
    pub fn best_statistics<R: AsRef<str>>(&self, hyp: &str, refs: &[R]) -> ChrfStatistics {
        let hyp_chars = self.chars(hyp);
        let hyp_runs: Vec<_> = (1..=self.char_order).map(|n| runs(hyp_chars.windows(n).collect())).collect();
        let mut best = ChrfStatistics::zeros(self.char_order);
        let mut best_f = -1.0;
        for r in refs {
            let ref_chars = self.chars(r.as_ref());
            let mut stats = ChrfStatistics::zeros(self.char_order);
            for (n, (h, slot)) in hyp_runs.iter().zip(stats.orders.iter_mut()).enumerate() {
                let rr = runs(ref_chars.windows(n + 1).collect());
                let n_hyp: u64 = h.iter().map(|x| x.1).sum();
                let n_ref: u64 = rr.iter().map(|x| x.1).sum();
                let n_hyp = if rr.is_empty() { 0 } else { n_hyp };
                *slot = [n_hyp, n_ref, clipped_matches(h, &rr)];
            }
            let f = self.f_score(&stats);
            if f > best_f {
                best_f = f;
                best = stats;
            }
        }
        best
    }

    pub fn segment_statistics<H, R>(
        &self,
        hyps: &[H],
        refs: &[Vec<R>],
    ) -> Result<(Vec<ChrfStatistics>, RefCount), MetricError>
    where
        H: AsRef<str> + Sync,
        R: AsRef<str> + Sync,
    {
        self.validate()?;
        let (refs, nrefs) = usable_references(refs, hyps.len())?;
        let stats = hyps.par_iter().zip(refs.par_iter()).map(|(h, rs)| self.best_statistics(h.as_ref(), rs)).collect();
        Ok((stats, nrefs))
    }

    pub fn corpus_score<H, R>(&self, hyps: &[H], refs: &[Vec<R>]) -> Result<MetricScore, MetricError>
    where
        H: AsRef<str> + Sync,
        R: AsRef<str> + Sync,
    {
        let (stats, nrefs) = self.segment_statistics(hyps, refs)?;
        Ok(self.score_from_statistics(&stats, nrefs))
    }

    pub fn score_from_statistics(&self, stats: &[ChrfStatistics], nrefs: RefCount) -> MetricScore {
        let total = ChrfStatistics::sum(self.char_order, stats);
        MetricScore {
            metric: self.name(),
            value: self.f_score(&total),
            per_segment: Some(stats.iter().map(|s| self.f_score(s)).collect()),
            signature: self.signature(nrefs).to_string(),
        }
    }

    fn validate(&self) -> Result<(), MetricError> {
        if self.char_order == 0 {
            return Err(MetricError::InvalidParameter("character order must be at least 1".into()));
        }
        Ok(())
    }
}

/// Statistics of one hypothesis, best reference selected per segment.
pub fn chrf_statistics<R: AsRef<str>>(hyp: &str, refs: &[R], config: &ChrfConfig) -> ChrfStatistics {
    config.best_statistics(hyp, refs)
}

/// Corpus chrF: `refs[i]` lists the references of segment `i`.
pub fn chrf_corpus<H, R>(hyps: &[H], refs: &[Vec<R>], config: &ChrfConfig) -> Result<MetricScore, MetricError>
where
    H: AsRef<str> + Sync,
    R: AsRef<str> + Sync,
{
    config.corpus_score(hyps, refs)
}

/// Segment chrF against the best of `refs`.
pub fn chrf_segment<R: AsRef<str>>(hyp: &str, refs: &[R], config: &ChrfConfig) -> Result<f64, MetricError> {
    config.validate()?;
    let refs: Vec<&str> = refs.iter().map(AsRef::as_ref).filter(|r| !r.is_empty()).collect();
    if refs.is_empty() {
        return Err(MetricError::NoReference { segment: 0 });
    }
    Ok(config.f_score(&config.best_statistics(hyp, &refs)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nc(n: usize) -> ChrfConfig {
        ChrfConfig { char_order: n, ..ChrfConfig::default() }
    }

    #[test]
    fn cat_cats() {
        let f = chrf_segment("cat", &["cats"], &nc(2)).unwrap();
        let r = (3.0 / 4.0 + 2.0 / 3.0) / 2.0;
        assert!((f - 100.0 * 5.0 * r / (4.0 + r)).abs() < 1e-9);
        assert!((f - 75.22).abs() < 0.01);
        let c = chrf_corpus(&["cat"], &[vec!["cats"]], &nc(2)).unwrap();
        assert_eq!(c.value, f);
    }

    #[test]
    fn identity_and_disjoint() {
        let c = ChrfConfig::default();
        assert_eq!(chrf_segment("hello there", &["hello there"], &c).unwrap(), 100.0);
        assert_eq!(chrf_segment("ab", &["cd"], &c).unwrap(), 0.0);
    }

    #[test]
    fn whitespace_is_removed() {
        let c = ChrfConfig::default();
        assert_eq!(chrf_segment("a b c", &["abc"], &c).unwrap(), 100.0);
    }

    #[test]
    fn best_reference_per_segment() {
        let c = ChrfConfig::default();
        let one = chrf_segment("the cat", &["a dog"], &c).unwrap();
        let two = chrf_segment("the cat", &["a dog", "the cat"], &c).unwrap();
        assert!(one < two);
        assert_eq!(two, 100.0);
    }

    #[test]
    fn hyp_count_zeroed_when_reference_too_short() {
        let st = chrf_statistics("abcd", &["ab"], &nc(3));
        assert_eq!(st.orders[2], [0, 0, 0]);
        assert_eq!(st.orders[0], [4, 2, 2]);
    }

    #[test]
    fn signature_and_name() {
        let s = chrf_corpus(&["x"], &[vec!["x"]], &ChrfConfig::default()).unwrap();
        assert_eq!(s.metric, "chrF2");
        assert!(s.signature.starts_with("nrefs:1|case:mixed|eff:yes|nc:6|nw:0|space:no|version:"));
    }
}
