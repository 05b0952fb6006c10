//! Paired bootstrap resampling over corpus metrics.
//!
//! Resample `i` of a plan draws its indices from ChaCha20 seeded with
//! `seed_from_u64(seed)` and switched to stream `i`, so every index set can
//! be regenerated independently of the others and of the platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EvaluationCorpus;
use crate::external_scores::{mean, SegmentScoreTable};
use crate::metrics::{BleuConfig, BleuStatistics, ChrfConfig, ChrfStatistics, MetricError};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum SignificanceError {
    #[error("resample plan needs a non-empty corpus")]
    EmptyCorpus,
    #[error("resample plan needs at least one resample")]
    NoResamples,
    #[error("plan covers {plan} segments but the corpus has {corpus}")]
    PlanMismatch { plan: usize, corpus: usize },
    #[error("unknown system {0:?}")]
    UnknownSystem(String),
    #[error("a significance matrix needs at least two systems")]
    TooFewSystems,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub seed: u64,
    pub corpus_size: usize,
    pub index_sets: Vec<Vec<usize>>,
}

impl ResamplePlan {
    pub fn n_resamples(&self) -> usize {
        self.index_sets.len()
    }
}

pub fn make_plan(seed: u64, n_resamples: usize, corpus_size: usize) -> Result<ResamplePlan, SignificanceError> {
    if corpus_size == 0 {
        return Err(SignificanceError::EmptyCorpus);
    }
    if n_resamples == 0 {
        return Err(SignificanceError::NoResamples);
    }
    let base = ChaCha20Rng::seed_from_u64(seed);
    let index_sets = (0..n_resamples)
        .map(|i| {
            let mut rng = base.clone();
            rng.set_stream(i as u64);
            (0..corpus_size).map(|_| rng.random_range(0..corpus_size)).collect()
        })
        .collect();
    Ok(ResamplePlan { seed, corpus_size, index_sets })
}

/// A system's corpus score, recomputable on any multiset of segments.
pub trait ResampleScorer: Send + Sync {
    fn segment_count(&self) -> usize;

    /// Score of the multiset given by `indices` (repeats count repeatedly).
    fn resampled_score(&self, indices: &[usize]) -> f64;

    fn full_score(&self) -> f64 {
        let all: Vec<usize> = (0..self.segment_count()).collect();
        self.resampled_score(&all)
    }
}

/// BLEU re-aggregated from segment statistics.
pub struct BleuScorer {
    pub config: BleuConfig,
    pub stats: Vec<BleuStatistics>,
}

impl ResampleScorer for BleuScorer {
    fn segment_count(&self) -> usize {
        self.stats.len()
    }

    fn resampled_score(&self, indices: &[usize]) -> f64 {
        let total = BleuStatistics::sum(indices.iter().map(|&i| &self.stats[i]));
        crate::metrics::compute_bleu(&total, self.config.smoothing, self.config.effective_order)
    }
}

/// chrF re-aggregated from segment statistics.
pub struct ChrfScorer {
    pub config: ChrfConfig,
    pub stats: Vec<ChrfStatistics>,
}

impl ResampleScorer for ChrfScorer {
    fn segment_count(&self) -> usize {
        self.stats.len()
    }

    fn resampled_score(&self, indices: &[usize]) -> f64 {
        let total = ChrfStatistics::sum(self.config.char_order, indices.iter().map(|&i| &self.stats[i]));
        self.config.f_score(&total)
    }
}

/// Mean of ingested segment scores, ×100.
pub struct MeanScorer {
    pub scores: Vec<f64>,
}

impl ResampleScorer for MeanScorer {
    fn segment_count(&self) -> usize {
        self.scores.len()
    }

    fn resampled_score(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.scores[i]).sum::<f64>() / indices.len() as f64 * 100.0
    }

    fn full_score(&self) -> f64 {
        mean(&self.scores) * 100.0
    }
}

/// Every system of a corpus prepared for resampling under one metric.
pub struct ScoredSystems {
    pub metric: String,
    pub signature: String,
    pub ids: Vec<String>,
    pub scorers: Vec<Box<dyn ResampleScorer>>,
}

impl ScoredSystems {
    pub fn bleu(corpus: &EvaluationCorpus, config: &BleuConfig) -> Result<Self, SignificanceError> {
        let refs = corpus.references_by_segment();
        let mut signature = String::new();
        let mut scorers: Vec<Box<dyn ResampleScorer>> = Vec::new();
        for s in corpus.systems() {
            let (stats, nrefs) = config.segment_statistics(&s.segments, &refs)?;
            signature = config.signature(nrefs).to_string();
            scorers.push(Box::new(BleuScorer { config: config.clone(), stats }));
        }
        Ok(Self::assemble("BLEU".into(), signature, corpus, scorers))
    }

    pub fn chrf(corpus: &EvaluationCorpus, config: &ChrfConfig) -> Result<Self, SignificanceError> {
        let refs = corpus.references_by_segment();
        let mut signature = String::new();
        let mut scorers: Vec<Box<dyn ResampleScorer>> = Vec::new();
        for s in corpus.systems() {
            let (stats, nrefs) = config.segment_statistics(&s.segments, &refs)?;
            signature = config.signature(nrefs).to_string();
            scorers.push(Box::new(ChrfScorer { config: config.clone(), stats }));
        }
        Ok(Self::assemble(config.name(), signature, corpus, scorers))
    }

    pub fn from_table(table: &SegmentScoreTable) -> Self {
        ScoredSystems {
            metric: table.model_id().to_string(),
            signature: format!("model:{}|agg:mean|scale:100", table.model_id()),
            ids: table.systems().to_vec(),
            scorers: (0..table.systems().len())
                .map(|i| Box::new(MeanScorer { scores: table.by_index(i).to_vec() }) as Box<dyn ResampleScorer>)
                .collect(),
        }
    }

    fn assemble(
        metric: String,
        signature: String,
        corpus: &EvaluationCorpus,
        scorers: Vec<Box<dyn ResampleScorer>>,
    ) -> Self {
        ScoredSystems {
            metric,
            signature,
            ids: corpus.systems().iter().map(|s| s.system_id.clone()).collect(),
            scorers,
        }
    }

    pub fn index(&self, id: &str) -> Result<usize, SignificanceError> {
        self.ids.iter().position(|s| s == id).ok_or_else(|| SignificanceError::UnknownSystem(id.to_string()))
    }

    fn check_plan(&self, plan: &ResamplePlan) -> Result<(), SignificanceError> {
        let corpus = self.scorers.first().map_or(0, |s| s.segment_count());
        if plan.corpus_size != corpus {
            return Err(SignificanceError::PlanMismatch { plan: plan.corpus_size, corpus });
        }
        Ok(())
    }

    fn resampled(&self, system: usize, plan: &ResamplePlan) -> Vec<f64> {
        let scorer = &self.scorers[system];
        plan.index_sets.par_iter().map(|idx| scorer.resampled_score(idx)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub system_a: String,
    pub system_b: String,
    /// `score(a) - score(b)` on the full corpus.
    pub delta: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Fraction of resamples in which the full-corpus winner fails to score
/// strictly higher. Without a winner (delta 0) the p-value is 1.
fn p_value(full_a: f64, full_b: f64, res_a: &[f64], res_b: &[f64]) -> f64 {
    let delta = full_a - full_b;
    if delta == 0.0 {
        return 1.0;
    }
    let failures = res_a.iter().zip(res_b).filter(|(a, b)| if delta > 0.0 { a <= b } else { b <= a }).count();
    failures as f64 / res_a.len() as f64
}

fn pair_result(
    systems: &ScoredSystems,
    a: usize,
    b: usize,
    full: &[f64],
    resampled: &[Vec<f64>],
    alpha: f64,
) -> PairResult {
    let p = p_value(full[a], full[b], &resampled[a], &resampled[b]);
    PairResult {
        system_a: systems.ids[a].clone(),
        system_b: systems.ids[b].clone(),
        delta: full[a] - full[b],
        p_value: p,
        significant: p < alpha,
    }
}

pub fn paired_bootstrap(
    systems: &ScoredSystems,
    system_a: &str,
    system_b: &str,
    plan: &ResamplePlan,
    alpha: f64,
) -> Result<PairResult, SignificanceError> {
    systems.check_plan(plan)?;
    let (a, b) = (systems.index(system_a)?, systems.index(system_b)?);
    let full: Vec<f64> = systems.scorers.iter().map(|s| s.full_score()).collect();
    let mut resampled = vec![Vec::new(); systems.ids.len()];
    resampled[a] = systems.resampled(a, plan);
    resampled[b] = systems.resampled(b, plan);
    Ok(pair_result(systems, a, b, &full, &resampled, alpha))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    pub metric: String,
    pub signature: String,
    pub seed: u64,
    pub n_resamples: usize,
    pub alpha: f64,
    /// Systems by descending full-corpus score, manifest order on ties.
    pub systems: Vec<String>,
    pub scores: Vec<f64>,
    /// Pairs `(i, j)` with `i < j` in row-major order over `systems`.
    pub pairs: Vec<PairResult>,
}

impl SignificanceMatrix {
    /// Result for `systems[i]` against `systems[j]`, `i < j`.
    pub fn pair(&self, i: usize, j: usize) -> &PairResult {
        assert!(i < j && j < self.systems.len());
        let n = self.systems.len();
        let offset = i * (2 * n - i - 1) / 2;
        &self.pairs[offset + (j - i - 1)]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }

    /// CSV with columns `a,b,delta,p,significant`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["a", "b", "delta", "p", "significant"]).expect("in-memory write");
        for p in &self.pairs {
            w.write_record([
                p.system_a.clone(),
                p.system_b.clone(),
                p.delta.to_string(),
                p.p_value.to_string(),
                p.significant.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Every pair of systems under one shared plan.
pub fn significance_matrix(
    systems: &ScoredSystems,
    plan: &ResamplePlan,
    alpha: f64,
) -> Result<SignificanceMatrix, SignificanceError> {
    if systems.ids.len() < 2 {
        return Err(SignificanceError::TooFewSystems);
    }
    systems.check_plan(plan)?;
    let full: Vec<f64> = systems.scorers.par_iter().map(|s| s.full_score()).collect();
    let resampled: Vec<Vec<f64>> = (0..systems.ids.len()).into_par_iter().map(|s| systems.resampled(s, plan)).collect();
    let mut order: Vec<usize> = (0..systems.ids.len()).collect();
    order.sort_by(|&a, &b| full[b].total_cmp(&full[a]));
    let mut pairs = Vec::new();
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            pairs.push(pair_result(systems, a, b, &full, &resampled, alpha));
        }
    }
    Ok(SignificanceMatrix {
        metric: systems.metric.clone(),
        signature: systems.signature.clone(),
        seed: plan.seed,
        n_resamples: plan.n_resamples(),
        alpha,
        systems: order.iter().map(|&i| systems.ids[i].clone()).collect(),
        scores: order.iter().map(|&i| full[i]).collect(),
        pairs,
    })
}
