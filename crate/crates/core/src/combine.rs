//! System combination over pooled candidates: MBR selection and oracle
//! selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EvaluationCorpus;
use crate::external_scores::{mean, PairwiseUtilityTable, SegmentScoreTable};
use crate::metrics::{BleuConfig, ChrfConfig, MetricError};

#[derive(Debug, Error)]
pub enum CombineError {
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("segment {segment} has {found} candidates, expected {expected}")]
    RaggedPool { segment: usize, expected: usize, found: usize },
    #[error("score table does not cover the pool: {0}")]
    Coverage(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Candidates for every segment, one per system, in system order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidatePool {
    systems: Vec<String>,
    segments: Vec<Vec<String>>,
}

impl CandidatePool {
    pub fn new(systems: Vec<String>, segments: Vec<Vec<String>>) -> Result<Self, CombineError> {
        if systems.is_empty() || segments.is_empty() {
            return Err(CombineError::EmptyPool);
        }
        for (segment, c) in segments.iter().enumerate() {
            if c.len() != systems.len() {
                return Err(CombineError::RaggedPool { segment, expected: systems.len(), found: c.len() });
            }
        }
        Ok(CandidatePool { systems, segments })
    }

    pub fn from_corpus(corpus: &EvaluationCorpus) -> Result<Self, CombineError> {
        let systems = corpus.systems().iter().map(|s| s.system_id.clone()).collect();
        let segments = (0..corpus.segment_count())
            .map(|i| corpus.systems().iter().map(|s| s.segments[i].clone()).collect())
            .collect();
        Self::new(systems, segments)
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn candidates(&self, segment: usize) -> &[String] {
        &self.segments[segment]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mbr,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub system_index: usize,
    pub system_id: String,
    pub text: String,
    /// Average utility (MBR) or candidate score (oracle) of the winner.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationOutput {
    pub method: Method,
    pub utility_id: String,
    pub selected: Vec<Selection>,
}

impl CombinationOutput {
    pub fn lines(&self) -> Vec<String> {
        self.selected.iter().map(|s| s.text.clone()).collect()
    }

    /// Per-segment provenance: winning system and its utility or score.
    pub fn provenance_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "method": self.method,
            "utility": self.utility_id,
            "segments": self.selected.iter().enumerate().map(|(i, s)| serde_json::json!({
                "segment": i,
                "system": s.system_id,
                "value": s.value,
            })).collect::<Vec<_>>(),
        }))
        .expect("provenance serializes")
    }
}

/// Utility `U(candidate, pseudo_reference)` for MBR.
pub enum Utility<'a> {
    /// Segment chrF of the candidate against the pseudo-reference.
    Chrf(ChrfConfig),
    Table(&'a PairwiseUtilityTable),
}

impl Utility<'_> {
    pub fn id(&self) -> String {
        match self {
            Utility::Chrf(c) => c.name(),
            Utility::Table(_) => "external".to_string(),
        }
    }
}

/// Index of the first maximum.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Expected utility of each candidate against all other candidates.
/// A lone candidate gets utility 0.
///
/// Utilities are summed in ascending order, so candidates with the same
/// multiset of utilities (duplicates in particular) tie exactly and the
/// first one wins.
pub fn expected_utilities(k: usize, mut u: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    if k == 1 {
        return vec![0.0];
    }
    (0..k)
        .map(|c| {
            let mut values: Vec<f64> = (0..k).filter(|&r| r != c).map(|r| u(c, r)).collect();
            values.sort_by(f64::total_cmp);
            values.iter().fold(0.0, |acc, v| acc + v) / (k - 1) as f64
        })
        .collect()
}

fn assemble(pool: &CandidatePool, method: Method, utility_id: String, picks: Vec<(usize, f64)>) -> CombinationOutput {
    CombinationOutput {
        method,
        utility_id,
        selected: picks
            .into_iter()
            .enumerate()
            .map(|(seg, (c, value))| Selection {
                system_index: c,
                system_id: pool.systems[c].clone(),
                text: pool.segments[seg][c].clone(),
                value,
            })
            .collect(),
    }
}

/// MBR with an arbitrary utility `u(segment, candidate, pseudo_reference)`.
pub fn mbr_select_with<F>(pool: &CandidatePool, utility_id: &str, u: F) -> CombinationOutput
where
    F: Fn(usize, usize, usize) -> f64 + Sync,
{
    let k = pool.systems.len();
    let picks = (0..pool.segment_count())
        .into_par_iter()
        .map(|seg| {
            let eu = expected_utilities(k, |c, r| u(seg, c, r));
            let best = argmax(&eu);
            (best, eu[best])
        })
        .collect();
    assemble(pool, Method::Mbr, utility_id.to_string(), picks)
}

pub fn mbr_select(pool: &CandidatePool, utility: &Utility) -> Result<CombinationOutput, CombineError> {
    let id = utility.id();
    match utility {
        Utility::Chrf(config) => {
            if config.char_order == 0 {
                return Err(MetricError::InvalidParameter("character order must be at least 1".into()).into());
            }
            Ok(mbr_select_with(pool, &id, |seg, c, r| {
                let cands = &pool.segments[seg];
                config.f_score(&config.best_statistics(&cands[c], &[&cands[r]]))
            }))
        }
        Utility::Table(table) => {
            if table.systems() != pool.systems() || table.segment_count() != pool.segment_count() {
                return Err(CombineError::Coverage("utility table systems or segments differ from the pool".into()));
            }
            Ok(mbr_select_with(pool, &id, |seg, c, r| {
                table.get(seg, c, r).expect("off-diagonal utilities are complete")
            }))
        }
    }
}

/// Reference-based score of each candidate, used by oracle selection.
pub enum CandidateScores<'a> {
    /// Segment chrF against the corpus references.
    Chrf {
        config: ChrfConfig,
        references: &'a [Vec<&'a str>],
    },
    Table(&'a SegmentScoreTable),
}

/// Oracle with an arbitrary score `s(segment, candidate)`.
pub fn oracle_select_with<F>(pool: &CandidatePool, score_id: &str, s: F) -> CombinationOutput
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let k = pool.systems.len();
    let picks = (0..pool.segment_count())
        .into_par_iter()
        .map(|seg| {
            let scores: Vec<f64> = (0..k).map(|c| s(seg, c)).collect();
            let best = argmax(&scores);
            (best, scores[best])
        })
        .collect();
    assemble(pool, Method::Oracle, score_id.to_string(), picks)
}

pub fn oracle_select(pool: &CandidatePool, scores: &CandidateScores) -> Result<CombinationOutput, CombineError> {
    match scores {
        CandidateScores::Chrf { config, references } => {
            if references.len() != pool.segment_count() {
                return Err(CombineError::Coverage(format!(
                    "{} reference segments for {} pool segments",
                    references.len(),
                    pool.segment_count()
                )));
            }
            let refs: Vec<Vec<&str>> =
                references.iter().map(|r| r.iter().copied().filter(|x| !x.is_empty()).collect()).collect();
            if let Some(segment) = refs.iter().position(Vec::is_empty) {
                return Err(MetricError::NoReference { segment }.into());
            }
            Ok(oracle_select_with(pool, &config.name(), |seg, c| {
                config.f_score(&config.best_statistics(&pool.segments[seg][c], &refs[seg]))
            }))
        }
        CandidateScores::Table(table) => {
            let rows = pool
                .systems
                .iter()
                .map(|s| table.system_scores(s).map_err(|e| CombineError::Coverage(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            if rows.iter().any(|r| r.len() != pool.segment_count()) {
                return Err(CombineError::Coverage("score table segment count differs from the pool".into()));
            }
            Ok(oracle_select_with(pool, table.model_id(), |seg, c| rows[c][seg]))
        }
    }
}

/// Header used for the learned-metric column when no score table is given.
pub const LEARNED_COLUMN: &str = "COMET";

/// One row of a combination table; `None` where a metric is unavailable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationRow {
    pub label: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationTable {
    /// Column names: learned metric, chrF, BLEU.
    pub metrics: Vec<String>,
    pub rows: Vec<CombinationRow>,
}

fn label(method: Method) -> &'static str {
    match method {
        Method::Mbr => "MBR",
        Method::Oracle => "Oracle",
    }
}

/// Scores each combination next to the best single system per metric.
///
/// The learned-metric score of a combined output is the mean of the
/// selected candidates' own segment scores.
pub fn evaluate_combination(
    corpus: &EvaluationCorpus,
    outputs: &[&CombinationOutput],
    learned: Option<&SegmentScoreTable>,
    chrf: &ChrfConfig,
    bleu: &BleuConfig,
) -> Result<CombinationTable, CombineError> {
    let refs = corpus.references_by_segment();
    // The learned column is always present so renderers can note its absence.
    let mut metrics = vec![learned.map_or(LEARNED_COLUMN.to_string(), |t| t.model_id().to_string())];
    metrics.push("chrF".to_string());
    metrics.push("BLEU".to_string());

    let learned_rows = learned
        .map(|t| {
            corpus
                .systems()
                .iter()
                .map(|s| t.system_scores(&s.system_id).map(<[f64]>::to_vec))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CombineError::Coverage(e.to_string()))
        })
        .transpose()?;

    let score_text = |lines: &[String]| -> Result<(f64, f64), CombineError> {
        Ok((chrf.corpus_score(lines, &refs)?.value, bleu.corpus_score(lines, &refs)?.value))
    };

    let mut baseline: Vec<Option<f64>> = vec![None; metrics.len()];
    for (k, s) in corpus.systems().iter().enumerate() {
        let (c, b) = score_text(&s.segments)?;
        let learned_value = learned_rows.as_ref().map(|rows| mean(&rows[k]) * 100.0);
        for (slot, v) in baseline.iter_mut().zip([learned_value, Some(c), Some(b)]) {
            if let Some(v) = v {
                *slot = Some(slot.map_or(v, |cur: f64| cur.max(v)));
            }
        }
    }

    let mut rows = vec![CombinationRow { label: "Baseline".to_string(), values: baseline }];
    for out in outputs {
        let (c, b) = score_text(&out.lines())?;
        let mut values = vec![None];
        if let Some(rows) = &learned_rows {
            let picked: Vec<f64> = out.selected.iter().enumerate().map(|(seg, s)| rows[s.system_index][seg]).collect();
            values[0] = Some(mean(&picked) * 100.0);
        }
        values.push(Some(c));
        values.push(Some(b));
        rows.push(CombinationRow { label: label(out.method).to_string(), values });
    }
    Ok(CombinationTable { metrics, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(segments: &[&[&str]]) -> CandidatePool {
        let k = segments[0].len();
        CandidatePool::new(
            (0..k).map(|i| format!("S{i}")).collect(),
            segments.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_candidate() {
        let p = pool(&[&["only"]]);
        let out = mbr_select(&p, &Utility::Chrf(ChrfConfig::default())).unwrap();
        assert_eq!(out.selected[0].text, "only");
        assert_eq!(out.selected[0].value, 0.0);
    }

    #[test]
    fn identical_candidates_pick_first() {
        let p = pool(&[&["same", "same", "same"]]);
        let out = mbr_select(&p, &Utility::Chrf(ChrfConfig::default())).unwrap();
        assert_eq!(out.selected[0].system_index, 0);
    }

    #[test]
    fn duplicate_pair_wins() {
        let p = pool(&[&["x", "a b", "a b"]]);
        let out = mbr_select(&p, &Utility::Chrf(ChrfConfig::default())).unwrap();
        assert_eq!(out.selected[0].system_index, 1);
        assert_eq!(out.selected[0].value, 50.0);
    }

    #[test]
    fn oracle_by_table() {
        let p = pool(&[&["a", "b"], &["c", "d"]]);
        let t =
            SegmentScoreTable::from_scores("m", vec!["S0".into(), "S1".into()], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
                .unwrap();
        let out = oracle_select(&p, &CandidateScores::Table(&t)).unwrap();
        let picks: Vec<_> = out.selected.iter().map(|s| s.system_id.as_str()).collect();
        assert_eq!(picks, ["S0", "S1"]);
        let mean_sel = out.selected.iter().map(|s| s.value).sum::<f64>() / 2.0;
        assert!((mean_sel - 0.85).abs() < 1e-12);
    }

    #[test]
    fn oracle_ties_pick_first() {
        let p = pool(&[&["a", "b", "c"]]);
        let out = oracle_select_with(&p, "flat", |_, _| 1.0);
        assert_eq!(out.selected[0].system_index, 0);
    }

    #[test]
    fn ragged_pool_rejected() {
        assert!(CandidatePool::new(vec!["a".into(), "b".into()], vec![vec!["x".into()]]).is_err());
        assert!(CandidatePool::new(vec![], vec![]).is_err());
    }
}
