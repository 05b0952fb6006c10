//! Segment scores and pairwise utilities computed by external learned
//! metrics, read from TSV files.
//!
//! Segment scores: `system_id<TAB>segment_index<TAB>score`.
//! Pairwise utilities: `segment_index<TAB>candidate<TAB>pseudo_reference<TAB>utility`.
//! Lines starting with `#` and blank lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::EvaluationCorpus;
use crate::metrics::MetricScore;

/// How many absent keys an incomplete-table error spells out.
const MISSING_SHOWN: usize = 10;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("could not read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} tab-separated fields, found {found}")]
    Malformed { line: usize, expected: usize, found: usize },
    #[error("line {line}: {value:?} is not a finite number")]
    NonNumeric { line: usize, value: String },
    #[error("line {line}: bad segment index {value:?}")]
    BadIndex { line: usize, value: String },
    #[error("line {line}: segment {segment} is out of range for a {size}-segment corpus")]
    SegmentOutOfRange { line: usize, segment: usize, size: usize },
    #[error("line {line}: unknown system {system:?}")]
    UnknownSystem { line: usize, system: String },
    #[error("line {line}: duplicate entry for {key}")]
    Duplicate { line: usize, key: String },
    #[error("{count} entries missing, e.g. {shown}")]
    Missing { count: usize, shown: String, keys: Vec<String> },
    #[error("no scores for system {0:?}")]
    SystemNotInTable(String),
    #[error("score table shape does not match the corpus")]
    Shape,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.strip_suffix('\r').unwrap_or(l);
        if l.trim().is_empty() || l.starts_with('#') {
            None
        } else {
            Some((i + 1, l.split('\t').collect()))
        }
    })
}

fn read(path: &Path) -> Result<String, ScoreError> {
    fs::read_to_string(path).map_err(|source| ScoreError::Io { path: path.to_path_buf(), source })
}

fn parse_score(line: usize, value: &str) -> Result<f64, ScoreError> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ScoreError::NonNumeric { line, value: value.to_string() })
}

fn parse_index(line: usize, value: &str, size: usize) -> Result<usize, ScoreError> {
    let segment: usize = value.trim().parse().map_err(|_| ScoreError::BadIndex { line, value: value.to_string() })?;
    if segment >= size {
        return Err(ScoreError::SegmentOutOfRange { line, segment, size });
    }
    Ok(segment)
}

fn system_index(line: usize, systems: &[String], id: &str) -> Result<usize, ScoreError> {
    systems.iter().position(|s| s == id).ok_or_else(|| ScoreError::UnknownSystem { line, system: id.to_string() })
}

fn missing(keys: Vec<String>) -> Result<(), ScoreError> {
    if keys.is_empty() {
        return Ok(());
    }
    let mut shown = keys.iter().take(MISSING_SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if keys.len() > MISSING_SHOWN {
        shown.push_str(", ...");
    }
    Err(ScoreError::Missing { count: keys.len(), shown, keys })
}

/// Complete segment scores of every corpus system for one model.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentScoreTable {
    model_id: String,
    systems: Vec<String>,
    /// `scores[system][segment]`
    scores: Vec<Vec<f64>>,
    /// Score text as read, for byte-faithful re-serialization.
    raw: Vec<Vec<String>>,
}

impl SegmentScoreTable {
    /// Builds a table from in-memory values, one row per system.
    pub fn from_scores(
        model_id: impl Into<String>,
        systems: Vec<String>,
        scores: Vec<Vec<f64>>,
    ) -> Result<Self, ScoreError> {
        let size = scores.first().map_or(0, Vec::len);
        if systems.len() != scores.len() || scores.iter().any(|r| r.len() != size) {
            return Err(ScoreError::Shape);
        }
        let raw = scores.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        Ok(SegmentScoreTable { model_id: model_id.into(), systems, scores, raw })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn segment_count(&self) -> usize {
        self.scores.first().map_or(0, Vec::len)
    }

    pub fn system_scores(&self, system_id: &str) -> Result<&[f64], ScoreError> {
        self.systems
            .iter()
            .position(|s| s == system_id)
            .map(|i| self.scores[i].as_slice())
            .ok_or_else(|| ScoreError::SystemNotInTable(system_id.to_string()))
    }

    pub fn by_index(&self, system: usize) -> &[f64] {
        &self.scores[system]
    }

    pub fn len(&self) -> usize {
        self.scores.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Canonical TSV: rows sorted by system id, then segment index.
    pub fn to_tsv(&self) -> String {
        let mut order: Vec<usize> = (0..self.systems.len()).collect();
        order.sort_by(|&a, &b| self.systems[a].cmp(&self.systems[b]));
        let mut out = String::new();
        for s in order {
            for (seg, raw) in self.raw[s].iter().enumerate() {
                let _ = writeln!(out, "{}\t{}\t{}", self.systems[s], seg, raw);
            }
        }
        out
    }
}

pub fn parse_segment_scores(
    text: &str,
    model_id: &str,
    corpus: &EvaluationCorpus,
) -> Result<SegmentScoreTable, ScoreError> {
    let systems: Vec<String> = corpus.systems().iter().map(|s| s.system_id.clone()).collect();
    let size = corpus.segment_count();
    let mut cells: Vec<Vec<Option<(f64, String)>>> = vec![vec![None; size]; systems.len()];
    for (line, fields) in data_lines(text) {
        let [sys, seg, score] = fields[..] else {
            return Err(ScoreError::Malformed { line, expected: 3, found: fields.len() });
        };
        let s = system_index(line, &systems, sys)?;
        let seg = parse_index(line, seg, size)?;
        let value = parse_score(line, score)?;
        let cell = &mut cells[s][seg];
        if cell.is_some() {
            return Err(ScoreError::Duplicate { line, key: format!("({sys}, {seg})") });
        }
        *cell = Some((value, score.to_string()));
    }
    let mut absent = Vec::new();
    for (s, row) in cells.iter().enumerate() {
        for (seg, c) in row.iter().enumerate() {
            if c.is_none() {
                absent.push(format!("({}, {})", systems[s], seg));
            }
        }
    }
    missing(absent)?;
    let (scores, raw) = cells.into_iter().map(|row| row.into_iter().map(Option::unwrap).unzip()).unzip();
    Ok(SegmentScoreTable { model_id: model_id.to_string(), systems, scores, raw })
}

/// Loads a segment score file. The model id defaults to the file stem.
pub fn load_segment_scores(
    path: &Path,
    model_id: Option<&str>,
    corpus: &EvaluationCorpus,
) -> Result<SegmentScoreTable, ScoreError> {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_segment_scores(&read(path)?, model_id.unwrap_or(&stem), corpus)
}

/// Mean segment score ×100, as learned-metric scores are displayed.
pub fn corpus_average(table: &SegmentScoreTable, system_id: &str) -> Result<MetricScore, ScoreError> {
    let scores = table.system_scores(system_id)?;
    Ok(MetricScore {
        metric: table.model_id.clone(),
        value: mean(scores) * 100.0,
        per_segment: Some(scores.iter().map(|v| v * 100.0).collect()),
        signature: format!("model:{}|agg:mean|scale:100", table.model_id),
    })
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Utilities `U(candidate, pseudo_reference)` for every segment and every
/// ordered pair of distinct systems. Diagonal entries are optional.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseUtilityTable {
    systems: Vec<String>,
    segments: usize,
    values: Vec<Option<f64>>,
}

impl PairwiseUtilityTable {
    /// Builds a table by evaluating `f(segment, candidate, pseudo_reference)`
    /// for every off-diagonal triple.
    pub fn from_fn(systems: Vec<String>, segments: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let k = systems.len();
        let mut values = vec![None; segments * k * k];
        for seg in 0..segments {
            for c in 0..k {
                for r in 0..k {
                    if c != r {
                        values[(seg * k + c) * k + r] = Some(f(seg, c, r));
                    }
                }
            }
        }
        PairwiseUtilityTable { systems, segments, values }
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn segment_count(&self) -> usize {
        self.segments
    }

    /// Utility of candidate `c` against pseudo-reference `r` (system indices).
    /// Returns `None` only for an absent diagonal entry.
    pub fn get(&self, segment: usize, c: usize, r: usize) -> Option<f64> {
        let k = self.systems.len();
        self.values[(segment * k + c) * k + r]
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn parse_pairwise_utilities(text: &str, corpus: &EvaluationCorpus) -> Result<PairwiseUtilityTable, ScoreError> {
    let systems: Vec<String> = corpus.systems().iter().map(|s| s.system_id.clone()).collect();
    let size = corpus.segment_count();
    let k = systems.len();
    let mut values = vec![None; size * k * k];
    for (line, fields) in data_lines(text) {
        let [seg, cand, pseudo, utility] = fields[..] else {
            return Err(ScoreError::Malformed { line, expected: 4, found: fields.len() });
        };
        let seg = parse_index(line, seg, size)?;
        let c = system_index(line, &systems, cand)?;
        let r = system_index(line, &systems, pseudo)?;
        let value = parse_score(line, utility)?;
        let cell = &mut values[(seg * k + c) * k + r];
        if cell.is_some() {
            return Err(ScoreError::Duplicate { line, key: format!("({seg}, {cand}, {pseudo})") });
        }
        *cell = Some(value);
    }
    let mut absent = Vec::new();
    for seg in 0..size {
        for c in 0..k {
            for r in 0..k {
                if c != r && values[(seg * k + c) * k + r].is_none() {
                    absent.push(format!("({seg}, {}, {})", systems[c], systems[r]));
                }
            }
        }
    }
    missing(absent)?;
    Ok(PairwiseUtilityTable { systems, segments: size, values })
}

pub fn load_pairwise_utilities(path: &Path, corpus: &EvaluationCorpus) -> Result<PairwiseUtilityTable, ScoreError> {
    parse_pairwise_utilities(&read(path)?, corpus)
}
