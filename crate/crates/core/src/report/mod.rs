//! Rendering of ranking, significance, combination, model comparison and
//! sentence matching tables as Markdown, LaTeX, CSV or JSON.
//!
//! Scores are printed with one decimal in Markdown and LaTeX; CSV and JSON
//! keep full precision.

mod number;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use number::{format_score, latex_escape, md_escape};

use crate::combine::CombinationTable;
use crate::diagnostics::SelfMismatchStats;
use crate::external_scores::{corpus_average, SegmentScoreTable};
use crate::normalize::ScorePair;
use crate::significance::SignificanceMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Md,
    Tex,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(Format::Md),
            "tex" | "latex" => Ok(Format::Tex),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected md, tex, csv or json)")),
        }
    }
}

/// Gray used for unranked systems in LaTeX ranking tables.
const ASHGREY: &str = "\\definecolor{ashgrey}{rgb}{0.7, 0.75, 0.71}";

/// P-value edges; the shade level is the number of edges above `p`.
pub const SHADE_EDGES: [f64; 7] = [0.5, 0.25, 0.1, 0.05, 0.01, 0.005, 0.001];

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn md_table(header: &[String], rows: &[Vec<String>]) -> String {
    let line =
        |cells: &[String]| format!("| {} |\n", cells.iter().map(|c| md_escape(c)).collect::<Vec<_>>().join(" | "));
    let mut out = line(header);
    out += &format!("|{}\n", "---|".repeat(header.len()));
    for r in rows {
        out += &line(r);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredSystem {
    pub system_id: String,
    pub score: f64,
    pub constrained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub system_id: String,
    /// Only constrained systems are ranked.
    pub rank: Option<usize>,
    pub score: f64,
    pub constrained: bool,
}

/// Sorts by descending score (input order on ties) and ranks constrained
/// systems 1, 2, ... in that order.
pub fn rank_systems(systems: &[ScoredSystem]) -> Vec<RankingRow> {
    let mut order: Vec<&ScoredSystem> = systems.iter().collect();
    order.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut next = 0;
    order
        .into_iter()
        .map(|s| RankingRow {
            system_id: s.system_id.clone(),
            rank: s.constrained.then(|| {
                next += 1;
                next
            }),
            score: s.score,
            constrained: s.constrained,
        })
        .collect()
}

#[derive(Serialize)]
struct RankingDoc<'a> {
    metric: &'a str,
    signature: &'a str,
    rows: Vec<RankingRow>,
}

pub fn render_ranking(metric: &str, signature: &str, systems: &[ScoredSystem], format: Format) -> String {
    let rows = rank_systems(systems);
    let rank_text = |r: &RankingRow| r.rank.map_or("n/a".to_string(), |k| k.to_string());
    match format {
        Format::Md => {
            let body: Vec<Vec<String>> =
                rows.iter().map(|r| vec![r.system_id.clone(), rank_text(r), format_score(r.score)]).collect();
            let header = ["System".to_string(), "Rank".to_string(), metric.to_string()];
            format!("{}\n{metric}: {signature}\n", md_table(&header, &body))
        }
        Format::Tex => {
            let mut out = format!("\\begin{{table}} {ASHGREY}\n\\scriptsize\n\\begin{{tabular}}{{rcc}}\n\\toprule\n");
            let _ = writeln!(out, "System & Rank & {} \\\\\n\\midrule", latex_escape(metric));
            for r in &rows {
                let cells = [latex_escape(&r.system_id), rank_text(r), format_score(r.score)];
                let cells: Vec<String> = if r.rank.is_some() {
                    cells.to_vec()
                } else {
                    cells.iter().map(|c| format!("\\color{{ashgrey}}{c}")).collect()
                };
                let _ = writeln!(out, "{} \\\\", cells.join(" & "));
            }
            let _ = writeln!(
                out,
                "\\bottomrule\n\\end{{tabular}}\n\\caption{{{} ({})}}\n\\end{{table}}",
                latex_escape(metric),
                latex_escape(signature)
            );
            out
        }
        Format::Csv => {
            let mut table = vec![vec!["system".into(), "rank".into(), "score".into(), "constrained".into()]];
            for r in &rows {
                table.push(vec![r.system_id.clone(), rank_text(r), r.score.to_string(), r.constrained.to_string()]);
            }
            csv_string(table)
        }
        Format::Json => json_string(&RankingDoc { metric, signature, rows }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadedCell {
    pub delta: f64,
    pub p_value: f64,
    pub shade_level: u8,
    pub underlined: bool,
}

pub fn shade_level(p: f64) -> u8 {
    SHADE_EDGES.iter().filter(|&&e| p < e).count() as u8
}

impl ShadedCell {
    pub fn new(delta: f64, p_value: f64, alpha: f64) -> Self {
        ShadedCell { delta, p_value, shade_level: shade_level(p_value), underlined: p_value < alpha }
    }

    fn tex(&self) -> String {
        let v = format_score(self.delta);
        let v = if self.underlined { format!("\\underline{{{v}}}") } else { v };
        format!("\\cellcolor{{red!{}}} {v}", self.shade_level as u32 * 10)
    }

    fn md(&self) -> String {
        let v = format_score(self.delta);
        let v = if self.underlined { format!("<u>{v}</u>") } else { v };
        format!("{v} ({:.3})", self.p_value)
    }
}

/// Column header abbreviation: first three characters and a period.
pub fn abbreviate(system_id: &str) -> String {
    let head: String = system_id.chars().take(3).collect();
    format!("{head}.")
}

fn matrix_cells(m: &SignificanceMatrix) -> Vec<Vec<Option<ShadedCell>>> {
    let n = m.systems.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Greater => None,
                    std::cmp::Ordering::Equal => {
                        Some(ShadedCell { delta: 0.0, p_value: 1.0, shade_level: 0, underlined: false })
                    }
                    std::cmp::Ordering::Less => {
                        let p = m.pair(i, j);
                        Some(ShadedCell::new(p.delta, p.p_value, m.alpha))
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
struct SignificanceDoc<'a> {
    metric: &'a str,
    signature: &'a str,
    seed: u64,
    n_resamples: usize,
    alpha: f64,
    systems: &'a [String],
    scores: &'a [f64],
    pairs: Vec<PairDoc<'a>>,
}

#[derive(Serialize)]
struct PairDoc<'a> {
    a: &'a str,
    b: &'a str,
    delta: f64,
    p: f64,
    significant: bool,
    shade_level: u8,
}

pub fn render_significance(m: &SignificanceMatrix, format: Format) -> String {
    let cells = matrix_cells(m);
    let caption = format!("Statistical significance testing of the {} score difference for each system pair", m.metric);
    match format {
        Format::Tex => {
            let n = m.systems.len();
            let mut out = format!(
                "\\begin{{table}}\n\\scriptsize \\begin{{center}}\\begin{{tabular}}{{r{}}}\n\\toprule\n",
                "c".repeat(n)
            );
            let header: Vec<String> = m.systems.iter().map(|s| latex_escape(&abbreviate(s))).collect();
            let _ = writeln!(out, "& {} \\\\\n\\midrule", header.join(" & "));
            for (i, row) in cells.iter().enumerate() {
                let rendered: Vec<String> = row.iter().map(|c| c.map_or(String::new(), |c| c.tex())).collect();
                let _ = writeln!(out, "{} & {} \\\\", latex_escape(&m.systems[i]), rendered.join(" & "));
            }
            let _ = writeln!(
                out,
                "\\bottomrule\n\\end{{tabular}}\n\\caption{{{} ({}; {} resamples, seed {}).}}\n\\end{{center}} \\end{{table}}",
                latex_escape(&caption),
                latex_escape(&m.signature),
                m.n_resamples,
                m.seed
            );
            out
        }
        Format::Md => {
            let mut header = vec![String::new()];
            header.extend(m.systems.iter().map(|s| abbreviate(s)));
            let rows: Vec<Vec<String>> = cells
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut r = vec![m.systems[i].clone()];
                    r.extend(row.iter().map(|c| c.map_or(String::new(), |c| c.md())));
                    r
                })
                .collect();
            format!(
                "{}\n{caption} ({}; {} resamples, seed {}). Cells show the row minus column score difference and its p-value; underlined if p < {}.\n",
                md_table(&header, &rows),
                m.signature,
                m.n_resamples,
                m.seed,
                m.alpha
            )
        }
        Format::Csv => {
            let mut table = vec![["a", "b", "delta", "p", "significant", "shade_level"].map(String::from).to_vec()];
            for p in &m.pairs {
                table.push(vec![
                    p.system_a.clone(),
                    p.system_b.clone(),
                    p.delta.to_string(),
                    p.p_value.to_string(),
                    p.significant.to_string(),
                    shade_level(p.p_value).to_string(),
                ]);
            }
            csv_string(table)
        }
        Format::Json => json_string(&SignificanceDoc {
            metric: &m.metric,
            signature: &m.signature,
            seed: m.seed,
            n_resamples: m.n_resamples,
            alpha: m.alpha,
            systems: &m.systems,
            scores: &m.scores,
            pairs: m
                .pairs
                .iter()
                .map(|p| PairDoc {
                    a: &p.system_a,
                    b: &p.system_b,
                    delta: p.delta,
                    p: p.p_value,
                    significant: p.significant,
                    shade_level: shade_level(p.p_value),
                })
                .collect(),
        }),
    }
}

pub fn render_combination(table: &CombinationTable, format: Format) -> String {
    if format == Format::Json {
        return json_string(table);
    }
    let kept: Vec<usize> =
        (0..table.metrics.len()).filter(|&k| table.rows.iter().any(|r| r.values[k].is_some())).collect();
    let omitted: Vec<&str> =
        (0..table.metrics.len()).filter(|k| !kept.contains(k)).map(|k| table.metrics[k].as_str()).collect();
    let note =
        (!omitted.is_empty()).then(|| format!("Note: no scores available for {}; column omitted.", omitted.join(", ")));
    let cell = |v: Option<f64>, full: bool| match (v, full) {
        (None, _) => "n/a".to_string(),
        (Some(v), true) => v.to_string(),
        (Some(v), false) => format_score(v),
    };
    let header: Vec<String> =
        std::iter::once("System".to_string()).chain(kept.iter().map(|&k| table.metrics[k].clone())).collect();
    let rows = |full: bool| -> Vec<Vec<String>> {
        table
            .rows
            .iter()
            .map(|r| std::iter::once(r.label.clone()).chain(kept.iter().map(|&k| cell(r.values[k], full))).collect())
            .collect()
    };
    match format {
        Format::Md => {
            let mut out = md_table(&header, &rows(false));
            if let Some(n) = note {
                out += &format!("\n{n}\n");
            }
            out
        }
        Format::Tex => {
            let mut out = format!(
                "\\begin{{table}}\n\\scriptsize\n\\begin{{center}}\n\\begin{{tabular}}{{r{}}}\n\\toprule\n",
                "c".repeat(kept.len())
            );
            let esc: Vec<String> = header.iter().map(|h| latex_escape(h)).collect();
            let _ = writeln!(out, "{} \\\\\n\\midrule", esc.join(" & "));
            for (i, r) in rows(false).iter().enumerate() {
                let esc: Vec<String> = r.iter().map(|c| latex_escape(c)).collect();
                let _ = writeln!(out, "{} \\\\", esc.join(" & "));
                if i == 0 && table.rows.len() > 1 {
                    out += "\\midrule\n";
                }
            }
            out += "\\bottomrule\n\\end{tabular} \\end{center}\n";
            if let Some(n) = note {
                let _ = writeln!(out, "\\caption{{{}}}", latex_escape(&n));
            }
            out += "\\end{table}\n";
            out
        }
        Format::Csv => {
            let mut t = vec![header];
            t.extend(rows(true));
            csv_string(t)
        }
        Format::Json => unreachable!(),
    }
}

/// Corpus-level scores of every system under one learned metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScores {
    pub model_id: String,
    pub systems: Vec<String>,
    pub scores: Vec<f64>,
}

impl From<&SegmentScoreTable> for ModelScores {
    fn from(t: &SegmentScoreTable) -> Self {
        ModelScores {
            model_id: t.model_id().to_string(),
            systems: t.systems().to_vec(),
            scores: t.systems().iter().map(|s| corpus_average(t, s).expect("system from the table").value).collect(),
        }
    }
}

impl ModelScores {
    /// Rank of each system (1 = best), input order on ties.
    fn ranks(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        let mut ranks = vec![0; order.len()];
        for (r, &i) in order.iter().enumerate() {
            ranks[i] = r + 1;
        }
        ranks
    }

    fn score_of(&self, system: &str) -> Option<(f64, usize)> {
        let i = self.systems.iter().position(|s| s == system)?;
        Some((self.scores[i], self.ranks()[i]))
    }
}

#[derive(Serialize)]
struct ComparisonRow<'a> {
    system: &'a str,
    scores: Vec<Option<(f64, usize)>>,
}

/// One column per model with `score (rank)` cells, rows in the first
/// model's ranking order.
pub fn render_model_comparison(models: &[ModelScores], format: Format) -> String {
    let Some(first) = models.first() else {
        return String::new();
    };
    let ranks = first.ranks();
    let mut order: Vec<usize> = (0..first.systems.len()).collect();
    order.sort_by_key(|&i| ranks[i]);
    let rows: Vec<ComparisonRow> = order
        .iter()
        .map(|&i| ComparisonRow {
            system: &first.systems[i],
            scores: models.iter().map(|m| m.score_of(&first.systems[i])).collect(),
        })
        .collect();
    let cell = |c: &Option<(f64, usize)>| c.map_or("n/a".to_string(), |(s, r)| format!("{} ({r})", format_score(s)));
    match format {
        Format::Tex => {
            let mut out = format!(
                "\\begin{{table}}\n\\scriptsize\n\\begin{{tabular}}{{r{}}}\n\\toprule\n",
                "c".repeat(models.len())
            );
            let names: Vec<String> = models.iter().map(|m| latex_escape(&m.model_id)).collect();
            let _ = writeln!(out, "System & {} \\\\\n\\midrule", names.join("&"));
            for r in &rows {
                let cells: Vec<String> = r.scores.iter().map(cell).collect();
                let _ = writeln!(out, "{} & {} \\\\", latex_escape(r.system), cells.join("&"));
            }
            out += "\\bottomrule\n\\end{tabular}\n\\end{table}\n";
            out
        }
        Format::Md => {
            let header: Vec<String> =
                std::iter::once("System".to_string()).chain(models.iter().map(|m| m.model_id.clone())).collect();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| std::iter::once(r.system.to_string()).chain(r.scores.iter().map(cell)).collect())
                .collect();
            md_table(&header, &body)
        }
        Format::Csv => {
            let mut t = vec![["system", "model", "score", "rank"].map(String::from).to_vec()];
            for r in &rows {
                for (m, s) in models.iter().zip(&r.scores) {
                    if let Some((score, rank)) = s {
                        t.push(vec![r.system.to_string(), m.model_id.clone(), score.to_string(), rank.to_string()]);
                    }
                }
            }
            csv_string(t)
        }
        Format::Json => json_string(&serde_json::json!({
            "models": models.iter().map(|m| &m.model_id).collect::<Vec<_>>(),
            "rows": rows.iter().map(|r| serde_json::json!({
                "system": r.system,
                "cells": r.scores.iter().map(|c| c.map(|(s, k)| serde_json::json!({"score": s, "rank": k}))).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingRow {
    pub system_id: String,
    pub exact_match: usize,
    pub self_mismatch: SelfMismatchStats,
    /// BLEU on the original and normalized output.
    pub bleu: ScorePair,
    /// Learned metric on the original and normalized output, if supplied.
    pub learned: Option<ScorePair>,
    /// Variant counting alternative to the self-mismatch positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<VariantCounts>,
}

/// Extra distinct translations over repeated sources, for the system and
/// the reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantCounts {
    pub system: usize,
    pub reference: usize,
}

impl fmt::Display for VariantCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.system, self.reference)
    }
}

fn pair_text(p: &ScorePair) -> String {
    format!("{}/{}", format_score(p.original), format_score(p.normalized))
}

pub fn render_matching(rows: &[MatchingRow], format: Format) -> String {
    let with_learned = rows.iter().any(|r| r.learned.is_some());
    let with_variants = rows.iter().any(|r| r.variants.is_some());
    let opt_pair = |p: &Option<ScorePair>| p.as_ref().map_or("n/a".to_string(), pair_text);
    let opt_variants = |v: &Option<VariantCounts>| v.map_or("n/a".to_string(), |v| v.to_string());
    match format {
        Format::Tex => {
            let cols = format!("rcc{}c{}", if with_variants { "c" } else { "" }, if with_learned { "c" } else { "" });
            let mut out = format!("\\begin{{table}}\n\\scriptsize\n\\begin{{tabular}}{{{cols}}}\n\\toprule\n");
            out += "System & Exact Match & Self Mismatch";
            if with_variants {
                out += " & Variants";
            }
            out += " & BLEU";
            out += if with_learned { " & COMET \\\\\n" } else { " \\\\\n" };
            out += "\\midrule\n";
            for r in rows {
                let _ = write!(out, "{} & {}  & {}", latex_escape(&r.system_id), r.exact_match, r.self_mismatch);
                if with_variants {
                    let _ = write!(out, " & {}", opt_variants(&r.variants));
                }
                let _ = write!(out, " & {}", pair_text(&r.bleu));
                if with_learned {
                    let _ = write!(out, "  & {}", opt_pair(&r.learned));
                }
                out += " \\\\\n";
            }
            out += "\\bottomrule\n\\end{tabular}\n\\end{table}\n";
            out
        }
        Format::Md => {
            let mut header: Vec<String> = ["System", "Exact Match", "Self Mismatch"].map(String::from).to_vec();
            if with_variants {
                header.push("Variants".into());
            }
            header.push("BLEU".into());
            if with_learned {
                header.push("COMET".into());
            }
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![r.system_id.clone(), r.exact_match.to_string(), r.self_mismatch.to_string()];
                    if with_variants {
                        v.push(opt_variants(&r.variants));
                    }
                    v.push(pair_text(&r.bleu));
                    if with_learned {
                        v.push(opt_pair(&r.learned));
                    }
                    v
                })
                .collect();
            md_table(&header, &body)
        }
        Format::Csv => {
            let mut t = vec![[
                "system",
                "exact_match",
                "self_mismatch",
                "bleu_original",
                "bleu_normalized",
                "comet_original",
                "comet_normalized",
            ]
            .map(String::from)
            .to_vec()];
            if with_variants {
                t[0].extend(["system_variants".to_string(), "reference_variants".to_string()]);
            }
            for r in rows {
                let (lo, ln) = r
                    .learned
                    .map_or((String::new(), String::new()), |p| (p.original.to_string(), p.normalized.to_string()));
                let mut row = vec![
                    r.system_id.clone(),
                    r.exact_match.to_string(),
                    r.self_mismatch.to_string(),
                    r.bleu.original.to_string(),
                    r.bleu.normalized.to_string(),
                    lo,
                    ln,
                ];
                if with_variants {
                    let (s, rf) = r
                        .variants
                        .map_or((String::new(), String::new()), |v| (v.system.to_string(), v.reference.to_string()));
                    row.extend([s, rf]);
                }
                t.push(row);
            }
            csv_string(t)
        }
        Format::Json => json_string(&rows),
    }
}
