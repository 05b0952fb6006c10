//! Report inputs with committed golden renderings.

use std::path::PathBuf;

use mteval::combine::{CombinationRow, CombinationTable};
use mteval::diagnostics::SelfMismatchStats;
use mteval::normalize::ScorePair;
use mteval::report::{
    render_combination, render_matching, render_model_comparison, render_ranking, render_significance, Format,
    MatchingRow, ModelScores, ScoredSystem,
};
use mteval::significance::{PairResult, SignificanceMatrix};

pub const FORMATS: [(Format, &str); 4] =
    [(Format::Md, "md"), (Format::Tex, "tex"), (Format::Csv, "csv"), (Format::Json, "json")];

pub const RANKING_SIGNATURE: &str = "nrefs:2|case:mixed|eff:yes|nc:6|nw:0|space:no|version:0.1.0";

pub fn golden_path(name: &str) -> PathBuf {
    super::fixture(&format!("report/{name}"))
}

/// Every golden document, keyed by file name.
pub fn all_documents() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (f, ext) in FORMATS {
        out.push((format!("ranking.{ext}"), render_ranking("chrF", RANKING_SIGNATURE, &ranking_input(), f)));
        out.push((format!("significance.{ext}"), render_significance(&matrix(), f)));
        out.push((format!("combination.{ext}"), render_combination(&combination(true), f)));
        out.push((format!("models.{ext}"), render_model_comparison(&models(), f)));
        out.push((format!("matching.{ext}"), render_matching(&matching_rows(), f)));
    }
    out.push(("combination_no_comet.md".into(), render_combination(&combination(false), Format::Md)));
    out.push(("combination_no_comet.tex".into(), render_combination(&combination(false), Format::Tex)));
    out
}

pub fn sys(id: &str, score: f64, constrained: bool) -> ScoredSystem {
    ScoredSystem { system_id: id.into(), score, constrained }
}

pub fn ranking_input() -> Vec<ScoredSystem> {
    vec![
        sys("JDExploreAcademy", 75.04, true),
        sys("Online-W", 79.71, false),
        sys("CUNI-DocTransformer", 56.3, true),
        sys("CUNI-Transformer", 56.3, true),
        sys("Online-Y", 60.25, false),
        sys("SHOPEE_&_CO", 56.349, true),
    ]
}

pub fn pair(a: &str, b: &str, delta: f64, p: f64) -> PairResult {
    PairResult { system_a: a.into(), system_b: b.into(), delta, p_value: p, significant: p < 0.05 }
}

pub fn matrix() -> SignificanceMatrix {
    SignificanceMatrix {
        metric: "chrF".into(),
        signature: "nrefs:1|case:mixed|eff:yes|nc:6|nw:0|space:no|version:0.1.0".into(),
        seed: 42,
        n_resamples: 1000,
        alpha: 0.05,
        systems: vec!["Online-W".into(), "JDExploreAcademy".into(), "Online-B".into(), "CUNI-Bergamot".into()],
        scores: vec![79.7, 75.0, 74.6, 74.2],
        pairs: vec![
            pair("Online-W", "JDExploreAcademy", 4.7, 0.0),
            pair("Online-W", "Online-B", 5.1, 0.001),
            pair("Online-W", "CUNI-Bergamot", 5.5, 0.004),
            pair("JDExploreAcademy", "Online-B", 0.4, 0.2),
            pair("JDExploreAcademy", "CUNI-Bergamot", 0.8, 0.05),
            pair("Online-B", "CUNI-Bergamot", 0.35, 0.5),
        ],
    }
}

pub fn combination(with_learned: bool) -> CombinationTable {
    let learned = |v: f64| with_learned.then_some(v);
    CombinationTable {
        metrics: vec!["COMET".into(), "chrF".into(), "BLEU".into()],
        rows: vec![
            CombinationRow { label: "Baseline".into(), values: vec![learned(77.52), Some(79.31), Some(64.2)] },
            CombinationRow { label: "MBR".into(), values: vec![learned(77.3), Some(75.449), Some(56.55)] },
            CombinationRow { label: "Oracle".into(), values: vec![learned(86.94), Some(82.9), Some(69.25)] },
        ],
    }
}

pub fn models() -> Vec<ModelScores> {
    let systems: Vec<String> = ["Online-W", "JDExploreAcademy", "Online-B", "Lan-Bridge"].map(String::from).to_vec();
    vec![
        ModelScores {
            model_id: "wmt20-comet-da".into(),
            systems: systems.clone(),
            scores: vec![77.5, 74.8, 104.94, 70.0],
        },
        ModelScores { model_id: "wmt21-comet-qe-da".into(), systems, scores: vec![11.4, 12.05, 7.9, 11.4] },
    ]
}

pub fn matching_rows() -> Vec<MatchingRow> {
    let stats = |a, b, c, d| SelfMismatchStats {
        system_mismatches: a,
        reference_mismatches: b,
        duplicated_sources: c,
        total_segments: d,
    };
    vec![
        MatchingRow {
            system_id: "Online-W".into(),
            exact_match: 145,
            self_mismatch: stats(3, 7, 10, 1448),
            bleu: ScorePair { original: 68.72, normalized: 68.64 },
            learned: Some(ScorePair { original: 77.5, normalized: 77.49 }),
            variants: None,
        },
        MatchingRow {
            system_id: "JDExploreAcademy".into(),
            exact_match: 98,
            self_mismatch: stats(0, 7, 10, 1448),
            bleu: ScorePair { original: 60.9, normalized: 61.05 },
            learned: None,
            variants: None,
        },
    ]
}
