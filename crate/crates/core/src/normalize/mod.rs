//! Port of the Moses normalization pipe
//! `replace-unicode-punctuation.perl | normalize-punctuation.perl -l LANG | remove-non-printing-char.perl`.
//!
//! The first two scripts run byte-wise in Perl (no `use utf8`), so their
//! rules are ported as byte regexes with Unicode disabled: `\d`, `\s` and
//! case-insensitive `[a-z]` are ASCII only, just as in the scripts. Each
//! line is processed with its trailing newline because one rule can match
//! it. The pinned script copies live in `tests/fixtures/moses`.

mod other_ranges;

use std::io::{self, BufRead, Write};
use std::str::FromStr;
use std::sync::LazyLock;

use log::warn;
use regex::bytes::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EvaluationCorpus;
use crate::metrics::{BleuConfig, ChrfConfig, MetricError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// replace-unicode-punctuation.perl
    UnicodePunct,
    /// normalize-punctuation.perl
    PunctNorm,
    /// remove-non-printing-char.perl
    StripNonprint,
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unicode_punct" => Ok(Stage::UnicodePunct),
            "punct_norm" => Ok(Stage::PunctNorm),
            "strip_nonprint" => Ok(Stage::StripNonprint),
            other => Err(format!("unknown normalization stage {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub target_language: String,
    pub stages: Vec<Stage>,
}

impl NormalizationConfig {
    /// All three stages, in pipe order.
    pub fn new(target_language: &str) -> Self {
        NormalizationConfig {
            target_language: target_language.to_string(),
            stages: vec![Stage::UnicodePunct, Stage::PunctNorm, Stage::StripNonprint],
        }
    }

    /// The scripts were not written for Chinese or Japanese text.
    pub fn warn_if_unsupported(&self) -> bool {
        let cjk = matches!(self.target_language.as_str(), "zh" | "ja");
        if cjk {
            warn!(
                "the Moses normalization scripts were not designed for {}; output may be degraded",
                self.target_language
            );
        }
        cjk
    }
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self::new("en")
    }
}

struct Rule {
    re: Regex,
    rep: &'static [u8],
}

fn rules(spec: &[(&str, &'static str)]) -> Vec<Rule> {
    spec.iter()
        .map(|(pat, rep)| Rule { re: Regex::new(&format!("(?-u){pat}")).expect("valid rule"), rep: rep.as_bytes() })
        .collect()
}

fn apply(rules: &[Rule], mut line: Vec<u8>) -> Vec<u8> {
    for r in rules {
        if let std::borrow::Cow::Owned(v) = r.re.replace_all(&line, r.rep) {
            line = v;
        }
    }
    line
}

// Rules appear in script order. `\xC2\xA0` is a UTF-8 no-break space.
static UNICODE_PUNCT: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    rules(&[
        ("，", ","),
        ("。 *", ". "),
        ("、", ","),
        ("”", "\""),
        ("“", "\""),
        ("∶", ":"),
        ("：", ":"),
        ("？", "?"),
        ("《", "\""),
        ("》", "\""),
        ("）", ")"),
        ("！", "!"),
        ("（", "("),
        ("；", ";"),
        ("１", "1"),
        ("」", "\""),
        ("「", "\""),
        ("０", "0"),
        ("３", "3"),
        ("２", "2"),
        ("５", "5"),
        ("６", "6"),
        ("９", "9"),
        ("７", "7"),
        ("８", "8"),
        ("４", "4"),
        ("． *", ". "),
        ("～", "~"),
        ("’", "'"),
        ("…", "..."),
        ("━", "-"),
        ("〈", "<"),
        ("〉", ">"),
        ("【", "["),
        ("】", "]"),
        ("％", "%"),
    ])
});

static PUNCT_COMMON: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    rules(&[
        (r"\r", ""),
        (r"\(", " ("),
        (r"\)", ") "),
        (" +", " "),
        (r"\) ([\.\!\:\?\;\,])", ")$1"),
        (r"\( ", "("),
        (r" \)", ")"),
        (r"(\d) %", "$1%"),
        (" :", ":"),
        (" ;", ";"),
        ("`", "'"),
        ("''", " \" "),
        ("„", "\""),
        ("“", "\""),
        ("”", "\""),
        ("–", "-"),
        ("—", " - "),
        (" +", " "),
        ("´", "'"),
        ("(?i)([a-z])‘([a-z])", "$1'$2"),
        ("(?i)([a-z])’([a-z])", "$1'$2"),
        ("‘", "\""),
        ("‚", "\""),
        ("’", "\""),
        ("''", "\""),
        ("´´", "\""),
        ("…", "..."),
        (r"\xC2\xA0«\xC2\xA0", " \""),
        (r"«\xC2\xA0", "\""),
        ("«", "\""),
        (r"\xC2\xA0»\xC2\xA0", "\" "),
        (r"\xC2\xA0»", "\""),
        ("»", "\""),
        (r"\xC2\xA0%", "%"),
        (r"nº\xC2\xA0", "nº "),
        (r"\xC2\xA0:", ":"),
        (r"\xC2\xA0ºC", " ºC"),
        (r"\xC2\xA0cm", " cm"),
        (r"\xC2\xA0\?", "?"),
        (r"\xC2\xA0!", "!"),
        (r"\xC2\xA0;", ";"),
        (r",\xC2\xA0", ", "),
        (" +", " "),
    ])
});

static PUNCT_EN: LazyLock<Vec<Rule>> = LazyLock::new(|| rules(&[(r#""([,\.]+)"#, "$1\"")]));

static PUNCT_OTHER: LazyLock<Vec<Rule>> =
    LazyLock::new(|| rules(&[(r#",""#, "\","), (r#"(\.+)"(\s*[^<])"#, "\"$1$2")]));

static DIGITS_COMMA: LazyLock<Vec<Rule>> = LazyLock::new(|| rules(&[(r"(\d)\xC2\xA0(\d)", "$1,$2")]));

static DIGITS_PERIOD: LazyLock<Vec<Rule>> = LazyLock::new(|| rules(&[(r"(\d)\xC2\xA0(\d)", "$1.$2")]));

fn punct_norm(line: Vec<u8>, lang: &str) -> Vec<u8> {
    let mut line = apply(&PUNCT_COMMON, line);
    match lang {
        "en" => line = apply(&PUNCT_EN, line),
        "cs" | "cz" => {}
        _ => line = apply(&PUNCT_OTHER, line),
    }
    if matches!(lang, "de" | "es" | "cz" | "cs" | "fr") {
        apply(&DIGITS_COMMA, line)
    } else {
        apply(&DIGITS_PERIOD, line)
    }
}

/// Whether Perl 5.34 (Unicode 13) matches `c` with `\p{C}`.
pub fn is_other(c: char) -> bool {
    let cp = c as u32;
    let ranges = other_ranges::OTHER_RANGES;
    let i = ranges.partition_point(|&(_, hi)| hi < cp);
    i < ranges.len() && ranges[i].0 <= cp
}

fn strip_nonprint(line: &str) -> String {
    line.chars().map(|c| if is_other(c) { ' ' } else { c }).collect()
}

/// Normalizes one newline-free line.
pub fn normalize_text(text: &str, config: &NormalizationConfig) -> String {
    let mut bytes = text.as_bytes().to_vec();
    bytes.push(b'\n');
    let mut out: Option<String> = None;
    for stage in &config.stages {
        if let Some(s) = out.take() {
            bytes = s.into_bytes();
            bytes.push(b'\n');
        }
        match stage {
            Stage::UnicodePunct => bytes = apply(&UNICODE_PUNCT, bytes),
            Stage::PunctNorm => bytes = punct_norm(bytes, &config.target_language),
            Stage::StripNonprint => {
                let line = String::from_utf8_lossy(&bytes);
                let line = line.strip_suffix('\n').unwrap_or(&line);
                out = Some(strip_nonprint(line));
            }
        }
    }
    match out {
        Some(s) => s,
        None => {
            let mut s = String::from_utf8(bytes).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned());
            if s.ends_with('\n') {
                s.pop();
            }
            s
        }
    }
}

/// Line filter: normalizes standard input to standard output.
pub fn normalize_stream<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    config: &NormalizationConfig,
) -> io::Result<usize> {
    let mut n = 0;
    for line in input.lines() {
        writeln!(output, "{}", normalize_text(&line?, config))?;
        n += 1;
    }
    output.flush()?;
    Ok(n)
}

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("unknown system {0:?}")]
    UnknownSystem(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A metric value before and after normalizing the system output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub original: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationImpact {
    pub system_id: String,
    pub bleu: ScorePair,
    pub chrf: ScorePair,
    pub normalized: Vec<String>,
}

/// Scores a system before and after normalization. References are left
/// untouched.
pub fn normalization_impact(
    corpus: &EvaluationCorpus,
    system_id: &str,
    config: &NormalizationConfig,
    bleu: &BleuConfig,
    chrf: &ChrfConfig,
) -> Result<NormalizationImpact, NormalizeError> {
    let system = corpus.system(system_id).map_err(|_| NormalizeError::UnknownSystem(system_id.to_string()))?;
    let refs = corpus.references_by_segment();
    let normalized: Vec<String> = system.segments.iter().map(|s| normalize_text(s, config)).collect();
    let pair = |f: &dyn Fn(&[String]) -> Result<f64, MetricError>| -> Result<ScorePair, MetricError> {
        Ok(ScorePair { original: f(&system.segments)?, normalized: f(&normalized)? })
    };
    Ok(NormalizationImpact {
        system_id: system_id.to_string(),
        bleu: pair(&|h| Ok(bleu.corpus_score(h, &refs)?.value))?,
        chrf: pair(&|h| Ok(chrf.corpus_score(h, &refs)?.value))?,
        normalized,
    })
}
