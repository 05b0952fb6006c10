//! Reproducibility signatures such as
//! `nrefs:2|case:mixed|eff:no|tok:13a|smooth:exp|version:0.1.0`.

use std::fmt;

use thiserror::Error;

use super::{BleuConfig, ChrfConfig, Smoothing};
use crate::tokenize::Tokenizer;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefCount {
    Fixed(usize),
    /// Segments have differing numbers of usable references.
    Variable,
}

impl fmt::Display for RefCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefCount::Fixed(n) => write!(f, "{n}"),
            RefCount::Variable => f.write_str("var"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricConfig {
    Bleu(BleuConfig),
    Chrf(ChrfConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    pub nrefs: RefCount,
    pub config: MetricConfig,
    pub version: String,
}

impl Signature {
    /// A signature stamped with this crate's version.
    pub fn new(nrefs: RefCount, config: MetricConfig) -> Self {
        Signature { nrefs, config, version: VERSION.to_string() }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_signature(self))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("malformed signature field {0:?}")]
    Malformed(String),
    #[error("expected field {expected:?}, found {found:?}")]
    UnexpectedField { expected: String, found: String },
    #[error("bad value {value:?} for field {field:?}")]
    BadValue { field: String, value: String },
    #[error("signature names neither BLEU nor chrF fields")]
    UnknownMetric,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn case(lowercase: bool) -> &'static str {
    if lowercase {
        "lc"
    } else {
        "mixed"
    }
}

pub fn render_signature(sig: &Signature) -> String {
    let body = match &sig.config {
        MetricConfig::Bleu(c) => format!(
            "case:{}|eff:{}|tok:{}|smooth:{}",
            case(c.lowercase),
            yes_no(c.effective_order),
            c.tokenizer.name(),
            c.smoothing.name()
        ),
        MetricConfig::Chrf(c) => format!(
            "case:{}|eff:{}|nc:{}|nw:0|space:{}",
            case(c.lowercase),
            yes_no(c.effective_order),
            c.char_order,
            yes_no(!c.remove_whitespace)
        ),
    };
    format!("nrefs:{}|{}|version:{}", sig.nrefs, body, sig.version)
}

const BLEU_KEYS: [&str; 6] = ["nrefs", "case", "eff", "tok", "smooth", "version"];
const CHRF_KEYS: [&str; 7] = ["nrefs", "case", "eff", "nc", "nw", "space", "version"];

pub fn parse_signature(text: &str) -> Result<Signature, SignatureError> {
    let mut fields = Vec::new();
    for part in text.split('|') {
        let (k, v) = part.split_once(':').ok_or_else(|| SignatureError::Malformed(part.to_string()))?;
        fields.push((k, v));
    }
    let keys: &[&str] = match fields.get(3).map(|f| f.0) {
        Some("tok") => &BLEU_KEYS,
        Some("nc") => &CHRF_KEYS,
        _ => return Err(SignatureError::UnknownMetric),
    };
    for (i, expected) in keys.iter().enumerate() {
        let found = fields.get(i).map(|f| f.0).unwrap_or("");
        if found != *expected {
            return Err(SignatureError::UnexpectedField { expected: expected.to_string(), found: found.to_string() });
        }
    }
    if fields.len() > keys.len() {
        return Err(SignatureError::UnexpectedField {
            expected: String::new(),
            found: fields[keys.len()].0.to_string(),
        });
    }
    let bad = |i: usize| SignatureError::BadValue { field: fields[i].0.to_string(), value: fields[i].1.to_string() };
    let nrefs = match fields[0].1 {
        "var" => RefCount::Variable,
        n => RefCount::Fixed(n.parse().ok().filter(|&n| n > 0).ok_or_else(|| bad(0))?),
    };
    let lowercase = match fields[1].1 {
        "mixed" => false,
        "lc" => true,
        _ => return Err(bad(1)),
    };
    let flag = |i: usize| match fields[i].1 {
        "yes" => Ok(true),
        "no" => Ok(false),
        _ => Err(bad(i)),
    };
    let effective_order = flag(2)?;
    let config = if keys.len() == BLEU_KEYS.len() {
        MetricConfig::Bleu(BleuConfig {
            tokenizer: fields[3].1.parse::<Tokenizer>().map_err(|_| bad(3))?,
            smoothing: fields[4].1.parse::<Smoothing>().map_err(|_| bad(4))?,
            lowercase,
            effective_order,
        })
    } else {
        let char_order = fields[3].1.parse().ok().filter(|&n| n > 0).ok_or_else(|| bad(3))?;
        if fields[4].1 != "0" {
            return Err(bad(4));
        }
        MetricConfig::Chrf(ChrfConfig { char_order, beta: 2, remove_whitespace: !flag(5)?, effective_order, lowercase })
    };
    let version = fields[keys.len() - 1].1.to_string();
    Ok(Signature { nrefs, config, version })
}
