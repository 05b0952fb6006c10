//! Word and character tokenization feeding the metric kernels.
//!
//! The 13a and zh tokenizers reproduce sacreBLEU 2.1.0 output exactly,
//! including its whitespace definition (Python `str.split`).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Whitespace as understood by Python's `str.split()` and `str.strip()`.
///
/// This is the Unicode White_Space set plus the four ASCII information
/// separators U+001C..U+001F.
pub fn is_py_whitespace(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

/// Python `str.split()` with no arguments.
pub fn py_split(text: &str) -> impl Iterator<Item = &str> {
    text.split(is_py_whitespace).filter(|t| !t.is_empty())
}

pub fn py_strip(text: &str) -> &str {
    text.trim_matches(is_py_whitespace)
}

pub fn py_rstrip(text: &str) -> &str {
    text.trim_end_matches(is_py_whitespace)
}

/// Removes every whitespace character, as `''.join(text.split())` does.
pub fn remove_whitespace(text: &str) -> String {
    text.chars().filter(|&c| !is_py_whitespace(c)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    /// Splits already tokenized text on whitespace.
    pub fn from_whitespace(text: &str) -> Self {
        TokenSequence { tokens: py_split(text).map(str::to_string).collect() }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

struct Rules {
    symbols: Regex,
    period_comma_after: Regex,
    period_comma_before: Regex,
    digit_dash: Regex,
}

static RULES: LazyLock<Rules> = LazyLock::new(|| Rules {
    symbols: Regex::new(r"([\{-~\[-`\x20-\&\(-\+:-@/])").unwrap(),
    period_comma_after: Regex::new(r"([^0-9])([\.,])").unwrap(),
    period_comma_before: Regex::new(r"([\.,])([^0-9])").unwrap(),
    digit_dash: Regex::new(r"([0-9])(-)").unwrap(),
});

/// The regex stage shared by 13a and zh.
fn post_tokenize(line: &str) -> TokenSequence {
    let r = &*RULES;
    let line = r.symbols.replace_all(line, " $1 ");
    let line = r.period_comma_after.replace_all(&line, "$1 $2 ");
    let line = r.period_comma_before.replace_all(&line, " $1 $2");
    let line = r.digit_dash.replace_all(&line, "$1 $2 ");
    TokenSequence::from_whitespace(&line)
}

/// mteval-v13a tokenization.
pub fn tokenize_13a(text: &str) -> TokenSequence {
    let mut line = text.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if line.contains('&') {
        line = line.replace("&quot;", "\"").replace("&amp;", "&").replace("&lt;", "<").replace("&gt;", ">");
    }
    post_tokenize(&format!(" {line} "))
}

/// Code point ranges treated as CJK by the zh tokenizer, inclusive.
///
/// The upstream table lists U+20000..U+2A6D6 and U+2F800..U+2FA1D, but
/// writes them as four-hex-digit escapes followed by a literal digit, so
/// the comparison it actually performs covers U+2001..U+2A6D and
/// U+2F81..U+2FA1 instead. Scores depend on that behavior, so it is kept.
pub const CJK_RANGES: &[(char, char)] = &[
    ('\u{3400}', '\u{4db5}'),
    ('\u{4e00}', '\u{9fa5}'),
    ('\u{9fa6}', '\u{9fbb}'),
    ('\u{f900}', '\u{fa2d}'),
    ('\u{fa30}', '\u{fa6a}'),
    ('\u{fa70}', '\u{fad9}'),
    ('\u{2001}', '\u{2a6d}'),
    ('\u{2f81}', '\u{2fa1}'),
    ('\u{ff00}', '\u{ffef}'),
    ('\u{2e80}', '\u{2eff}'),
    ('\u{3000}', '\u{303f}'),
    ('\u{31c0}', '\u{31ef}'),
    ('\u{2f00}', '\u{2fdf}'),
    ('\u{2ff0}', '\u{2fff}'),
    ('\u{3100}', '\u{312f}'),
    ('\u{31a0}', '\u{31bf}'),
    ('\u{fe10}', '\u{fe1f}'),
    ('\u{fe30}', '\u{fe4f}'),
    ('\u{2600}', '\u{26ff}'),
    ('\u{2700}', '\u{27bf}'),
    ('\u{3200}', '\u{32ff}'),
    ('\u{3300}', '\u{33ff}'),
];

pub fn is_cjk(c: char) -> bool {
    CJK_RANGES.iter().any(|&(lo, hi)| lo <= c && c <= hi)
}

/// Chinese tokenization: every CJK character becomes a token, the rest goes
/// through the 13a regex rules (without 13a's entity handling).
pub fn tokenize_zh(text: &str) -> TokenSequence {
    let line = py_strip(text);
    let mut spaced = String::with_capacity(line.len() * 2);
    for c in line.chars() {
        if is_cjk(c) {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        } else {
            spaced.push(c);
        }
    }
    post_tokenize(&spaced)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tokenizer {
    #[serde(rename = "13a")]
    V13a,
    Zh,
    /// The zh algorithm used as a stand-in for Japanese morphological
    /// tokenization. It carries its own signature name so scores are never
    /// mistaken for ja-mecab ones.
    CharCjk,
}

impl Tokenizer {
    pub fn tokenize(self, text: &str) -> TokenSequence {
        match self {
            Tokenizer::V13a => tokenize_13a(text),
            Tokenizer::Zh | Tokenizer::CharCjk => tokenize_zh(text),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tokenizer::V13a => "13a",
            Tokenizer::Zh => "zh",
            Tokenizer::CharCjk => "char-cjk",
        }
    }

    /// Default tokenizer for a target language code.
    pub fn for_target(lang: &str) -> Self {
        match lang {
            "zh" => Tokenizer::Zh,
            "ja" => Tokenizer::CharCjk,
            _ => Tokenizer::V13a,
        }
    }
}

impl fmt::Display for Tokenizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tokenizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "13a" => Ok(Tokenizer::V13a),
            "zh" => Ok(Tokenizer::Zh),
            "char-cjk" => Ok(Tokenizer::CharCjk),
            other => Err(format!("unsupported tokenizer {other:?}")),
        }
    }
}

/// Multiset of character n-grams of one order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharNgramProfile {
    order: usize,
    counts: HashMap<String, usize>,
}

impl CharNgramProfile {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn counts(&self) -> &HashMap<String, usize> {
        &self.counts
    }

    pub fn get(&self, ngram: &str) -> usize {
        self.counts.get(ngram).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Character n-grams of order `n`. Panics if `n` is zero.
pub fn char_ngrams(text: &str, n: usize, remove_space: bool) -> CharNgramProfile {
    assert!(n >= 1, "n-gram order must be at least 1");
    let chars: Vec<char> =
        if remove_space { text.chars().filter(|&c| !is_py_whitespace(c)).collect() } else { text.chars().collect() };
    let mut counts = HashMap::new();
    for w in chars.windows(n) {
        *counts.entry(w.iter().collect::<String>()).or_insert(0) += 1;
    }
    CharNgramProfile { order: n, counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(t: &TokenSequence) -> Vec<&str> {
        t.tokens().iter().map(String::as_str).collect()
    }

    #[test]
    fn v13a_examples() {
        assert_eq!(toks(&tokenize_13a("Hello, world!")), ["Hello", ",", "world", "!"]);
        assert_eq!(toks(&tokenize_13a("3.14")), ["3.14"]);
        assert!(tokenize_13a("").is_empty());
        assert_eq!(toks(&tokenize_13a("a &amp; b")), ["a", "&", "b"]);
        assert_eq!(toks(&tokenize_13a("Price is 5.")), ["Price", "is", "5", "."]);
    }

    #[test]
    fn zh_examples() {
        assert_eq!(toks(&tokenize_zh("你好world")), ["你", "好", "world"]);
        assert_eq!(toks(&tokenize_zh("你好，世界")), ["你", "好", "，", "世", "界"]);
        assert!(tokenize_zh("").is_empty());
    }

    #[test]
    fn zh_differs_from_13a_on_sentence_final_period() {
        // zh does not pad the line, so a period after a final digit stays attached.
        assert_eq!(toks(&tokenize_zh("Price is 5.")), ["Price", "is", "5."]);
        assert_eq!(toks(&tokenize_zh(".5 left")), [".5", "left"]);
        assert_eq!(toks(&tokenize_13a(".5 left")), [".", "5", "left"]);
        assert_eq!(toks(&tokenize_zh("a &amp; b")), ["a", "&", "amp", ";", "b"]);
    }

    #[test]
    fn zh_table_quirk_splits_general_punctuation() {
        assert_eq!(toks(&tokenize_zh("x—y “q”")), ["x", "—", "y", "“", "q", "”"]);
        assert!(!is_cjk('\u{2000}'));
        assert!(is_cjk('\u{2001}'));
        assert!(!is_cjk('\u{20000}'));
    }

    #[test]
    fn python_whitespace() {
        assert!(is_py_whitespace('\u{1f}'));
        assert!(is_py_whitespace('\u{85}'));
        assert!(is_py_whitespace('\u{3000}'));
        assert!(!is_py_whitespace('\u{200b}'));
        assert_eq!(py_split("a\u{1c}b\u{a0}c").collect::<Vec<_>>(), ["a", "b", "c"]);
    }

    #[test]
    fn char_ngram_examples() {
        let p = char_ngrams("ab cd", 2, true);
        assert_eq!(p.total(), 3);
        for g in ["ab", "bc", "cd"] {
            assert_eq!(p.get(g), 1);
        }
        assert_eq!(char_ngrams("aaa", 2, true).get("aa"), 2);
        assert!(char_ngrams("hi", 6, true).is_empty());
        assert_eq!(char_ngrams("a b", 2, false).total(), 2);
    }

    #[test]
    fn tokenizer_names_round_trip() {
        for t in [Tokenizer::V13a, Tokenizer::Zh, Tokenizer::CharCjk] {
            assert_eq!(t.name().parse::<Tokenizer>().unwrap(), t);
        }
        assert_eq!(Tokenizer::for_target("ja").name(), "char-cjk");
    }
}
