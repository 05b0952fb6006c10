//! Brute-force reference implementations used as test oracles.
//!
//! Everything here is written for clarity, not speed, and shares no
//! counting or scoring code with the library. Only tokenization and the
//! resample index draw are taken from the library, the latter through the
//! same public RNG crates rather than library code.

#![allow(dead_code)]

pub mod docs;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

/// Number of times `needle` occurs as a contiguous run in `hay`.
fn occurrences<T: PartialEq>(hay: &[T], needle: &[T]) -> usize {
    if needle.len() > hay.len() {
        return 0;
    }
    (0..=hay.len() - needle.len()).filter(|&i| &hay[i..i + needle.len()] == needle).count()
}

/// Distinct contiguous runs of length `n`, in first-occurrence order.
fn distinct_runs<T: PartialEq + Clone>(seq: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    if n == 0 || n > seq.len() {
        return out;
    }
    for i in 0..=seq.len() - n {
        let run = seq[i..i + n].to_vec();
        if !out.contains(&run) {
            out.push(run);
        }
    }
    out
}

fn py_whitespace(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleBleuStats {
    pub hyp_len: usize,
    pub ref_len: usize,
    pub matches: [usize; 4],
    pub totals: [usize; 4],
}

/// Per-segment BLEU counts from token lists: clipping against the maximum
/// reference count, closest reference length with ties to the shorter one.
pub fn oracle_bleu_stats(hyp: &[String], refs: &[Vec<String>]) -> OracleBleuStats {
    let mut s = OracleBleuStats { hyp_len: hyp.len(), ..Default::default() };
    let mut best: Option<(usize, usize)> = None;
    for r in refs {
        let diff = r.len().abs_diff(hyp.len());
        best = match best {
            Some((d, l)) if d < diff || (d == diff && l <= r.len()) => Some((d, l)),
            _ => Some((diff, r.len())),
        };
    }
    s.ref_len = best.map_or(0, |(_, l)| l);
    for n in 1..=4 {
        s.totals[n - 1] = hyp.len().saturating_sub(n - 1);
        for g in distinct_runs(hyp, n) {
            let in_hyp = occurrences(hyp, &g);
            let in_ref = refs.iter().map(|r| occurrences(r, &g)).max().unwrap_or(0);
            s.matches[n - 1] += in_hyp.min(in_ref);
        }
    }
    s
}

/// Corpus BLEU from summed counts with the "exp" smoothing of the reference
/// scorer (only kicks in for zero-match orders) and no effective order.
pub fn oracle_bleu_from(stats: &[OracleBleuStats], smooth: bool) -> f64 {
    let mut t = OracleBleuStats::default();
    for s in stats {
        t.hyp_len += s.hyp_len;
        t.ref_len += s.ref_len;
        for n in 0..4 {
            t.matches[n] += s.matches[n];
            t.totals[n] += s.totals[n];
        }
    }
    if t.matches.iter().all(|&m| m == 0) {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut k = 1.0;
    for n in 0..4 {
        if t.totals[n] == 0 {
            // Too short for this order: the precision stays zero.
            return 0.0;
        }
        let p = if t.matches[n] > 0 {
            t.matches[n] as f64 / t.totals[n] as f64
        } else if smooth {
            k *= 2.0;
            1.0 / (k * t.totals[n] as f64)
        } else {
            return 0.0;
        };
        log_sum += p.ln();
    }
    let bp = if t.hyp_len == 0 {
        0.0
    } else if t.hyp_len < t.ref_len {
        (1.0 - t.ref_len as f64 / t.hyp_len as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * (log_sum / 4.0).exp()
}

/// Corpus BLEU over raw strings with the 13a tokenizer. Empty references
/// are dropped per segment.
pub fn oracle_bleu(hyps: &[String], refs: &[Vec<String>], smooth: bool) -> f64 {
    let tok = |s: &str| -> Vec<String> {
        mteval::tokenize::tokenize_13a(s.trim_end_matches(py_whitespace)).tokens().to_vec()
    };
    let stats: Vec<OracleBleuStats> = hyps
        .iter()
        .zip(refs)
        .map(|(h, rs)| {
            let rs: Vec<Vec<String>> = rs.iter().filter(|r| !r.is_empty()).map(|r| tok(r)).collect();
            oracle_bleu_stats(&tok(h), &rs)
        })
        .collect();
    oracle_bleu_from(&stats, smooth)
}

/// Character n-gram counts for one segment and one order:
/// (hypothesis total, reference total, clipped matches).
fn chrf_order_counts(hyp: &[char], reference: &[char], n: usize) -> [usize; 3] {
    let h = hyp.len().saturating_sub(n - 1);
    let r = reference.len().saturating_sub(n - 1);
    let m = distinct_runs(hyp, n).iter().map(|g| occurrences(hyp, g).min(occurrences(reference, g))).sum();
    [h, r, m]
}

pub fn strip_spaces(s: &str) -> Vec<char> {
    s.chars().filter(|&c| !py_whitespace(c)).collect()
}

/// F-score from per-order counts, averaging precision and recall over the
/// orders where both sides have n-grams.
pub fn oracle_chrf_f(counts: &[[usize; 3]], beta: f64) -> f64 {
    let (mut p_sum, mut r_sum, mut k) = (0.0, 0.0, 0usize);
    for &[h, r, m] in counts {
        if h > 0 && r > 0 {
            p_sum += m as f64 / h as f64;
            r_sum += m as f64 / r as f64;
            k += 1;
        }
    }
    if k == 0 {
        return 0.0;
    }
    let p = p_sum / k as f64;
    let r = r_sum / k as f64;
    let b2 = beta * beta;
    if p + r == 0.0 {
        return 0.0;
    }
    100.0 * (1.0 + b2) * p * r / (b2 * p + r)
}

/// Segment counts against the best reference (highest segment F, first
/// reference on ties).
pub fn oracle_chrf_segment_counts(hyp: &str, refs: &[&str], order: usize) -> Vec<[usize; 3]> {
    let h = strip_spaces(hyp);
    let mut best: Option<(f64, Vec<[usize; 3]>)> = None;
    for r in refs.iter().filter(|r| !r.is_empty()) {
        let rc = strip_spaces(r);
        let counts: Vec<[usize; 3]> = (1..=order)
            .map(|n| {
                let mut c = chrf_order_counts(&h, &rc, n);
                // An order the reference cannot fill does not count against the hypothesis.
                if c[1] == 0 {
                    c[0] = 0;
                }
                c
            })
            .collect();
        let f = oracle_chrf_f(&counts, 2.0);
        if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
            best = Some((f, counts));
        }
    }
    best.expect("at least one non-empty reference").1
}

pub fn oracle_chrf(hyps: &[String], refs: &[Vec<String>], order: usize) -> f64 {
    let mut total = vec![[0usize; 3]; order];
    for (h, rs) in hyps.iter().zip(refs) {
        let rs: Vec<&str> = rs.iter().map(String::as_str).collect();
        for (t, c) in total.iter_mut().zip(oracle_chrf_segment_counts(h, &rs, order)) {
            for k in 0..3 {
                t[k] += c[k];
            }
        }
    }
    oracle_chrf_f(&total, 2.0)
}

pub fn oracle_chrf_sentence(hyp: &str, refs: &[&str]) -> f64 {
    oracle_chrf_f(&oracle_chrf_segment_counts(hyp, refs, 6), 2.0)
}

/// Index sets drawn exactly as the documented resampling protocol says:
/// ChaCha20 seeded from the 64-bit seed, stream `i` for resample `i`,
/// uniform indices with replacement.
pub fn oracle_resamples(seed: u64, n: usize, size: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (0..size).map(|_| rng.random_range(0..size)).collect()
        })
        .collect()
}

/// Paired bootstrap by rescoring every resample from scratch. Returns
/// (delta, p) where p is the fraction of resamples in which the system
/// that wins on the full corpus does not win strictly.
pub fn oracle_bootstrap(
    score: &dyn Fn(&[usize], usize) -> f64,
    a: usize,
    b: usize,
    size: usize,
    samples: &[Vec<usize>],
) -> (f64, f64) {
    let all: Vec<usize> = (0..size).collect();
    let delta = score(&all, a) - score(&all, b);
    if delta == 0.0 {
        return (0.0, 1.0);
    }
    let (w, l) = if delta > 0.0 { (a, b) } else { (b, a) };
    let fails = samples.iter().filter(|s| score(s, w) <= score(s, l)).count();
    (delta, fails as f64 / samples.len() as f64)
}

/// Exhaustive MBR: average utility against every other candidate, first
/// maximum wins. Returns the chosen index and its average utility.
pub fn oracle_mbr(k: usize, u: &dyn Fn(usize, usize) -> f64) -> (usize, f64) {
    if k == 1 {
        return (0, 0.0);
    }
    let avgs: Vec<f64> = (0..k)
        .map(|c| {
            let others: Vec<f64> = (0..k).filter(|&r| r != c).map(|r| u(c, r)).collect();
            others.iter().sum::<f64>() / others.len() as f64
        })
        .collect();
    let mut best = 0;
    for c in 1..k {
        if avgs[c] > avgs[best] {
            best = c;
        }
    }
    (best, avgs[best])
}

pub fn read_lines(rel: &str) -> Vec<String> {
    std::fs::read_to_string(fixture(rel)).unwrap().lines().map(str::to_string).collect()
}

/// A small random candidate pool: up to `max_k` systems and `max_n`
/// segments over a tiny vocabulary, so duplicates and empty candidates are
/// common.
pub fn random_pool(rng: &mut impl Rng, max_k: usize, max_n: usize) -> (Vec<String>, Vec<Vec<String>>) {
    const VOCAB: [&str; 8] = ["the", "cat", "a", "dog", "sat", "ran", ".", "mat"];
    let k = rng.random_range(1..=max_k);
    let n = rng.random_range(1..=max_n);
    let systems = (0..k).map(|i| format!("sys{i}")).collect();
    let segments = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| {
                    let len = rng.random_range(0..6);
                    (0..len).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" ")
                })
                .collect()
        })
        .collect();
    (systems, segments)
}

/// Sentence chrF (nc=6, beta=2) with an empty reference scoring 0.
pub fn oracle_chrf_utility(cand: &str, pseudo: &str) -> f64 {
    if pseudo.is_empty() {
        0.0
    } else {
        oracle_chrf_sentence(cand, &[pseudo])
    }
}

pub fn pool_from_seed(seed: u64) -> mteval::combine::CandidatePool {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (systems, segments) = random_pool(&mut rng, 5, 10);
    mteval::combine::CandidatePool::new(systems, segments).unwrap()
}

/// Utility values on a coarse grid so that ties actually occur.
pub fn grid_utility(seed: u64, seg: usize, c: usize, r: usize) -> f64 {
    let h = seed
        ^ (seg as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ ((c * 31 + r) as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let h = (h ^ (h >> 31)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ((h >> 40) % 5) as f64 / 4.0
}
