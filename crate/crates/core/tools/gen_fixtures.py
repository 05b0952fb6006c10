#!/usr/bin/env python3
"""Regenerates the metric test fixtures and their reference-scorer values.

Needs sacrebleu==2.1.0 importable and perl on PATH. Run from crates/core:

    python3 tools/gen_fixtures.py

Outputs are deterministic; rerunning must not change committed files.
"""

import json
import random
import subprocess
from pathlib import Path

import sacrebleu
from sacrebleu.metrics import BLEU, CHRF
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a
from sacrebleu.tokenizers.tokenizer_zh import TokenizerZh

assert sacrebleu.__version__ == "2.1.0", sacrebleu.__version__

ROOT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

WORDS = (
    "the a of to and in that is was for on it with as he be at by this had not are but from or "
    "have an they which one you were her all she there would their we him been has when who will "
    "more no if out so said what up its about into than them can only other new some could time "
    "these two may then do first any my now such like our over man me even most made after also "
    "did many before must through back years where much your way well down should because each "
    "just those people how too little state good very make world still own see men work long get "
    "here between both life being under never day same another know while last might us great old "
    "year off come since against go came right used take three committee minister government café "
    "naïve résumé e-mail well-known U.S. Dr. Mr."
).split()
NUMBERS = ["3.5", "1,000", "2022", "42", "0.7", "10-15", "12:30", "50%", "$20", "4th"]
PUNCT_END = [".", ".", ".", "?", "!", ";", "...", ""]
SOURCE_WORDS = (
    "der die das und ist nicht ein eine zu mit auf für von den dem des sich im an auch es "
    "wir sie er hat aus bei nach wird werden über vor dass oder wenn noch nur Regierung Minister"
).split()


def sentence(rng, n):
    toks = []
    for _ in range(n):
        r = rng.random()
        if r < 0.07:
            toks.append(rng.choice(NUMBERS))
        elif r < 0.12:
            toks.append(rng.choice([",", "(", ")", '"', "'s", "-", ":"]))
        else:
            toks.append(rng.choice(WORDS))
    text = " ".join(toks)
    text = text[:1].upper() + text[1:]
    return text + rng.choice(PUNCT_END)


def perturb(rng, text, rate):
    toks = text.split()
    out = []
    for t in toks:
        r = rng.random()
        if r < rate * 0.4:
            continue
        if r < rate * 0.8:
            out.append(rng.choice(WORDS))
        elif r < rate:
            out.append(t)
            out.append(rng.choice(WORDS))
        else:
            out.append(t)
    if len(out) > 2 and rng.random() < rate:
        i = rng.randrange(len(out) - 1)
        out[i], out[i + 1] = out[i + 1], out[i]
    return " ".join(out)


def write_lines(path, lines):
    assert all("\n" not in l for l in lines)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def bilingual50():
    rng = random.Random(20221207)
    n = 50
    ref_a, ref_b, src = [], [], []
    for i in range(n):
        length = [1, 2, 3, 4, 5][i] if i < 5 else rng.randint(3, 28)
        a = sentence(rng, length)
        ref_a.append(a)
        ref_b.append(perturb(rng, a, 0.35) or a)
        src.append(" ".join(rng.choice(SOURCE_WORDS) for _ in range(max(1, length))))
    # Repeated sources, for the self-mismatch diagnostics.
    for i, j in [(10, 20), (11, 31), (12, 42), (10, 45)]:
        src[j] = src[i]
    systems = {}
    for name, rate, seed in [("sysA", 0.15, 1), ("sysB", 0.35, 2), ("sysC", 0.25, 3)]:
        srng = random.Random(seed)
        systems[name] = [perturb(srng, r, rate) for r in ref_a]
    # Edge cases: empty output, exact copy, no overlap, trailing spaces, short strings.
    systems["sysA"][7] = ""
    systems["sysA"][8] = ref_a[8]
    systems["sysB"][9] = "zzz qqq xxx"
    systems["sysB"][0] = ref_a[0] + "   "
    systems["sysC"][1] = "ab"
    systems["sysC"][3] = ref_b[3]
    systems["sysA"][20] = systems["sysA"][10]
    systems["sysB"][20] = systems["sysB"][10] + " ."

    d = ROOT / "bilingual50"
    write_lines(d / "source.de", src)
    write_lines(d / "ref.A.en", ref_a)
    write_lines(d / "ref.B.en", ref_b)
    for name, lines in systems.items():
        write_lines(d / f"{name}.en", lines)
    (d / "manifest.txt").write_text(
        "# 50 segments, German to English, two references.\n"
        "direction: de-en\n"
        "source: source.de\n"
        "reference: A ref.A.en\n"
        "reference: B ref.B.en\n"
        "system: sysA sysA.en constrained\n"
        "system: sysB sysB.en constrained\n"
        "system: sysC sysC.en unconstrained\n",
        encoding="utf-8",
    )

    refs = [ref_a, ref_b]
    expected = {"systems": {}}
    bleu = BLEU()
    bleu_none = BLEU(smooth_method="none")
    chrf = CHRF()
    chrf_eps = CHRF(eps_smoothing=True)
    chrf_lc = CHRF(lowercase=True)
    for name, hyps in systems.items():
        stats = bleu.corpus_score(hyps, refs)
        expected["systems"][name] = {
            "bleu": stats.score,
            "bleu_counts": stats.counts,
            "bleu_totals": stats.totals,
            "bleu_sys_len": stats.sys_len,
            "bleu_ref_len": stats.ref_len,
            "bleu_single_ref": bleu.corpus_score(hyps, [ref_a]).score,
            "bleu_smooth_none": bleu_none.corpus_score(hyps, refs).score,
            "chrf": chrf.corpus_score(hyps, refs).score,
            "chrf_single_ref": chrf.corpus_score(hyps, [ref_a]).score,
            "chrf_eps": chrf_eps.corpus_score(hyps, refs).score,
            "chrf_lowercase": chrf_lc.corpus_score(hyps, refs).score,
            "sentence_bleu": [
                sacrebleu.sentence_bleu(h, [a, b]).score for h, a, b in zip(hyps, ref_a, ref_b)
            ],
            "sentence_chrf": [
                sacrebleu.sentence_chrf(h, [a, b]).score for h, a, b in zip(hyps, ref_a, ref_b)
            ],
        }
    (d / "sacrebleu.json").write_text(json.dumps(expected, indent=1) + "\n", encoding="utf-8")


TOKENIZE_INPUTS = [
    "Hello, world!",
    "It costs $3.50 (or 3,50 EUR).",
    "The U.S. is big.",
    "Price is 5.",
    ".5 left, 5. right",
    "well-known 10-15 e-mail",
    "a &amp; b &lt;tag&gt; &quot;q&quot;",
    "<skipped> words",
    "trailing   spaces   ",
    "tabs\tand nbsp",
    "“Quotes” — dashes – and … ellipsis",
    "你好，世界！",
    "中文English混合123。",
    "日本語のテキストです。",
    "東京は2022年に",
    "한국어 문장입니다.",
    "x—y “q”",
    "emoji 😀 and ☀ sun",
    "Ünïcödé wörds: café, naïve.",
    "'single' `back` quotes",
    "a/b\\c|d~e^f",
    "1.000.000,50 and 1,000,000.50",
    "",
    "   ",
    "end with period.",
    "segment\u001fwith\u001cseparators",
    "　ideographic　space",
    "mixed 中文, English. 数字3.5",
]


def tokenizer_goldens():
    d = ROOT / "tokenize"
    t13a, tzh = Tokenizer13a(), TokenizerZh()
    cases = [{"input": s, "13a": t13a(s), "zh": tzh(s)} for s in TOKENIZE_INPUTS]
    d.mkdir(parents=True, exist_ok=True)
    (d / "goldens.json").write_text(json.dumps(cases, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def bootstrap10():
    """Ten segments, two systems; p-values come from the Rust oracle."""
    rng = random.Random(42)
    refs = [sentence(rng, rng.randint(4, 12)) for _ in range(10)]
    a = [perturb(rng, r, 0.2) for r in refs]
    b = [perturb(rng, r, 0.3) for r in refs]
    d = ROOT / "bootstrap10"
    write_lines(d / "source.de", [f"Satz {i}" for i in range(10)])
    write_lines(d / "ref.en", refs)
    write_lines(d / "sysA.en", a)
    write_lines(d / "sysB.en", b)
    (d / "manifest.txt").write_text(
        "direction: de-en\n"
        "source: source.de\n"
        "reference: ref ref.en\n"
        "system: sysA sysA.en constrained\n"
        "system: sysB sysB.en constrained\n",
        encoding="utf-8",
    )


NORM_LANGS = ["en", "fr", "de", "cs"]

NORM_PIECES = [
    "„Anführungszeichen“", "«guillemets»", "« espacés »", "‚einfach‘", "it’s", "don‘t", "l´homme",
    "2 000", "3 500,5", "1 2", "50 %", "n° 5", "20 ºC", "10 cm", "Hello !", "Quoi ?", "Oui ;", "Note :",
    "(parenthesis )", "( open)", "word,\"quoted\"", "\"quoted\",", "\"end\".", "\"x...\" y", "...\"<tag",
    "–", "—", "…", "``tex''", "`tick'", "''double''", "´´acute´´", "tab\there", "cr\rhere",
    " nbsp ", "« fin »", "【括号】", "（全角）", "，", "。", "：", "；", "？", "！",
    "％", "０１２", "［x］", "〈y〉", "《z》", "「书名」", "『双』", "〜", "·", "″", "′", "•",
    "€5", "é", "zero​width", "soft­hyphen", "bom﻿", "bidi‮mark",
    "plain", "words", "and", "more", "text", ".", ",", "\"", "'", "  double  spaces ",
]


def normalization_sample():
    """200 lines (50 per language) and the Moses chain output for each."""
    rng = random.Random(7)
    moses = ROOT / "moses"
    chain = (
        f"perl {moses / 'replace-unicode-punctuation.perl'} | "
        f"perl {moses / 'normalize-punctuation.perl'} -l {{lang}} | "
        f"perl {moses / 'remove-non-printing-char.perl'}"
    )
    d = ROOT / "normalize"
    d.mkdir(parents=True, exist_ok=True)
    for lang in NORM_LANGS:
        lines = []
        while len(lines) < 50:
            n = rng.randint(1, 8)
            line = " ".join(rng.choice(NORM_PIECES) for _ in range(n))
            line = line.replace("\n", " ")
            if line.strip() == "":
                continue
            out = run(chain.format(lang=lang), line + "\n")
            twice = run(chain.format(lang=lang), out)
            # Lines the chain itself does not map to a fixed point are left out.
            if out == twice:
                lines.append(line)
        write_lines(d / f"sample.{lang}", lines)
        golden = run(chain.format(lang=lang), "".join(l + "\n" for l in lines))
        (d / f"golden.{lang}").write_bytes(golden.encode("utf-8"))


def run(cmd, text):
    return subprocess.run(
        cmd, shell=True, input=text.encode("utf-8"), capture_output=True, check=True
    ).stdout.decode("utf-8")


if __name__ == "__main__":
    bilingual50()
    tokenizer_goldens()
    bootstrap10()
    normalization_sample()
