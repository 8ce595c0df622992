"""Caption-style overlap metrics, following the usual coco-caption
conventions (clipped n-gram precision, LCS F-measure with beta=1.2,
TF-IDF n-gram similarity with a length gaussian, and a simplified
unigram-alignment METEOR without synonym tables).

All functions take tokenized sentences (lists of token strings); plain
strings are split on whitespace.  Corpus-level numbers elsewhere in the
package are means of these per-instance values.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Sequence

ROUGE_BETA = 1.2
CIDER_SIGMA = 6.0
CIDER_NGRAMS = 4
METEOR_RECALL_WEIGHT = 9.0
METEOR_PENALTY_WEIGHT = 0.5
METEOR_PENALTY_POWER = 3.0


def _tokens(sentence) -> list[str]:
    if isinstance(sentence, str):
        return sentence.split()
    return [str(t) for t in sentence]


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1))


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------


def bleu_n(candidate, references, n: int = 4) -> float:
    """Sentence BLEU with uniform weights over orders 1..n.

    Clipped modified precision per order, geometric mean, brevity
    penalty against the closest reference length (shorter one on ties).
    Zero when the candidate is empty or any order has no match.
    """
    if not 1 <= n <= 9:
        raise ValueError("n must be in [1, 9]")
    cand = _tokens(candidate)
    refs = [_tokens(r) for r in references]
    if not refs:
        raise ValueError("at least one reference required")
    if not cand:
        return 0.0

    log_sum = 0.0
    for k in range(1, n + 1):
        cand_counts = _ngrams(cand, k)
        total = sum(cand_counts.values())
        if total == 0:
            return 0.0
        max_ref: Counter = Counter()
        for ref in refs:
            for g, c in _ngrams(ref, k).items():
                if c > max_ref[g]:
                    max_ref[g] = c
        clipped = sum(min(c, max_ref[g]) for g, c in cand_counts.items())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total) / n

    c = len(cand)
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum)


# ---------------------------------------------------------------------------
# ROUGE-L
# ---------------------------------------------------------------------------


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate, references) -> float:
    """LCS F-measure with beta=1.2.

    Per caption-evaluation convention the maximum precision and maximum
    recall over the references are combined (not the per-reference F).
    """
    cand = _tokens(candidate)
    refs = [_tokens(r) for r in references]
    if not refs:
        raise ValueError("at least one reference required")
    if not cand or all(not r for r in refs):
        return 0.0
    prec_max = rec_max = 0.0
    for ref in refs:
        if not ref:
            continue
        lcs = _lcs_length(cand, ref)
        prec_max = max(prec_max, lcs / len(cand))
        rec_max = max(rec_max, lcs / len(ref))
    if prec_max == 0.0 or rec_max == 0.0:
        return 0.0
    b2 = ROUGE_BETA ** 2
    return (1 + b2) * prec_max * rec_max / (rec_max + b2 * prec_max)


# ---------------------------------------------------------------------------
# CIDEr-D
# ---------------------------------------------------------------------------


def _cider_vector(counts: Counter, doc_freq: dict, log_corpus: float):
    vec = [defaultdict(float) for _ in range(CIDER_NGRAMS)]
    norm = [0.0] * CIDER_NGRAMS
    for gram, tf in counts.items():
        k = len(gram) - 1
        idf = log_corpus - math.log(max(1.0, doc_freq.get(gram, 0.0)))
        vec[k][gram] = tf * idf
        norm[k] += vec[k][gram] ** 2
    return vec, [math.sqrt(v) for v in norm]


def _cider_sim(vec_c, norm_c, len_c, vec_r, norm_r, len_r):
    delta = float(len_c - len_r)
    gauss = math.exp(-(delta ** 2) / (2 * CIDER_SIGMA ** 2))
    vals = []
    for k in range(CIDER_NGRAMS):
        dot = sum(min(w, vec_r[k][g]) * vec_r[k][g] for g, w in vec_c[k].items())
        if norm_c[k] != 0 and norm_r[k] != 0:
            dot /= norm_c[k] * norm_r[k]
        vals.append(dot * gauss)
    return vals


def cider_d(candidates: Sequence, references_per_candidate: Sequence[Sequence]
            ) -> tuple[list[float], float]:
    """Corpus CIDEr-D: per-instance scores and their mean.

    TF-IDF vectors over 1..4-grams (document frequency counted over the
    evaluated corpus, each instance's reference set counting once),
    clipped similarity normalized by vector norms, a gaussian penalty on
    the length difference (sigma=6), averaged over orders and
    references, scaled by 10.  Single-instance corpora are permitted but
    degenerate: every in-reference n-gram then has zero IDF.
    """
    if len(candidates) != len(references_per_candidate):
        raise ValueError("candidates and references must align")
    if not candidates:
        raise ValueError("empty corpus")
    cand_tokens = [_tokens(c) for c in candidates]
    ref_tokens = [[_tokens(r) for r in refs] for refs in references_per_candidate]
    if any(not refs for refs in ref_tokens):
        raise ValueError("every instance needs at least one reference")

    doc_freq: dict = defaultdict(float)
    for refs in ref_tokens:
        seen = set()
        for toks in refs:
            seen.update(_count_all(toks).keys())
        for gram in seen:
            doc_freq[gram] += 1.0
    log_corpus = math.log(float(len(ref_tokens)))

    scores = []
    for cand, refs in zip(cand_tokens, ref_tokens):
        vec_c, norm_c = _cider_vector(_count_all(cand), doc_freq, log_corpus)
        len_c = max(len(cand) - 1, 0)
        acc = [0.0] * CIDER_NGRAMS
        for ref in refs:
            vec_r, norm_r = _cider_vector(_count_all(ref), doc_freq, log_corpus)
            len_r = max(len(ref) - 1, 0)
            sims = _cider_sim(vec_c, norm_c, len_c, vec_r, norm_r, len_r)
            acc = [a + s for a, s in zip(acc, sims)]
        scores.append(10.0 * (sum(acc) / CIDER_NGRAMS) / len(refs))
    return scores, sum(scores) / len(scores)


def _count_all(tokens: list[str]) -> Counter:
    counts: Counter = Counter()
    for k in range(1, CIDER_NGRAMS + 1):
        counts.update(_ngrams(tokens, k))
    return counts


# ---------------------------------------------------------------------------
# simplified METEOR
# ---------------------------------------------------------------------------


def _stem(token: str) -> str:
    for suffix in ("ing", "ed", "es", "s"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def _align(cand: list[str], ref: list[str]) -> list[tuple[int, int]]:
    """Two-stage greedy alignment: exact matches first, then stems.

    Each stage scans candidate positions left to right and pairs with
    the leftmost unmatched reference token.
    """
    pairs: list[tuple[int, int]] = []
    used_c = [False] * len(cand)
    used_r = [False] * len(ref)
    for key in (lambda t: t, _stem):
        for i, ct in enumerate(cand):
            if used_c[i]:
                continue
            want = key(ct)
            for j, rt in enumerate(ref):
                if not used_r[j] and key(rt) == want:
                    pairs.append((i, j))
                    used_c[i] = used_r[j] = True
                    break
    return sorted(pairs)


def _chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor_simple(candidate, references) -> float:
    """Unigram-alignment METEOR without synonym matching.

    Harmonic mean with recall weighted 9:1, fragmentation penalty
    0.5 * (chunks / matches)^3, maximum over references.  On identical
    sentences of m tokens the score is 1 - 0.5 / m^3 (one chunk).
    """
    cand = _tokens(candidate)
    refs = [_tokens(r) for r in references]
    if not refs:
        raise ValueError("at least one reference required")
    if not cand:
        return 0.0
    best = 0.0
    for ref in refs:
        if not ref:
            continue
        pairs = _align(cand, ref)
        m = len(pairs)
        if m == 0:
            continue
        prec = m / len(cand)
        rec = m / len(ref)
        fmean = ((1 + METEOR_RECALL_WEIGHT) * prec * rec
                 / (rec + METEOR_RECALL_WEIGHT * prec))
        penalty = METEOR_PENALTY_WEIGHT * (_chunks(pairs) / m) ** METEOR_PENALTY_POWER
        best = max(best, fmean * (1.0 - penalty))
    return best


def exact_match(candidate, reference) -> float:
    """1.0 when the token sequences are identical, else 0.0."""
    return 1.0 if _tokens(candidate) == _tokens(reference) else 0.0


def sentence_scores(candidate, references) -> dict[str, float]:
    """All sentence-level metrics for one candidate."""
    out = {f"bleu_{k}": bleu_n(candidate, references, k) for k in range(1, 5)}
    out["rouge_l"] = rouge_l(candidate, references)
    out["meteor_simple"] = meteor_simple(candidate, references)
    return out
