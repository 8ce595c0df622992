"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written from first principles (dense
vectors, exhaustive enumeration, central differences) and never calls
the code paths under test.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np
import torch


# ---------------------------------------------------------------------------
# finite-difference gradient harness
# ---------------------------------------------------------------------------


def flatten_params(model) -> torch.Tensor:
    return torch.cat([p.detach().reshape(-1) for p in model.parameters()])


def set_flat_params(model, flat: torch.Tensor) -> None:
    offset = 0
    with torch.no_grad():
        for p in model.parameters():
            n = p.numel()
            p.copy_(flat[offset: offset + n].reshape(p.shape))
            offset += n


def analytic_grad(model, loss_fn) -> tuple[float, torch.Tensor]:
    model.zero_grad()
    loss = loss_fn()
    loss.backward()
    grads = []
    for p in model.parameters():
        grads.append(torch.zeros_like(p).reshape(-1) if p.grad is None
                     else p.grad.detach().reshape(-1))
    return float(loss.detach()), torch.cat(grads)


def finite_difference_grad(model, loss_fn, h: float = 1e-6) -> torch.Tensor:
    """Central differences over every parameter coordinate."""
    base = flatten_params(model).clone()
    grad = torch.zeros_like(base)
    for i in range(base.numel()):
        probe = base.clone()
        probe[i] = base[i] + h
        set_flat_params(model, probe)
        with torch.no_grad():
            up = float(loss_fn())
        probe[i] = base[i] - h
        set_flat_params(model, probe)
        with torch.no_grad():
            down = float(loss_fn())
        grad[i] = (up - down) / (2 * h)
    set_flat_params(model, base)
    return grad


def relative_grad_error(g_analytic: torch.Tensor, g_fd: torch.Tensor) -> float:
    denom = max(float(g_analytic.norm()), float(g_fd.norm()), 1e-12)
    return float((g_analytic - g_fd).norm()) / denom


# ---------------------------------------------------------------------------
# dense CIDEr-D oracle
# ---------------------------------------------------------------------------


def _grams(tokens, n):
    return [tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1)]


def cider_d_oracle(candidates, references, sigma=6.0, max_n=4):
    """CIDEr-D via dense numpy vectors over the global n-gram vocabulary."""
    cands = [c.split() if isinstance(c, str) else list(c) for c in candidates]
    refss = [[r.split() if isinstance(r, str) else list(r) for r in refs]
             for refs in references]
    n_docs = len(refss)

    scores = []
    for order in range(1, max_n + 1):
        vocab = sorted({g for refs in refss for r in refs for g in _grams(r, order)}
                       | {g for c in cands for g in _grams(c, order)})
        index = {g: i for i, g in enumerate(vocab)}
        df = np.zeros(len(vocab))
        for refs in refss:
            seen = {g for r in refs for g in _grams(r, order)}
            for g in seen:
                df[index[g]] += 1.0
        idf = math.log(n_docs) - np.log(np.maximum(1.0, df))

        per_doc = []
        for cand, refs in zip(cands, refss):
            cv = np.zeros(len(vocab))
            for g in _grams(cand, order):
                cv[index[g]] += 1.0
            cv = cv * idf
            len_c = max(len(cand) - 1, 0)
            total = 0.0
            for r in refs:
                rv = np.zeros(len(vocab))
                for g in _grams(r, order):
                    rv[index[g]] += 1.0
                rv = rv * idf
                len_r = max(len(r) - 1, 0)
                dot = float(np.minimum(cv, rv) @ rv)
                norm = float(np.linalg.norm(cv) * np.linalg.norm(rv))
                sim = dot / norm if norm != 0 else 0.0
                sim *= math.exp(-((len_c - len_r) ** 2) / (2 * sigma ** 2))
                total += sim
            per_doc.append(total / len(refs))
        scores.append(per_doc)
    arr = np.array(scores)  # (orders, docs)
    return list(10.0 * arr.mean(axis=0))


# ---------------------------------------------------------------------------
# simplified-METEOR oracle
# ---------------------------------------------------------------------------


def _stem_oracle(token):
    for suf in ("ing", "ed", "es", "s"):
        if token.endswith(suf) and len(token) - len(suf) >= 3:
            return token[: -len(suf)]
    return token


def meteor_simple_oracle(candidate, references):
    """Same documented algorithm, structured as an explicit state machine."""
    cand = candidate.split() if isinstance(candidate, str) else list(candidate)
    if not cand:
        return 0.0
    best = 0.0
    for reference in references:
        ref = reference.split() if isinstance(reference, str) else list(reference)
        if not ref:
            continue
        matched_ref = set()
        pairs = {}
        for stage in ("exact", "stem"):
            for i, tok in enumerate(cand):
                if i in pairs:
                    continue
                for j, rtok in enumerate(ref):
                    if j in matched_ref:
                        continue
                    same = tok == rtok if stage == "exact" \
                        else _stem_oracle(tok) == _stem_oracle(rtok)
                    if same:
                        pairs[i] = j
                        matched_ref.add(j)
                        break
        m = len(pairs)
        if m == 0:
            continue
        ordered = sorted(pairs.items())
        chunks = 1
        for (i0, j0), (i1, j1) in zip(ordered, ordered[1:]):
            if i1 != i0 + 1 or j1 != j0 + 1:
                chunks += 1
        p = m / len(cand)
        r = m / len(ref)
        fmean = 10 * p * r / (r + 9 * p)
        penalty = 0.5 * (chunks / m) ** 3
        best = max(best, fmean * (1 - penalty))
    return best


# ---------------------------------------------------------------------------
# sentence BLEU / ROUGE-L oracles (brute force, for cross-checking the
# hand-frozen values)
# ---------------------------------------------------------------------------


def bleu_oracle(candidate, references, n):
    cand = candidate.split() if isinstance(candidate, str) else list(candidate)
    refs = [r.split() if isinstance(r, str) else list(r) for r in references]
    if not cand:
        return 0.0
    precisions = []
    for k in range(1, n + 1):
        c_grams = _grams(cand, k)
        if not c_grams:
            return 0.0
        hits = 0
        counted = Counter()
        for g in c_grams:
            limit = max((Counter(_grams(r, k))[g] for r in refs), default=0)
            if counted[g] < limit:
                hits += 1
                counted[g] += 1
        if hits == 0:
            return 0.0
        precisions.append(hits / len(c_grams))
    c = len(cand)
    best = None
    for r in refs:
        key = (abs(len(r) - c), len(r))
        if best is None or key < best:
            best = key
    r_len = best[1]
    bp = 1.0 if c > r_len else math.exp(1 - r_len / c)
    geo = math.exp(sum(math.log(p) for p in precisions) / n)
    return bp * geo


def rouge_l_oracle(candidate, references):
    cand = candidate.split() if isinstance(candidate, str) else list(candidate)
    refs = [r.split() if isinstance(r, str) else list(r) for r in references]

    def lcs(a, b):
        table = np.zeros((len(a) + 1, len(b) + 1), dtype=int)
        for i in range(1, len(a) + 1):
            for j in range(1, len(b) + 1):
                table[i, j] = (table[i - 1, j - 1] + 1 if a[i - 1] == b[j - 1]
                               else max(table[i - 1, j], table[i, j - 1]))
        return int(table[-1, -1])

    if not cand:
        return 0.0
    pmax = rmax = 0.0
    for ref in refs:
        if not ref:
            continue
        common = lcs(cand, ref)
        pmax = max(pmax, common / len(cand))
        rmax = max(rmax, common / len(ref))
    if pmax == 0 or rmax == 0:
        return 0.0
    beta2 = 1.2 ** 2
    return (1 + beta2) * pmax * rmax / (rmax + beta2 * pmax)


# ---------------------------------------------------------------------------
# exhaustive beam-search oracle over a table model
# ---------------------------------------------------------------------------


class TableModel:
    """Fixed conditional next-token distributions over a tiny vocabulary.

    ``table`` maps a prefix tuple (starting with bos) to a probability
    vector over the vocab; missing prefixes fall back to uniform.
    """

    def __init__(self, vocab_size, table, bos_id=1):
        self.vocab_size = vocab_size
        self.table = {k: np.asarray(v, dtype=float) for k, v in table.items()}
        self.bos_id = bos_id

    def logprobs(self, prefix):
        probs = self.table.get(tuple(prefix))
        if probs is None:
            probs = np.full(self.vocab_size, 1.0 / self.vocab_size)
        return np.log(probs)

    def step_fn(self, prefixes):
        return np.stack([self.logprobs(p) for p in prefixes])


def enumerate_best(model: TableModel, eos_id, max_len, length_penalty):
    """Score every token sequence of length <= max_len; return the best.

    A sequence is terminal when it ends with eos or reaches max_len.
    Scores use the same normalization as the decoder:
    sum-logprob / emitted_length ** penalty, lexicographic tie-break.
    """
    best = None
    vocab = range(model.vocab_size)
    for length in range(1, max_len + 1):
        for seq in itertools.product(vocab, repeat=length):
            if eos_id in seq[:-1]:
                continue  # eos only terminates a sequence
            if seq[-1] != eos_id and length < max_len:
                continue  # non-eos sequences are only terminal at max_len
            prefix = (model.bos_id,)
            lp = 0.0
            for tok in seq:
                lp += model.logprobs(prefix)[tok]
                prefix = prefix + (tok,)
            emitted = len(seq)
            score = lp / (emitted ** length_penalty)
            stripped = seq[:-1] if seq[-1] == eos_id else seq
            key = (-score, seq)
            if best is None or key < best[0]:
                best = (key, list(stripped))
    return best[1]
