"""Semantic audio-relatedness estimator and its weak-label pipeline.

Labels come from keyword sensing: keyword-positive questions get label 1
and keyword-negative ones label 0.  Two augmentations force the model
past bag-of-keywords shortcuts: each positive also yields a word-order
shuffled copy labeled 0, and a sampled half of the negatives yield a
copy with one token swapped for a random audio keyword, labeled 0.

The estimator itself is a small bidirectional attention encoder over
[cls ; question tokens] with a sigmoid scalar head, trained with
squared error, inverse-class-frequency example weights and weight
decay.  Scores are clamped strictly inside (0, 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
import torch.nn as nn
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.metrics import roc_auc_score

from hear.gating import RelatednessDecision
from hear.keywords import DEFAULT_KEYWORDS, KeywordSet
from hear.model import EncoderLayer
from hear.vocab import Vocabulary, tokenize

_LOGIT_CLAMP = 30.0  # sigmoid(+-30) stays strictly inside (0, 1) in float64


@dataclass
class LabeledQuestion:
    tokens: list[str]
    label: float
    provenance: str  # "keyword" | "shuffle" | "swap"

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def _shuffled_copy(tokens: list[str], rng: np.random.Generator) -> list[str] | None:
    """A non-identity permutation of the tokens, or None if none exists."""
    if len(set(tokens)) < 2:
        return None
    for _ in range(16):
        perm = list(rng.permutation(len(tokens)))
        shuffled = [tokens[i] for i in perm]
        if shuffled != tokens:
            return shuffled
    return None


def build_estimator_labels(
    questions: Sequence[Sequence[str] | str],
    keywords: KeywordSet = DEFAULT_KEYWORDS,
    swap_fraction: float = 0.5,
    seed: int = 0,
) -> list[LabeledQuestion]:
    """Weakly labeled training set from raw questions.

    Deterministic per seed: the output multiset is reproducible.
    """
    if not questions:
        raise ValueError("question set is empty")
    rng = np.random.Generator(np.random.PCG64(seed))
    labeled: list[LabeledQuestion] = []
    negatives: list[list[str]] = []
    for q in questions:
        toks = tokenize(q) if isinstance(q, str) else [t.lower() for t in q]
        if not toks:
            continue
        if keywords.contains(toks):
            labeled.append(LabeledQuestion(toks, 1.0, "keyword"))
            shuffled = _shuffled_copy(toks, rng)
            if shuffled is not None:
                labeled.append(LabeledQuestion(shuffled, 0.0, "shuffle"))
        else:
            labeled.append(LabeledQuestion(toks, 0.0, "keyword"))
            negatives.append(toks)
    for toks in negatives:
        if rng.random() < swap_fraction:
            swapped = list(toks)
            pos = int(rng.integers(len(swapped)))
            swapped[pos] = keywords.base_keywords[
                int(rng.integers(len(keywords.base_keywords)))]
            labeled.append(LabeledQuestion(swapped, 0.0, "swap"))
    return labeled


def save_labeled_set(labeled: Sequence[LabeledQuestion], path: str | Path) -> None:
    """Line-delimited export: one {question, label, provenance} per line."""
    with open(path, "w") as fh:
        for lq in labeled:
            fh.write(json.dumps({"question": lq.text, "label": lq.label,
                                 "provenance": lq.provenance}) + "\n")


def load_labeled_set(path: str | Path) -> list[LabeledQuestion]:
    out = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        out.append(LabeledQuestion(tokenize(row["question"]),
                                   float(row["label"]), row["provenance"]))
    return out


class _RelatednessNet(nn.Module):
    """Bidirectional encoder with a classification token and scalar head."""

    def __init__(self, vocab_size: int, d_model: int, n_heads: int,
                 n_layers: int, max_len: int):
        super().__init__()
        self.tok_emb = nn.Embedding(vocab_size, d_model)
        self.pos_emb = nn.Embedding(max_len, d_model)
        self.norm = nn.LayerNorm(d_model)
        self.layers = nn.ModuleList(
            EncoderLayer(d_model, n_heads, 4 * d_model) for _ in range(n_layers))
        self.head = nn.Linear(d_model, 1)
        self.to(torch.float64)

    def reset_parameters(self, seed: int) -> None:
        gen = torch.Generator().manual_seed(seed)
        for name, p in self.named_parameters():
            with torch.no_grad():
                if p.dim() >= 2:
                    bound = 1.0 / np.sqrt(p.shape[1])
                    p.uniform_(-bound, bound, generator=gen)
                elif "weight" in name:
                    p.fill_(1.0)
                else:
                    p.zero_()

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        T = ids.shape[1]
        x = self.tok_emb(ids) + self.pos_emb(torch.arange(T)).unsqueeze(0)
        x = self.norm(x)
        attn = mask.unsqueeze(1).expand(-1, T, -1)
        for layer in self.layers:
            x = layer(x, attn)
        return self.head(x[:, 0, :]).squeeze(-1)  # logit at the cls position


class AudioRelatednessEstimator(BaseEstimator):
    """Scores a question's audio-relatedness in (0, 1).

    sklearn-style: ``fit(X, y)`` on question texts (or token lists) and
    float labels, then ``predict_proba`` / ``score_questions``.  A
    held-out slice is carved off during fit and its ROC-AUC is stored on
    ``val_auc_``.
    """

    def __init__(self, d_model: int = 32, n_heads: int = 2, n_layers: int = 2,
                 max_len: int = 48, epochs: int = 40, batch_size: int = 32,
                 lr: float = 2e-3, weight_decay: float = 0.01,
                 val_fraction: float = 0.2, seed: int = 0):
        self.d_model = d_model
        self.n_heads = n_heads
        self.n_layers = n_layers
        self.max_len = max_len
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.weight_decay = weight_decay
        self.val_fraction = val_fraction
        self.seed = seed

    # ------------------------------------------------------------------

    def _encode(self, tokens: list[str]) -> list[int]:
        ids = [self.vocab_.cls_id] + self.vocab_.encode_tokens(tokens)
        return ids[: self.max_len]

    def _batch(self, token_lists: list[list[str]]):
        encoded = [self._encode(t) for t in token_lists]
        width = max(len(e) for e in encoded)
        ids = torch.full((len(encoded), width), self.vocab_.pad_id, dtype=torch.long)
        mask = torch.zeros((len(encoded), width), dtype=torch.bool)
        for i, e in enumerate(encoded):
            ids[i, : len(e)] = torch.tensor(e, dtype=torch.long)
            mask[i, : len(e)] = True
        return ids, mask

    @staticmethod
    def _tokens_of(x) -> list[str]:
        return tokenize(x) if isinstance(x, str) else [str(t).lower() for t in x]

    def fit(self, X, y=None):
        """Train on questions X with labels y (or a LabeledQuestion list)."""
        if y is None:
            labeled = list(X)
            tokens = [lq.tokens for lq in labeled]
            labels = np.array([lq.label for lq in labeled], dtype=np.float64)
        else:
            tokens = [self._tokens_of(x) for x in X]
            labels = np.asarray(y, dtype=np.float64)
        if len(tokens) < 2:
            raise ValueError("need at least two labeled questions")
        if len(set(labels.tolist())) < 2:
            raise ValueError("labels contain a single class; cannot train")

        self.vocab_ = Vocabulary()
        for toks in tokens:
            for t in toks:
                self.vocab_.add(t)

        rng = np.random.Generator(np.random.PCG64(self.seed))
        order = rng.permutation(len(tokens))
        n_val = int(round(self.val_fraction * len(tokens)))
        # keep both classes in the training slice
        while n_val and len(set(labels[order[n_val:]].tolist())) < 2:
            n_val -= 1
        val_idx, train_idx = order[:n_val], order[n_val:]

        self.net_ = _RelatednessNet(len(self.vocab_), self.d_model, self.n_heads,
                                    self.n_layers, self.max_len)
        self.net_.reset_parameters(self.seed)
        opt = torch.optim.AdamW(self.net_.parameters(), lr=self.lr,
                                weight_decay=self.weight_decay)

        # inverse-class-frequency example weights counter the label imbalance
        n_pos = max(1, int((labels[train_idx] > 0.5).sum()))
        n_neg = max(1, len(train_idx) - n_pos)
        w_pos, w_neg = len(train_idx) / (2 * n_pos), len(train_idx) / (2 * n_neg)

        torch_rng = np.random.Generator(np.random.PCG64(self.seed + 1))
        for _ in range(self.epochs):
            perm = torch_rng.permutation(train_idx)
            for start in range(0, len(perm), self.batch_size):
                idx = perm[start: start + self.batch_size]
                ids, mask = self._batch([tokens[i] for i in idx])
                target = torch.tensor(labels[idx], dtype=torch.float64)
                weight = torch.where(target > 0.5,
                                     torch.tensor(w_pos, dtype=torch.float64),
                                     torch.tensor(w_neg, dtype=torch.float64))
                score = torch.sigmoid(self.net_(ids, mask))
                loss = (weight * (target - score) ** 2).mean()
                opt.zero_grad()
                loss.backward()
                opt.step()

        self.train_index_ = train_idx
        self.val_index_ = val_idx
        self.val_auc_ = float("nan")
        if len(val_idx) >= 2 and len(set(labels[val_idx].tolist())) == 2:
            val_scores = self._scores([tokens[i] for i in val_idx])
            self.val_auc_ = float(roc_auc_score(labels[val_idx] > 0.5, val_scores))
        return self

    def _check_fitted(self):
        if not hasattr(self, "net_"):
            raise NotFittedError("estimator has not been fitted")

    def _scores(self, token_lists: list[list[str]]) -> np.ndarray:
        self._check_fitted()
        with torch.no_grad():
            ids, mask = self._batch(token_lists)
            logits = self.net_(ids, mask).clamp(-_LOGIT_CLAMP, _LOGIT_CLAMP)
            return torch.sigmoid(logits).numpy()

    def score_questions(self, X) -> np.ndarray:
        """Relatedness scores r strictly inside (0, 1), one per question."""
        return self._scores([self._tokens_of(x) for x in X])

    def score_question(self, question) -> float:
        return float(self.score_questions([question])[0])

    def predict_proba(self, X) -> np.ndarray:
        r = self.score_questions(X)
        return np.stack([1.0 - r, r], axis=1)

    def predict(self, X) -> np.ndarray:
        return (self.score_questions(X) > 0.5).astype(int)

    # ------------------------------------------------------------------

    def save(self, path: str | Path) -> None:
        self._check_fitted()
        arrays = {f"param__{k}": v.detach().numpy()
                  for k, v in self.net_.state_dict().items()}
        meta = {"format": "hear-estimator", "version": 1,
                "params": self.get_params(), "vocab": self.vocab_.to_json()}
        np.savez(path, __meta__=np.array(json.dumps(meta)), **arrays)

    @classmethod
    def load(cls, path: str | Path) -> "AudioRelatednessEstimator":
        with np.load(path, allow_pickle=False) as payload:
            meta = json.loads(str(payload["__meta__"]))
            if meta.get("format") != "hear-estimator":
                raise ValueError(f"{path}: not an estimator checkpoint")
            est = cls(**meta["params"])
            est.vocab_ = Vocabulary.from_json(meta["vocab"])
            est.net_ = _RelatednessNet(len(est.vocab_), est.d_model, est.n_heads,
                                       est.n_layers, est.max_len)
            state = {k[len("param__"):]: torch.tensor(payload[k])
                     for k in payload.files if k.startswith("param__")}
            est.net_.load_state_dict(state)
            est.val_auc_ = float("nan")
        return est


def train_estimator(
    labeled: Sequence[LabeledQuestion],
    config: dict | None = None,
) -> tuple[AudioRelatednessEstimator, float]:
    """Fit an estimator on a weakly labeled set; returns it with held-out AUC."""
    labeled = list(labeled)
    if not labeled:
        raise ValueError("labeled set is empty")
    est = AudioRelatednessEstimator(**(config or {}))
    est.fit(labeled)
    return est, est.val_auc_


def estimate_relatedness(
    question,
    estimator: AudioRelatednessEstimator | None = None,
    keywords: KeywordSet = DEFAULT_KEYWORDS,
    mode: str = "estimator",
) -> RelatednessDecision:
    """Gating verdict for one question under the configured mode."""
    tokens = tokenize(question) if isinstance(question, str) else list(question)
    hit = keywords.contains(tokens)
    if mode == "none":
        return RelatednessDecision(keyword_hit=hit, score=None, mode="none")
    if mode == "keyword":
        return RelatednessDecision(
            keyword_hit=hit, score=None,
            mode="keyword-gate" if hit else "none")
    if mode in ("estimator", "both"):
        if mode == "both" and hit:
            return RelatednessDecision(keyword_hit=True, score=None,
                                       mode="keyword-gate")
        if estimator is None:
            raise ValueError(f"mode {mode!r} requires a trained estimator")
        r = estimator.score_question(tokens)
        return RelatednessDecision(keyword_hit=hit, score=r,
                                   mode="estimator-calibrate")
    raise ValueError(f"unknown gating mode {mode!r}")
