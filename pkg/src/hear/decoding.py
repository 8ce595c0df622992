"""Length-normalized beam search over any step function.

A step function maps a batch of prefixes (each starting with the begin
token) to a (batch, vocab) array of next-token log-probabilities.  The
search keeps the ``beam_size`` best continuations by cumulative
log-probability, moves hypotheses that emit the end token to the
finished pool, and finally ranks everything by

    score = (sum of log-probs) / (emitted length ** length_penalty)

with ties broken lexicographically by emitted token ids, so decoding is
fully deterministic.  With ``beam_size=1`` the search reduces exactly to
greedy argmax decoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import torch

from hear.model import DlmModel

StepFn = Callable[[Sequence[tuple[int, ...]]], np.ndarray]


@dataclass
class DecodeConfig:
    beam_size: int = 5
    max_len: int = 20
    length_penalty: float = 0.3
    eos_id: int = 2

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.length_penalty < 0:
            raise ValueError("length_penalty must be >= 0")


def _normalized(logprob: float, emitted_len: int, penalty: float) -> float:
    return logprob / (emitted_len ** penalty) if emitted_len else float("-inf")


def beam_decode(step_fn: StepFn, bos_id: int, cfg: DecodeConfig) -> list[int]:
    """Best emitted token sequence (end token stripped), length <= max_len."""
    active: list[tuple[tuple[int, ...], float]] = [((bos_id,), 0.0)]
    finished: list[tuple[tuple[int, ...], float]] = []

    for _ in range(cfg.max_len):
        if not active:
            break
        logprobs = np.asarray(step_fn([seq for seq, _ in active]))
        candidates = []
        for (seq, lp), row in zip(active, logprobs):
            for tok, tok_lp in enumerate(row):
                candidates.append((seq + (tok,), lp + float(tok_lp)))
        candidates.sort(key=lambda c: (-c[1], c[0][1:]))
        active = []
        for seq, lp in candidates[: cfg.beam_size]:
            if seq[-1] == cfg.eos_id:
                finished.append((seq, lp))
            else:
                active.append((seq, lp))
    finished.extend(active)

    def rank(entry):
        seq, lp = entry
        emitted = seq[1:]
        return (-_normalized(lp, len(emitted), cfg.length_penalty), emitted)

    best_seq, _ = min(finished, key=rank)
    emitted = list(best_seq[1:])
    if emitted and emitted[-1] == cfg.eos_id:
        emitted.pop()
    return emitted


def greedy_decode(step_fn: StepFn, bos_id: int, cfg: DecodeConfig) -> list[int]:
    """Argmax decoding (smallest token id on ties), for reference/testing."""
    seq: tuple[int, ...] = (bos_id,)
    for _ in range(cfg.max_len):
        row = np.asarray(step_fn([seq]))[0]
        tok = int(np.flatnonzero(row == row.max())[0])
        if tok == cfg.eos_id:
            break
        seq = seq + (tok,)
    return list(seq[1:])


def model_step_fn(model: DlmModel, enc_out: torch.Tensor,
                  enc_mask: torch.Tensor) -> StepFn:
    """Step function over a frozen model and one encoded input."""

    def step(prefixes: Sequence[tuple[int, ...]]) -> np.ndarray:
        width = max(len(p) for p in prefixes)
        pad = model.config.pad_id
        ans_in = torch.full((len(prefixes), width), pad, dtype=torch.long)
        mask = torch.zeros((len(prefixes), width), dtype=torch.bool)
        last = []
        for i, p in enumerate(prefixes):
            ans_in[i, : len(p)] = torch.tensor(p, dtype=torch.long)
            mask[i, : len(p)] = True
            last.append(len(p) - 1)
        with torch.no_grad():
            b = len(prefixes)
            out = enc_out.expand(b, -1, -1)
            msk = enc_mask.expand(b, -1)
            logits = model.decode_logits(out, msk, ans_in, mask)
            rows = logits[torch.arange(b), torch.tensor(last)]
            return torch.log_softmax(rows, dim=-1).numpy()

    return step


def decode_answer(model: DlmModel, fused: torch.Tensor, instance,
                  cfg: DecodeConfig | None = None) -> list[int]:
    """Beam-decode an answer for one instance given its fused A/V input."""
    cfg = cfg or DecodeConfig(eos_id=model.config.eos_id)
    enc_out, enc_mask = model.encode_instance(fused, instance)
    return beam_decode(model_step_fn(model, enc_out, enc_mask),
                       model.config.bos_id, cfg)
