"""Corpus evaluation: decoding, bucketed caption metrics and analyses.

Every instance is decoded with the gating mode under evaluation, scored
against its reference answer, and aggregated overall plus per bucket:

* ``keyword``: questions with an audio-keyword hit,
* ``estimator``: questions the relatedness score puts above 0.7,
* ``audio_gt``: ground-truth audio-related questions, when labels exist.

Bucket values are means of per-instance scores, so every bucket total is
consistent with the overall mean.  An optional ablation re-decodes the
corpus with the audio stream zeroed to expose how much of the answer
quality actually came from listening.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from hear.data import Corpus, DialogueInstance
from hear.decoding import DecodeConfig, beam_decode, model_step_fn
from hear.estimator import AudioRelatednessEstimator, estimate_relatedness
from hear.features import FeatureTrack
from hear.gating import ESTIMATOR_BUCKET_THRESHOLD, gate_streams
from hear.keywords import DEFAULT_KEYWORDS, KeywordSet
from hear.metrics import cider_d, exact_match, sentence_scores
from hear.model import DlmModel
from hear.synth import QuestionLabel

METRIC_KEYS = ("bleu_1", "bleu_2", "bleu_3", "bleu_4", "rouge_l",
               "meteor_simple", "cider_d", "exact_match")


@dataclass
class EvalReport:
    overall: dict[str, float]
    buckets: dict[str, dict]
    per_instance: list[dict]
    meta: dict = field(default_factory=dict)

    def to_json(self, path: str | Path | None = None) -> str:
        payload = json.dumps({
            "overall": self.overall, "buckets": self.buckets,
            "per_instance": self.per_instance, "meta": self.meta}, indent=1)
        if path is not None:
            Path(path).write_text(payload)
        return payload


def decode_instances(
    model: DlmModel,
    corpus: Corpus,
    instances: Sequence[DialogueInstance],
    estimator: AudioRelatednessEstimator | None = None,
    sal_mode: str = "estimator",
    keywords: KeywordSet = DEFAULT_KEYWORDS,
    beam_size: int = 5,
    max_len: int = 20,
    length_penalty: float = 0.3,
    zero_audio: bool = False,
) -> list[dict]:
    """Beam-decode each instance; returns rows with text and the decision."""
    cfg = DecodeConfig(beam_size=beam_size, max_len=max_len,
                       length_penalty=length_penalty,
                       eos_id=model.config.eos_id)
    rows = []
    decision_cache: dict[tuple, object] = {}
    for inst in instances:
        track = corpus.track_for(inst.clip_id)
        if zero_audio:
            track = FeatureTrack(video=track.video,
                                 audio=np.zeros_like(track.audio))
        key = tuple(inst.question)
        if key not in decision_cache:
            q_tokens = corpus.vocab.decode_tokens(inst.question)
            decision_cache[key] = estimate_relatedness(
                q_tokens, estimator=estimator, keywords=keywords, mode=sal_mode)
        decision = decision_cache[key]
        audio, video = gate_streams(track, decision)
        with torch.no_grad():
            fused = model.embed_av(audio, video)
            enc_out, enc_mask = model.encode_instance(fused, inst)
            ids = beam_decode(model_step_fn(model, enc_out, enc_mask),
                              model.config.bos_id, cfg)
        rows.append({
            "clip_id": inst.clip_id,
            "round": inst.round,
            "question": " ".join(corpus.vocab.decode_tokens(inst.question)),
            "candidate": corpus.vocab.decode(ids),
            "reference": " ".join(corpus.vocab.decode_tokens(inst.answer)),
            "keyword_hit": decision.keyword_hit,
            "score": decision.score,
            "mode": decision.mode,
        })
    return rows


def _aggregate(rows: list[dict]) -> dict[str, float]:
    agg = {k: float(np.mean([r[k] for r in rows])) if rows else 0.0
           for k in METRIC_KEYS}
    agg["count"] = len(rows)
    return agg


def evaluate(
    model: DlmModel,
    corpus: Corpus,
    estimator: AudioRelatednessEstimator | None = None,
    instances: Sequence[DialogueInstance] | None = None,
    labels: dict[tuple[str, int], QuestionLabel] | None = None,
    sal_mode: str = "estimator",
    keywords: KeywordSet = DEFAULT_KEYWORDS,
    beam_size: int = 5,
    max_len: int = 20,
    length_penalty: float = 0.3,
    audio_ablation: bool = False,
) -> EvalReport:
    """Decode and score a corpus, overall and per audio-question bucket."""
    instances = list(corpus.instances if instances is None else instances)
    if not instances:
        raise ValueError("no instances to evaluate")
    decoded = decode_instances(
        model, corpus, instances, estimator=estimator, sal_mode=sal_mode,
        keywords=keywords, beam_size=beam_size, max_len=max_len,
        length_penalty=length_penalty)

    per_cider, _ = cider_d([r["candidate"] for r in decoded],
                           [[r["reference"]] for r in decoded])
    for row, cid in zip(decoded, per_cider):
        row.update(sentence_scores(row["candidate"], [row["reference"]]))
        row["cider_d"] = cid
        row["exact_match"] = exact_match(row["candidate"], row["reference"])

    buckets: dict[str, dict] = {
        "all": _aggregate(decoded),
        "keyword": _aggregate([r for r in decoded if r["keyword_hit"]]),
        "non_keyword": _aggregate([r for r in decoded if not r["keyword_hit"]]),
    }
    if any(r["score"] is not None for r in decoded):
        buckets["estimator"] = _aggregate(
            [r for r in decoded
             if r["score"] is not None and r["score"] > ESTIMATOR_BUCKET_THRESHOLD])
    if labels:
        gt_rows, other = [], []
        by_kind: dict[str, list[dict]] = {}
        for inst, row in zip(instances, decoded):
            lab = labels.get((inst.clip_id, inst.round))
            (gt_rows if lab is not None and lab.audio_related else other).append(row)
            if lab is not None:
                by_kind.setdefault(lab.kind, []).append(row)
        buckets["audio_gt"] = _aggregate(gt_rows)
        buckets["non_audio_gt"] = _aggregate(other)
        for kind, rows in sorted(by_kind.items()):
            buckets[f"kind_{kind}"] = _aggregate(rows)

    meta = {"sal_mode": sal_mode, "beam_size": beam_size, "max_len": max_len,
            "length_penalty": length_penalty,
            "estimator_threshold": ESTIMATOR_BUCKET_THRESHOLD,
            "single_instance_corpus": len(decoded) == 1}

    if audio_ablation:
        muted = decode_instances(
            model, corpus, instances, estimator=estimator, sal_mode=sal_mode,
            keywords=keywords, beam_size=beam_size, max_len=max_len,
            length_penalty=length_penalty, zero_audio=True)
        m_cider, _ = cider_d([r["candidate"] for r in muted],
                             [[r["reference"]] for r in muted])
        for row, cid in zip(muted, m_cider):
            row.update(sentence_scores(row["candidate"], [row["reference"]]))
            row["cider_d"] = cid
            row["exact_match"] = exact_match(row["candidate"], row["reference"])
        buckets["all_no_audio"] = _aggregate(muted)
        changed = sum(1 for a, b in zip(decoded, muted)
                      if a["candidate"] != b["candidate"])
        meta["no_audio_changed_answers"] = changed

    return EvalReport(overall=buckets["all"], buckets=buckets,
                      per_instance=decoded, meta=meta)


def keyword_proportions(
    questions: Sequence[Sequence[str] | str],
    keywords: KeywordSet = DEFAULT_KEYWORDS,
) -> dict[str, float]:
    """Share of keyword-positive questions containing each keyword.

    A question containing several keywords counts toward each of them,
    so the shares need not sum to one.
    """
    from hear.vocab import tokenize

    token_lists = [tokenize(q) if isinstance(q, str) else [t.lower() for t in q]
                   for q in questions]
    positive = [t for t in token_lists if keywords.contains(t)]
    shares = {kw: 0.0 for kw in keywords.base_keywords}
    if not positive:
        return shares
    for toks in positive:
        for kw in keywords.hits(toks):
            shares[kw] += 1.0
    return {kw: count / len(positive) for kw, count in shares.items()}
