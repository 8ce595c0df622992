"""Question-conditioned audio/video gating for the dialogue model.

Two gating rules share the model's single joint projection:

* keyword gate: when the question contains an audio keyword, the video
  block is replaced by zeros before projection, so the fused sequence is
  bitwise independent of the video features;
* calibrated fusion: the audio block is scaled by a relatedness score r
  and the video block by (1 - r), which decomposes linearly as
  r * embed(audio, 0) + (1 - r) * embed(0, video).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from hear.data import DialogueInstance
from hear.features import FeatureTrack
from hear.keywords import DEFAULT_KEYWORDS, KeywordSet
from hear.model import DlmModel, dlm_loss

#: gating modes selectable in configs; "both" keyword-gates on a hit and
#: falls back to score calibration otherwise
SAL_MODES = ("none", "keyword", "estimator", "both")

#: relatedness score above which a question counts as audio-related in
#: analysis buckets
ESTIMATOR_BUCKET_THRESHOLD = 0.7


@dataclass
class RelatednessDecision:
    """The gating verdict for one question."""

    keyword_hit: bool
    score: float | None  # estimator score r in (0, 1); None without estimator
    mode: str  # "keyword-gate" | "estimator-calibrate" | "none"

    def __post_init__(self):
        if self.mode not in ("keyword-gate", "estimator-calibrate", "none"):
            raise ValueError(f"unknown gating mode {self.mode!r}")
        if self.mode == "estimator-calibrate":
            if self.score is None or not 0.0 < self.score < 1.0:
                raise ValueError("estimator mode requires a score in (0, 1)")

    @property
    def audio_related(self) -> bool:
        if self.mode == "estimator-calibrate":
            return self.score > ESTIMATOR_BUCKET_THRESHOLD
        return self.keyword_hit


def gate_streams(
    track: FeatureTrack,
    decision: RelatednessDecision,
) -> tuple[np.ndarray, np.ndarray]:
    """Audio/video streams after gating, still in feature space.

    This is the pre-projection step shared by the single-instance ops
    below and the batched trainer.
    """
    u, v = track.audio, track.video
    if decision.mode == "keyword-gate" and decision.keyword_hit:
        return u, np.zeros_like(v)
    if decision.mode == "estimator-calibrate":
        r = decision.score
        return r * u, (1.0 - r) * v
    return u, v


def keyword_gate_fuse(
    model: DlmModel,
    track: FeatureTrack,
    question_tokens: Sequence[str],
    keywords: KeywordSet = DEFAULT_KEYWORDS,
) -> torch.Tensor:
    """Fused sequence with the video block zeroed on a keyword hit.

    Without a hit this is exactly the plain [audio || video] projection.
    """
    if keywords.contains(question_tokens):
        video = np.zeros_like(track.video)
        return model.embed_av(track.audio, video)
    return model.embed_av(track.audio, track.video)


def calibrated_fuse(model: DlmModel, track: FeatureTrack, r) -> torch.Tensor:
    """Fused sequence of [r * audio || (1 - r) * video].

    ``r`` may be a python float or a scalar tensor (gradients flow
    through it in the latter case).  Values 0 and 1 are permitted for
    tests even though the estimator itself never produces them.
    """
    r = torch.as_tensor(r, dtype=torch.float64)
    audio = r * torch.as_tensor(track.audio, dtype=torch.float64)
    video = (1.0 - r) * torch.as_tensor(track.video, dtype=torch.float64)
    return model.embed_av(audio, video)


def sal_loss(
    model: DlmModel,
    instance: DialogueInstance,
    fused: torch.Tensor,
    reduction: str = "mean",
) -> torch.Tensor:
    """Answer cross-entropy over a gated fusion of the input streams.

    Identical functional form to the plain dialogue loss; only the fused
    sequence differs.  Training appends the end token to the target so
    the decoder learns to stop.
    """
    logits = model(fused, instance, include_eos=True)
    target = list(instance.answer) + [model.config.eos_id]
    return dlm_loss(logits, target, reduction=reduction)
