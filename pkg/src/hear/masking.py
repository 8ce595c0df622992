"""Mask-index sampling and the zeroing operators for reconstruction.

A mask plan selects target frame indices m (fraction p of the L frames,
at least one).  The audio mask zeroes exactly the rows at m.  The
surrounding mask additionally zeroes, in both streams, every row within
frame distance n of any masked index (the targets included), which
produces the context-deprived branch for the reconstruction bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hear.features import FeatureTrack


def round_half_away(x: float) -> int:
    """Round with halves away from zero (2.5 -> 3), not banker's."""
    return int(np.floor(x + 0.5)) if x >= 0 else -int(np.floor(-x + 0.5))


@dataclass
class MaskPlan:
    """Masked frame indices plus the derived surrounding zero-set."""

    masked: np.ndarray  # sorted unique frame indices, non-empty
    length: int
    mask_prob: float
    distance: int = 1
    audio_zero: np.ndarray = field(init=False)
    video_zero: np.ndarray = field(init=False)

    def __post_init__(self):
        self.masked = np.unique(np.asarray(self.masked, dtype=int))
        if self.masked.size == 0:
            raise ValueError("mask plan requires at least one masked index")
        if self.masked.min() < 0 or self.masked.max() >= self.length:
            raise ValueError("masked indices out of range")
        if self.distance < 1:
            raise ValueError("surrounding distance must be >= 1")
        zero = surrounding_zero_set(self.masked, self.length, self.distance)
        self.audio_zero = zero
        self.video_zero = zero.copy()

    @property
    def count(self) -> int:
        return int(self.masked.size)


def surrounding_zero_set(masked: np.ndarray, length: int, distance: int) -> np.ndarray:
    """Indices within ``distance`` of any masked index, clipped to [0, L)."""
    hit = np.zeros(length, dtype=bool)
    for i in np.asarray(masked, dtype=int):
        hit[max(0, i - distance): min(length, i + distance + 1)] = True
    return np.flatnonzero(hit)


def sample_mask(length: int, p: float, seed: int, distance: int = 1) -> MaskPlan:
    """Sample max(1, round(p * L)) frame indices without replacement.

    Deterministic per seed.  Fixed-count sampling (rather than per-index
    coin flips) guarantees a non-empty target set.
    """
    if length < 2:
        raise ValueError(f"need at least 2 frames to mask, got {length}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"mask probability must lie in (0, 1), got {p}")
    count = max(1, round_half_away(p * length))
    rng = np.random.Generator(np.random.PCG64(seed))
    masked = np.sort(rng.choice(length, size=count, replace=False))
    return MaskPlan(masked=masked, length=length, mask_prob=p, distance=distance)


def apply_audio_mask(audio: np.ndarray, masked: np.ndarray) -> np.ndarray:
    """Copy of the audio with the rows at ``masked`` replaced by zeros."""
    out = np.array(audio, dtype=np.float64, copy=True)
    out[np.asarray(masked, dtype=int)] = 0.0
    return out


def apply_surrounding_mask(
    track: FeatureTrack,
    masked: np.ndarray,
    distance: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Audio and video with all rows within ``distance`` of m zeroed.

    Both streams lose the same index set; every other row is bit-identical
    to the input.
    """
    if distance < 1:
        raise ValueError("surrounding distance must be >= 1")
    zero = surrounding_zero_set(np.asarray(masked, dtype=int), track.length, distance)
    audio = np.array(track.audio, copy=True)
    video = np.array(track.video, copy=True)
    audio[zero] = 0.0
    video[zero] = 0.0
    return audio, video
