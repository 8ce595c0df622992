"""Masking-distance curriculum: shrink the surrounding distance over epochs.

The default hyperbolic curve is

    n(e) = round(alpha * sqrt(e_max - e)) + 1,  alpha = (n_max - 1) / sqrt(e_max - 1)

which starts at exactly n_max in epoch 1 and reaches 1 in the final
epoch.  Linear and logistic alternatives share those boundary values;
the logistic curve is rescaled so its endpoints land exactly on n_max
and 1 (the raw sigmoid only approaches them).  Rounding is
half-away-from-zero throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from hear.masking import round_half_away

CURVES = ("hyperbolic", "linear", "logistic")


@dataclass
class ScheduleConfig:
    curve: str = "hyperbolic"
    n_max: int = 5
    e_max: int = 15
    logistic_k: float = 1.0

    def __post_init__(self):
        if self.curve not in CURVES:
            raise ValueError(f"curve must be one of {CURVES}, got {self.curve!r}")
        if self.n_max < 1 or self.e_max < 1:
            raise ValueError("n_max and e_max must be >= 1")

    @property
    def alpha(self) -> float:
        if self.e_max == 1:
            return 0.0
        return (self.n_max - 1) / math.sqrt(self.e_max - 1)


def mask_distance_schedule(epoch: int, cfg: ScheduleConfig) -> int:
    """Surrounding distance n for a 1-based epoch; non-increasing in epoch."""
    if not 1 <= epoch <= cfg.e_max:
        raise ValueError(f"epoch must lie in [1, {cfg.e_max}], got {epoch}")
    if cfg.e_max == 1 or cfg.n_max == 1:
        return 1 if cfg.e_max == 1 else cfg.n_max
    if cfg.curve == "hyperbolic":
        n = round_half_away(cfg.alpha * math.sqrt(cfg.e_max - epoch)) + 1
    elif cfg.curve == "linear":
        n = round_half_away(
            cfg.n_max - (cfg.n_max - 1) * (epoch - 1) / (cfg.e_max - 1))
    else:  # logistic, rescaled to hit both endpoints exactly
        def raw(e):
            return 1.0 / (1.0 + math.exp(cfg.logistic_k * (e - cfg.e_max / 2.0)))
        lo, hi = raw(cfg.e_max), raw(1)
        frac = (raw(epoch) - lo) / (hi - lo)
        n = round_half_away(1.0 + (cfg.n_max - 1) * frac)
    return max(1, min(cfg.n_max, n))
