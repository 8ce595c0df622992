"""Masked-audio reconstruction losses and the ranking upper bound.

The reconstruction loss L_ar regresses the true audio rows at the masked
indices from the rest of the audio, the full video and the dialogue
text.  The upper-bound branch L_ar^n repeats the regression with all
rows within distance n of the targets zeroed in both streams; a hinge
with margin delta then asks the context-rich branch to beat the
context-deprived one:

    L_rub = max(L_ar - L_ar^n + delta, 0)
    L_RLE = L_ar + L_rub

The upper-bound branch is evaluated without gradients by default (a
moving target the curriculum lowers by shrinking n); pass
``detach_upper=False`` to backpropagate through both branches.
"""

from __future__ import annotations

import numpy as np
import torch

from hear.data import DialogueInstance
from hear.features import FeatureTrack
from hear.masking import apply_audio_mask, apply_surrounding_mask
from hear.model import DlmModel

DEFAULT_MARGIN = 0.05


def _recon_sum_sq(model: DlmModel, instance: DialogueInstance,
                  audio_in: np.ndarray, video_in: np.ndarray,
                  target_rows: torch.Tensor, masked: np.ndarray) -> torch.Tensor:
    fused = model.embed_av(audio_in, video_in)
    enc_out, _ = model.encode_instance(fused, instance)
    recon = model.reconstruct_audio(enc_out[0], masked)
    return ((target_rows - recon) ** 2).sum()


def audio_recon_loss(
    model: DlmModel,
    instance: DialogueInstance,
    track: FeatureTrack,
    masked: np.ndarray,
) -> torch.Tensor:
    """Sum of squared errors over the masked audio rows (context-rich)."""
    masked = np.asarray(masked, dtype=int)
    if masked.size == 0:
        raise ValueError("masked index set must be non-empty")
    if masked.min() < 0 or masked.max() >= track.length:
        raise IndexError("masked index out of range")
    target = torch.as_tensor(track.audio[masked], dtype=torch.float64)
    audio_in = apply_audio_mask(track.audio, masked)
    return _recon_sum_sq(model, instance, audio_in, track.video, target, masked)


def upper_bound_loss(
    model: DlmModel,
    instance: DialogueInstance,
    track: FeatureTrack,
    masked: np.ndarray,
    distance: int,
    detach: bool = True,
) -> torch.Tensor:
    """Reconstruction loss with surroundings up to ``distance`` removed."""
    masked = np.asarray(masked, dtype=int)
    if masked.size == 0:
        raise ValueError("masked index set must be non-empty")
    if distance < 1:
        raise ValueError("surrounding distance must be >= 1")
    target = torch.as_tensor(track.audio[masked], dtype=torch.float64)
    audio_in, video_in = apply_surrounding_mask(track, masked, distance)
    if detach:
        with torch.no_grad():
            return _recon_sum_sq(model, instance, audio_in, video_in, target, masked)
    return _recon_sum_sq(model, instance, audio_in, video_in, target, masked)


def rub_loss(l_ar, l_ar_n, margin: float = DEFAULT_MARGIN) -> torch.Tensor:
    """Hinge max(L_ar - L_ar^n + margin, 0); zero iff the bound holds."""
    if margin <= 0:
        raise ValueError("margin must be > 0")
    l_ar = torch.as_tensor(l_ar, dtype=torch.float64)
    l_ar_n = torch.as_tensor(l_ar_n, dtype=torch.float64)
    return torch.clamp(l_ar - l_ar_n + margin, min=0.0)


def rle_loss(
    model: DlmModel,
    instance: DialogueInstance,
    track: FeatureTrack,
    masked: np.ndarray,
    distance: int,
    margin: float = DEFAULT_MARGIN,
    detach_upper: bool = True,
) -> torch.Tensor:
    """Combined reconstruction objective L_ar + L_rub."""
    l_ar = audio_recon_loss(model, instance, track, masked)
    l_n = upper_bound_loss(model, instance, track, masked, distance,
                           detach=detach_upper)
    return l_ar + rub_loss(l_ar, l_n, margin)


def rle_components(
    model: DlmModel,
    instance: DialogueInstance,
    track: FeatureTrack,
    masked: np.ndarray,
    distance: int,
    margin: float = DEFAULT_MARGIN,
    detach_upper: bool = True,
) -> dict[str, torch.Tensor]:
    """The three pieces of the objective, for logging and ablations."""
    l_ar = audio_recon_loss(model, instance, track, masked)
    l_n = upper_bound_loss(model, instance, track, masked, distance,
                           detach=detach_upper)
    hinge = rub_loss(l_ar, l_n, margin)
    return {"l_ar": l_ar, "l_ar_n": l_n, "l_rub": hinge, "total": l_ar + hinge}
