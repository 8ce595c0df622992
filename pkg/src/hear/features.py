"""Aligned audio/video feature tracks and the HEARFEAT container format.

HEARFEAT layout (little-endian, bit-exact):

    bytes 0..7    magic "HEARFEAT" (8 ASCII bytes)
    bytes 8..11   uint32 version (currently 1)
    bytes 12..15  uint32 row count
    bytes 16..19  uint32 column count
    then          rows*cols IEEE-754 float32 values, row-major

One file per modality per clip.  Loading a clip pairs a video file with
an audio file; when the audio row count differs from the video row
count, the audio is linearly interpolated along the frame axis so both
modalities share the same number of rows.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HEARFEAT_MAGIC = b"HEARFEAT"
HEARFEAT_VERSION = 1
_HEADER = struct.Struct("<III")


class FeatureFileError(ValueError):
    """Raised for malformed HEARFEAT files."""


def check_feature_matrix(x: np.ndarray, name: str = "features") -> np.ndarray:
    """Validate a 2-D finite float matrix; returns it as float64."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {x.shape}")
    if x.shape[0] < 1:
        raise ValueError(f"{name} must have at least one row")
    if not np.isfinite(x).all():
        raise ValueError(f"{name} contains non-finite values")
    return x


@dataclass
class FeatureTrack:
    """Per-frame video and audio feature matrices for one clip.

    Both matrices share the first dimension (the frame count L) and all
    entries are finite.
    """

    video: np.ndarray
    audio: np.ndarray

    def __post_init__(self):
        self.video = check_feature_matrix(self.video, "video")
        self.audio = check_feature_matrix(self.audio, "audio")
        if self.video.shape[0] != self.audio.shape[0]:
            raise ValueError(
                f"video has {self.video.shape[0]} rows but audio has "
                f"{self.audio.shape[0]}; align with resample_rows first"
            )

    @property
    def length(self) -> int:
        return self.video.shape[0]

    @property
    def video_dim(self) -> int:
        return self.video.shape[1]

    @property
    def audio_dim(self) -> int:
        return self.audio.shape[1]


def resample_rows(x: np.ndarray, target_rows: int) -> np.ndarray:
    """Linearly interpolate a matrix to ``target_rows`` along axis 0.

    Identity when the row count already matches.  Row i of the output
    samples the input at fractional position i*(R-1)/(T-1), so the first
    and last rows are preserved and constant input stays constant.
    """
    x = check_feature_matrix(x)
    rows = x.shape[0]
    if rows == target_rows:
        return x
    if target_rows < 1:
        raise ValueError("target_rows must be >= 1")
    if rows == 1:
        return np.repeat(x, target_rows, axis=0)
    if target_rows == 1:
        src = np.array([0.0])
    else:
        src = np.arange(target_rows) * (rows - 1) / (target_rows - 1)
    lo = np.floor(src).astype(int)
    hi = np.minimum(lo + 1, rows - 1)
    frac = (src - lo)[:, None]
    return x[lo] * (1.0 - frac) + x[hi] * frac


def write_hearfeat(path: str | Path, matrix: np.ndarray) -> None:
    """Write a feature matrix as a HEARFEAT v1 file."""
    matrix = check_feature_matrix(matrix)
    rows, cols = matrix.shape
    payload = matrix.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(HEARFEAT_MAGIC)
        fh.write(_HEADER.pack(HEARFEAT_VERSION, rows, cols))
        fh.write(payload)


def read_hearfeat(path: str | Path) -> np.ndarray:
    """Read a HEARFEAT file into a float64 matrix, validating the header."""
    raw = Path(path).read_bytes()
    if len(raw) < len(HEARFEAT_MAGIC) + _HEADER.size:
        raise FeatureFileError(f"{path}: truncated header")
    if raw[: len(HEARFEAT_MAGIC)] != HEARFEAT_MAGIC:
        raise FeatureFileError(f"{path}: bad magic bytes")
    version, rows, cols = _HEADER.unpack_from(raw, len(HEARFEAT_MAGIC))
    if version != HEARFEAT_VERSION:
        raise FeatureFileError(f"{path}: unsupported version {version}")
    expected = len(HEARFEAT_MAGIC) + _HEADER.size + 4 * rows * cols
    if len(raw) != expected:
        raise FeatureFileError(
            f"{path}: expected {expected} bytes for {rows}x{cols}, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=len(HEARFEAT_MAGIC) + _HEADER.size)
    matrix = data.reshape(rows, cols).astype(np.float64)
    if not np.isfinite(matrix).all():
        raise FeatureFileError(f"{path}: non-finite values")
    return matrix


def load_feature_track(video_path: str | Path, audio_path: str | Path) -> FeatureTrack:
    """Load a clip's video and audio HEARFEAT files into an aligned track.

    The video row count defines L; audio with a different row count is
    resampled to L rows by linear interpolation.
    """
    video = read_hearfeat(video_path)
    audio = read_hearfeat(audio_path)
    if audio.shape[0] != video.shape[0]:
        audio = resample_rows(audio, video.shape[0])
    return FeatureTrack(video=video, audio=audio)
