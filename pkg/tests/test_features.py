import struct

import numpy as np
import pytest

from hear.features import (FeatureFileError, FeatureTrack, load_feature_track,
                           read_hearfeat, resample_rows, write_hearfeat)


def test_track_requires_matching_rows():
    with pytest.raises(ValueError, match="rows"):
        FeatureTrack(video=np.zeros((4, 3)), audio=np.zeros((5, 2)))


def test_track_rejects_non_finite():
    bad = np.zeros((3, 2))
    bad[1, 1] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        FeatureTrack(video=np.zeros((3, 3)), audio=bad)


def test_resample_identity_when_lengths_match():
    x = np.arange(12, dtype=float).reshape(4, 3)
    out = resample_rows(x, 4)
    np.testing.assert_array_equal(out, x)


def test_resample_constant_stays_constant():
    x = np.full((48, 2), 7.25)
    out = resample_rows(x, 24)
    assert out.shape == (24, 2)
    np.testing.assert_allclose(out, 7.25)


def test_resample_hand_linear_interpolation():
    # rows [[0],[2],[4]] to 5 rows: sample positions 0, .5, 1, 1.5, 2
    x = np.array([[0.0], [2.0], [4.0]])
    out = resample_rows(x, 5)
    np.testing.assert_allclose(out, [[0.0], [1.0], [2.0], [3.0], [4.0]])


def test_hearfeat_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    matrix = rng.normal(size=(7, 5)).astype(np.float32).astype(np.float64)
    path = tmp_path / "m.hearfeat"
    write_hearfeat(path, matrix)
    back = read_hearfeat(path)
    np.testing.assert_array_equal(back, matrix)


def test_hearfeat_exact_layout(tmp_path):
    path = tmp_path / "m.hearfeat"
    write_hearfeat(path, np.array([[1.0, 2.0], [3.0, 4.0]]))
    raw = path.read_bytes()
    assert raw[:8] == b"HEARFEAT"
    version, rows, cols = struct.unpack_from("<III", raw, 8)
    assert (version, rows, cols) == (1, 2, 2)
    values = struct.unpack_from("<4f", raw, 20)
    assert values == (1.0, 2.0, 3.0, 4.0)
    assert len(raw) == 8 + 12 + 16


def test_hearfeat_bad_magic(tmp_path):
    path = tmp_path / "bad.hearfeat"
    path.write_bytes(b"NOTAFEAT" + b"\x00" * 16)
    with pytest.raises(FeatureFileError, match="magic"):
        read_hearfeat(path)


def test_hearfeat_bad_version(tmp_path):
    path = tmp_path / "bad.hearfeat"
    path.write_bytes(b"HEARFEAT" + struct.pack("<III", 9, 1, 1) + b"\x00" * 4)
    with pytest.raises(FeatureFileError, match="version"):
        read_hearfeat(path)


def test_hearfeat_truncated(tmp_path):
    path = tmp_path / "bad.hearfeat"
    path.write_bytes(b"HEARFEAT" + struct.pack("<III", 1, 2, 2) + b"\x00" * 8)
    with pytest.raises(FeatureFileError, match="expected"):
        read_hearfeat(path)


def test_hearfeat_non_finite(tmp_path):
    path = tmp_path / "bad.hearfeat"
    payload = struct.pack("<f", float("inf"))
    path.write_bytes(b"HEARFEAT" + struct.pack("<III", 1, 1, 1) + payload)
    with pytest.raises(FeatureFileError, match="non-finite"):
        read_hearfeat(path)


def test_load_track_no_resample_when_aligned(tmp_path):
    rng = np.random.default_rng(1)
    video = rng.normal(size=(24, 6)).astype(np.float32).astype(np.float64)
    audio = rng.normal(size=(24, 3)).astype(np.float32).astype(np.float64)
    write_hearfeat(tmp_path / "v", video)
    write_hearfeat(tmp_path / "a", audio)
    track = load_feature_track(tmp_path / "v", tmp_path / "a")
    np.testing.assert_array_equal(track.audio, audio)
    np.testing.assert_array_equal(track.video, video)


def test_load_track_resamples_audio_to_video_length(tmp_path):
    video = np.zeros((24, 4))
    audio = np.full((48, 2), 3.5)
    write_hearfeat(tmp_path / "v", video)
    write_hearfeat(tmp_path / "a", audio)
    track = load_feature_track(tmp_path / "v", tmp_path / "a")
    assert track.length == 24
    np.testing.assert_allclose(track.audio, 3.5)
