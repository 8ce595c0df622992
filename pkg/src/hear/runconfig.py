"""Declarative run configuration: one nested document drives every command.

The file (YAML or JSON) holds one section per concern::

    corpus:    {dir: runs/corpus}
    synth:     SynthCorpusConfig fields
    estimator: AudioRelatednessEstimator parameters
    train:     TrainConfig fields
    decode:    beam_size / max_len / length_penalty
    serve:     host / port / max_question_tokens / journal

Unknown keys and type mismatches raise :class:`ConfigError` carrying the
dotted field path, which the CLI reports verbatim with exit code 1.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any

import yaml

from hear.synth import SynthCorpusConfig
from hear.training import TrainConfig


class ConfigError(ValueError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


_KNOWN_SECTIONS = ("corpus", "synth", "estimator", "train", "decode", "serve")

_DECODE_FIELDS = {"beam_size": int, "max_len": int, "length_penalty": float}
_SERVE_FIELDS = {"host": str, "port": int, "max_question_tokens": int,
                 "journal": str, "static_dir": str}
_CORPUS_FIELDS = {"dir": str}
_ESTIMATOR_FIELDS = {"d_model": int, "n_heads": int, "n_layers": int,
                     "max_len": int, "epochs": int, "batch_size": int,
                     "lr": float, "weight_decay": float, "val_fraction": float,
                     "seed": int, "swap_fraction": float}


def load_config(path: str | Path | None) -> dict:
    """Parse and validate a config file; empty dict when no path given."""
    if path is None:
        return validate_config({})
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text) if str(path).endswith((".yaml", ".yml")) \
            else json.loads(text)
    except json.JSONDecodeError:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"unparseable document ({exc})")
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(str(path), "top level must be a mapping")
    return validate_config(doc)


def validate_config(doc: dict) -> dict:
    for key in doc:
        if key not in _KNOWN_SECTIONS:
            raise ConfigError(key, f"unknown section (expected one of "
                                   f"{', '.join(_KNOWN_SECTIONS)})")
    out = dict(doc)
    out["corpus"] = _check_flat("corpus", doc.get("corpus", {}), _CORPUS_FIELDS)
    out["synth"] = _check_dataclass("synth", doc.get("synth", {}),
                                    SynthCorpusConfig)
    out["estimator"] = _check_flat("estimator", doc.get("estimator", {}),
                                   _ESTIMATOR_FIELDS)
    out["train"] = _check_dataclass("train", doc.get("train", {}), TrainConfig)
    out["decode"] = _check_flat("decode", doc.get("decode", {}), _DECODE_FIELDS)
    out["serve"] = _check_flat("serve", doc.get("serve", {}), _SERVE_FIELDS)
    return out


def _coerce(path: str, value: Any, want: type) -> Any:
    if want is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if want is float and isinstance(value, str):
        try:
            return float(value)  # YAML leaves "6.24e-5" a string without a dot
        except ValueError:
            raise ConfigError(path, f"expected {want.__name__}, got {value!r}")
    if isinstance(value, bool) and want is not bool:
        raise ConfigError(path, f"expected {want.__name__}, got bool")
    if want is tuple and isinstance(value, list):
        return tuple(tuple(v) if isinstance(v, list) else v for v in value)
    if not isinstance(value, want):
        raise ConfigError(path, f"expected {want.__name__}, "
                                f"got {type(value).__name__}")
    return value


def _check_flat(section: str, mapping: Any, fields: dict[str, type]) -> dict:
    if mapping is None:
        return {}
    if not isinstance(mapping, dict):
        raise ConfigError(section, "expected a mapping")
    out = {}
    for key, value in mapping.items():
        if key not in fields:
            raise ConfigError(f"{section}.{key}", "unknown field")
        out[key] = _coerce(f"{section}.{key}", value, fields[key])
    return out


def _check_dataclass(section: str, mapping: Any, cls) -> dict:
    if mapping is None:
        return {}
    if not isinstance(mapping, dict):
        raise ConfigError(section, "expected a mapping")
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    hints = {"int": int, "float": float, "str": str, "bool": bool,
             "tuple": tuple}
    out = {}
    for key, value in mapping.items():
        if key not in types:
            raise ConfigError(f"{section}.{key}", "unknown field")
        want = hints.get(str(types[key]).replace("builtins.", ""), None)
        out[key] = (_coerce(f"{section}.{key}", value, want)
                    if want is not None else value)
    try:
        cls(**out)  # run the dataclass's own invariant checks
    except (TypeError, ValueError) as exc:
        raise ConfigError(section, str(exc))
    return out
