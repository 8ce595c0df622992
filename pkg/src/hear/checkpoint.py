"""Single-archive checkpoints: config echo, vocabulary and named tensors.

A checkpoint is one ``.npz`` archive.  A JSON ``__meta__`` entry carries
the format tag, version, model config, vocabulary and any training
counters; every parameter (and, optionally, AdamW moment) is stored as a
named float64 array with its shape, so archives remain readable without
torch.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from hear.model import DlmConfig, DlmModel
from hear.vocab import Vocabulary

FORMAT_TAG = "hear-dlm"
FORMAT_VERSION = 1


@dataclass
class CheckpointBundle:
    model: DlmModel
    vocab: Vocabulary
    meta: dict = field(default_factory=dict)
    optimizer_state: dict | None = None


def save_checkpoint(
    path: str | Path,
    model: DlmModel,
    vocab: Vocabulary,
    extra: dict | None = None,
    optimizer: torch.optim.Optimizer | None = None,
) -> Path:
    path = Path(path)
    arrays = {f"param__{name}": p.detach().numpy()
              for name, p in model.state_dict().items()}
    meta = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "config": asdict(model.config),
        "vocab": vocab.to_json(),
        "extra": extra or {},
    }
    if optimizer is not None:
        state = optimizer.state_dict()
        meta["optimizer_groups"] = json.dumps(state["param_groups"])
        for idx, entry in state["state"].items():
            for key, val in entry.items():
                tensor = val if isinstance(val, torch.Tensor) else torch.tensor(val)
                arrays[f"opt__{idx}__{key}"] = tensor.detach().numpy()
    np.savez(path, __meta__=np.array(json.dumps(meta)), **arrays)
    return path


def load_checkpoint(path: str | Path) -> CheckpointBundle:
    with np.load(path, allow_pickle=False) as payload:
        if "__meta__" not in payload.files:
            raise ValueError(f"{path}: missing checkpoint metadata")
        meta = json.loads(str(payload["__meta__"]))
        if meta.get("format") != FORMAT_TAG:
            raise ValueError(f"{path}: not a {FORMAT_TAG} checkpoint")
        if meta.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {meta.get('version')}")
        config = DlmConfig(**meta["config"])
        model = DlmModel(config)
        state = {k[len("param__"):]: torch.tensor(payload[k])
                 for k in payload.files if k.startswith("param__")}
        model.load_state_dict(state)
        vocab = Vocabulary.from_json(meta["vocab"])

        optimizer_state = None
        if "optimizer_groups" in meta:
            entries: dict[int, dict] = {}
            for key in payload.files:
                if not key.startswith("opt__"):
                    continue
                _, idx, name = key.split("__", 2)
                entries.setdefault(int(idx), {})[name] = torch.tensor(payload[key])
            optimizer_state = {
                "state": entries,
                "param_groups": json.loads(meta["optimizer_groups"]),
            }
    return CheckpointBundle(model=model, vocab=vocab, meta=meta.get("extra", {}),
                            optimizer_state=optimizer_state)
