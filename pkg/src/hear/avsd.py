"""Loader for dialogue JSON in the public AVSD release layout.

The document is either a top-level list of dialogues or an object with a
``"dialogs"`` list.  Each dialogue carries a clip identifier
(``image_id``/``clip_id``/``vid``), a caption (``caption`` or
``summary``) and an ordered ``dialog`` list of question/answer string
pairs.  Text is lowercased and tokenized through the shared vocabulary.

Malformed records are skipped with a warning by default; ``strict=True``
turns them into hard errors naming the offending record.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from hear.data import HISTORY_WINDOW, DialogueInstance, build_history
from hear.vocab import Vocabulary, build_vocab

log = logging.getLogger(__name__)

_ID_KEYS = ("image_id", "clip_id", "vid", "id")
_CAPTION_KEYS = ("caption", "summary")


class AvsdFormatError(ValueError):
    """Raised for documents or records the loader cannot interpret."""


def _first_key(record: dict, keys: tuple[str, ...]):
    for k in keys:
        if k in record and record[k] is not None:
            return record[k]
    return None


def read_avsd_dialogues(path: str | Path, strict: bool = False) -> list[dict]:
    """Parse the raw dialogue list, normalizing each record to
    ``{"clip_id", "caption", "pairs": [(q, a), ...]}``."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise AvsdFormatError(f"{path}: not valid JSON ({exc})") from exc

    if isinstance(doc, dict) and "dialogs" in doc:
        raw = doc["dialogs"]
    elif isinstance(doc, list):
        raw = doc
    else:
        raise AvsdFormatError(
            f"{path}: expected a list of dialogues or an object with a "
            f"'dialogs' list, got {type(doc).__name__}"
        )

    dialogues = []
    for idx, record in enumerate(raw):
        where = f"{path}: dialogue #{idx}"
        if not isinstance(record, dict):
            msg = f"{where}: expected an object, got {type(record).__name__}"
            if strict:
                raise AvsdFormatError(msg)
            log.warning("%s; skipped", msg)
            continue
        clip_id = _first_key(record, _ID_KEYS)
        caption = _first_key(record, _CAPTION_KEYS)
        turns = record.get("dialog")
        problems = []
        if not isinstance(clip_id, str) or not clip_id:
            problems.append("missing clip identifier")
        if not isinstance(caption, str):
            problems.append("missing caption text")
        if not isinstance(turns, list):
            problems.append("missing 'dialog' list")
        pairs = []
        if not problems:
            for t, turn in enumerate(turns):
                q = turn.get("question") if isinstance(turn, dict) else None
                a = turn.get("answer") if isinstance(turn, dict) else None
                if not isinstance(q, str) or not isinstance(a, str):
                    problems.append(f"turn #{t} lacks question/answer strings")
                    break
                pairs.append((q, a))
        if problems:
            msg = f"{where} ({clip_id!r}): " + "; ".join(problems)
            if strict:
                raise AvsdFormatError(msg)
            log.warning("%s; skipped", msg)
            continue
        dialogues.append({"clip_id": clip_id, "caption": caption, "pairs": pairs})
    return dialogues


def load_avsd(
    path: str | Path,
    vocab: Vocabulary | None = None,
    window: int = HISTORY_WINDOW,
    strict: bool = False,
) -> list[DialogueInstance]:
    """Load dialogue instances (one per round) from an AVSD-layout file.

    When ``vocab`` is omitted, one is built from the file's own text.
    """
    dialogues = read_avsd_dialogues(path, strict=strict)
    if vocab is None:
        texts = []
        for d in dialogues:
            texts.append(d["caption"])
            for q, a in d["pairs"]:
                texts.extend((q, a))
        vocab = build_vocab(texts)

    instances = []
    for d in dialogues:
        caption_ids = vocab.encode(d["caption"])
        encoded_pairs: list[tuple[list[int], list[int]]] = []
        for rnd, (q, a) in enumerate(d["pairs"], start=1):
            q_ids, a_ids = vocab.encode(q), vocab.encode(a)
            instances.append(DialogueInstance(
                clip_id=d["clip_id"],
                caption=caption_ids,
                history=build_history(encoded_pairs, window),
                question=q_ids,
                answer=a_ids,
                round=rnd,
                meta={"question_text": q, "answer_text": a},
            ))
            encoded_pairs.append((q_ids, a_ids))
    return instances
