"""Dialogue records shared by the corpus loaders, trainer and server."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from hear.features import FeatureTrack
    from hear.vocab import Vocabulary

HISTORY_WINDOW = 3


@dataclass
class DialogueInstance:
    """One question-answer round with its dialogue context.

    All text is stored as token-id sequences.  ``history`` holds the
    caption plus at most ``HISTORY_WINDOW`` preceding question/answer
    pairs (enforced by :func:`build_history`, which both the training
    corpus builders and the session server use).
    """

    clip_id: str
    caption: list[int]
    history: list[tuple[list[int], list[int]]]
    question: list[int]
    answer: list[int]
    round: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.round < 1:
            raise ValueError(f"round must be >= 1, got {self.round}")


def build_history(
    pairs: Sequence[tuple[list[int], list[int]]],
    window: int = HISTORY_WINDOW,
) -> list[tuple[list[int], list[int]]]:
    """Keep only the last ``window`` question/answer pairs.

    The same truncation runs while building training instances and while
    answering live sessions, so both paths see identical context.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    pairs = list(pairs)
    return [(list(q), list(a)) for q, a in pairs[-window:]] if window else []


@dataclass
class Corpus:
    """Clips with aligned feature tracks, dialogues and a shared vocabulary."""

    clips: list[tuple["FeatureTrack", list[DialogueInstance]]]
    vocab: "Vocabulary"
    captions: dict[str, str] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.clips)

    def __len__(self):
        return len(self.clips)

    @property
    def instances(self) -> list[DialogueInstance]:
        return [inst for _, insts in self.clips for inst in insts]

    @property
    def clip_ids(self) -> list[str]:
        return [insts[0].clip_id for _, insts in self.clips if insts]

    def track_for(self, clip_id: str) -> "FeatureTrack":
        for track, insts in self.clips:
            if insts and insts[0].clip_id == clip_id:
                return track
        raise KeyError(clip_id)

    def question_texts(self, vocab=None) -> list[str]:
        vocab = vocab or self.vocab
        return [" ".join(vocab.decode_tokens(inst.question))
                for inst in self.instances]

    def subset(self, clip_ids: Sequence[str]) -> "Corpus":
        wanted = set(clip_ids)
        kept = [(t, insts) for t, insts in self.clips
                if insts and insts[0].clip_id in wanted]
        caps = {cid: cap for cid, cap in self.captions.items() if cid in wanted}
        return Corpus(clips=kept, vocab=self.vocab, captions=caps)
