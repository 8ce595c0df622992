"""Audio-keyword sensing over tokenized questions.

A question counts as audio-related when any of its tokens is one of the
19 base keywords or a plural ("s"/"es") variant of one.  Matching is
case-insensitive and token-level: "soundproof" does not match "sound".
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from hear.vocab import tokenize

#: The 19 base keywords used for audio sensing.
AUDIO_KEYWORDS = (
    "noise",
    "sound",
    "voice",
    "speech",
    "speak",
    "talk",
    "listen",
    "hear",
    "say",
    "sing",
    "music",
    "audio",
    "call",
    "hum",
    "loud",
    "tones",
    "utter",
    "volume",
    "song",
)


class KeywordSet:
    """Keyword matcher with naive plural expansion.

    Plural handling appends "s" and "es" to every base keyword rather
    than lemmatizing, so "sounds" and "noises" match while "speaking"
    does not.
    """

    def __init__(self, base_keywords: Iterable[str] = AUDIO_KEYWORDS):
        self.base_keywords = tuple(k.lower() for k in base_keywords)
        expanded = set()
        for kw in self.base_keywords:
            expanded.add(kw)
            expanded.add(kw + "s")
            expanded.add(kw + "es")
        self._expanded = frozenset(expanded)

    def __len__(self) -> int:
        return len(self.base_keywords)

    def matches_token(self, token: str) -> bool:
        return token.lower() in self._expanded

    def contains(self, tokens: Sequence[str]) -> bool:
        return any(self.matches_token(t) for t in tokens)

    def hits(self, tokens: Sequence[str]) -> list[str]:
        """Base keywords matched by any token, in base-list order."""
        lowered = [t.lower() for t in tokens]
        out = []
        for kw in self.base_keywords:
            variants = {kw, kw + "s", kw + "es"}
            if any(t in variants for t in lowered):
                out.append(kw)
        return out

    @classmethod
    def from_file(cls, path: str | Path) -> "KeywordSet":
        """Load one keyword per line; blank lines and '#' comments skipped."""
        words = []
        for line in Path(path).read_text().splitlines():
            line = line.strip().lower()
            if line and not line.startswith("#"):
                words.append(line)
        if not words:
            raise ValueError(f"keyword file {path} contains no keywords")
        return cls(words)

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.base_keywords) + "\n")


DEFAULT_KEYWORDS = KeywordSet()


def contains_audio_keyword(question_tokens: Sequence[str] | str,
                           keywords: KeywordSet = DEFAULT_KEYWORDS) -> bool:
    """True iff any question token (or its plural form) is an audio keyword.

    Accepts either a token sequence or a raw string, which is tokenized
    the same way as all other text in the package.
    """
    if isinstance(question_tokens, str):
        question_tokens = tokenize(question_tokens)
    return keywords.contains(question_tokens)
