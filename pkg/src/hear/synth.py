"""Synthetic toy corpus: clips with latent events, features and dialogues.

Each clip carries a set of latent events.  Visual events (activities)
leave a signature in the video feature stream, audio events (sound
sources) only in the audio stream; by construction the video stream is
drawn from RNG streams that never see the audio-event assignment, so an
audio-only question cannot be answered from video.

Questions are templated per clip and come in three kinds: audio
(answerable only from audio), visual (only from video) and mixed
(requires both).  Answers are short sentences fully determined by the
latent events, which makes exact-match accuracy meaningful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hear.data import HISTORY_WINDOW, Corpus, DialogueInstance, build_history
from hear.features import FeatureTrack, write_hearfeat
from hear.vocab import build_vocab

AUDIO_EVENT_WORDS = (
    "music", "singing", "humming", "clapping",
    "whistling", "thunder", "laughter", "barking",
)
VISUAL_EVENT_WORDS = (
    "cooking", "dancing", "reading", "jumping",
    "cleaning", "eating", "running", "stretching",
)


@dataclass
class SynthCorpusConfig:
    clips: int = 50
    length: int = 24
    video_dim: int = 32
    audio_dim: int = 8
    events: int = 6
    audio_event_fraction: float = 0.5
    templates_per_clip: int = 6
    sigma_feat: float = 0.3
    seed: int = 0
    history_window: int = HISTORY_WINDOW
    # relative strength of the two streams; video is deliberately the
    # louder, higher-dimensional distractor
    audio_gain: float = 1.0
    video_gain: float = 2.0
    video_noise_mult: float = 2.0
    # surface-form spread of visually grounded answers: 1 keeps answers a
    # single fixed phrasing per fact; higher values sample among variant
    # phrasings (a latent of the clip), adding irreducible answer entropy
    answer_style_variants: int = 1

    def __post_init__(self):
        for name in ("clips", "length", "video_dim", "audio_dim", "events",
                     "templates_per_clip"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0.0 <= self.audio_event_fraction <= 1.0:
            raise ValueError("audio_event_fraction must lie in [0, 1]")
        if self.sigma_feat < 0:
            raise ValueError("sigma_feat must be >= 0")

    @property
    def audio_event_count(self) -> int:
        return int(round(self.events * self.audio_event_fraction))

    @property
    def visual_event_count(self) -> int:
        return self.events - self.audio_event_count


@dataclass
class QuestionLabel:
    """Ground truth for one generated question."""

    clip_id: str
    round: int
    kind: str  # "audio" | "visual" | "mixed"
    audio_related: bool


@dataclass
class SynthCorpus(Corpus):
    """A :class:`~hear.data.Corpus` that remembers its generator config."""

    config: SynthCorpusConfig | None = None


def _event_words(cfg: SynthCorpusConfig) -> tuple[tuple[str, ...], tuple[str, ...]]:
    na, nv = cfg.audio_event_count, cfg.visual_event_count
    if na > len(AUDIO_EVENT_WORDS) or nv > len(VISUAL_EVENT_WORDS):
        raise ValueError(
            f"event pool exhausted: need {na} audio / {nv} visual, "
            f"have {len(AUDIO_EVENT_WORDS)} / {len(VISUAL_EVENT_WORDS)}"
        )
    return AUDIO_EVENT_WORDS[:na], VISUAL_EVENT_WORDS[:nv]


def _segment(rng: np.random.Generator, length: int) -> tuple[int, int]:
    span = int(rng.integers(max(1, length // 3), max(2, 2 * length // 3) + 1))
    span = min(span, length)
    start = int(rng.integers(0, length - span + 1))
    return start, start + span


def _event_stream(
    length: int,
    dim: int,
    present: np.ndarray,
    embeddings: np.ndarray,
    seg_rng: np.random.Generator,
    noise_rng: np.random.Generator,
    sigma: float,
) -> np.ndarray:
    """Sum of present-event embeddings over random segments, plus noise.

    Segments are drawn for every event regardless of presence so that the
    RNG consumption (and therefore everything downstream of ``seg_rng``)
    does not depend on which events are present.
    """
    out = noise_rng.normal(0.0, sigma, size=(length, dim))
    for k in range(len(present)):
        start, end = _segment(seg_rng, length)
        if present[k]:
            out[start:end] += embeddings[k]
    return out


_AUDIO_YESNO = (
    "do you hear {a} ?",
    "can you hear the {a} ?",
    "is there any sound of {a} ?",
)
_AUDIO_OPEN = (
    "what sound can you hear ?",
    "what do you hear in the audio ?",
)
_VISUAL_YESNO = (
    "is anyone {v} in the video ?",
    "do you see someone {v} ?",
)
_VISUAL_OPEN = (
    "what is the person doing ?",
)
_MIXED = (
    "do you hear {a} while someone is {v} ?",
)

# surface variants for the visually grounded answers: the pick is a
# latent of the clip (drawn from its question stream), so answers stay a
# deterministic function of the clip's latent state while giving the
# corpus the phrasing spread real dialogue data has
_VISUAL_YES_STYLES = (
    "yes someone is {v}",
    "yes i can see {v} going on",
    "yes there is {v} happening",
)
_VISUAL_NO_STYLES = (
    "no nobody is {v}",
    "no i see no {v} at all",
    "no there is no {v} here",
)
_VISUAL_OPEN_STYLES = (
    "the person is {v}",
    "someone is busy {v}",
    "i can see {v}",
)
_MIXED_YES_STYLES = (
    "yes that happens",
    "yes both of those happen",
    "yes they do",
)
_MIXED_NO_STYLES = (
    "no that does not happen",
    "no not both of those",
    "no they do not",
)


def _pick(styles, rng, variants):
    k = max(1, min(variants, len(styles)))
    return styles[int(rng.integers(k))]


def _question_answer(
    kind: str,
    rng: np.random.Generator,
    audio_words: tuple[str, ...],
    visual_words: tuple[str, ...],
    audio_present: np.ndarray,
    visual_present: np.ndarray,
    style_variants: int = 1,
) -> tuple[str, str]:
    if kind == "audio":
        if audio_words and rng.random() < 0.3:
            q = _AUDIO_OPEN[int(rng.integers(len(_AUDIO_OPEN)))]
            heard = [w for w, p in zip(audio_words, audio_present) if p]
            a = f"i can hear {heard[0]}" if heard else "i hear nothing at all"
        else:
            k = int(rng.integers(len(audio_words)))
            q = _AUDIO_YESNO[int(rng.integers(len(_AUDIO_YESNO)))].format(a=audio_words[k])
            a = (f"yes i can hear {audio_words[k]}" if audio_present[k]
                 else f"no there is no {audio_words[k]}")
    elif kind == "visual":
        if visual_words and rng.random() < 0.3:
            q = _VISUAL_OPEN[int(rng.integers(len(_VISUAL_OPEN)))]
            seen = [w for w, p in zip(visual_words, visual_present) if p]
            a = (_pick(_VISUAL_OPEN_STYLES, rng, style_variants).format(v=seen[0])
                 if seen else "the person is just standing")
        else:
            k = int(rng.integers(len(visual_words)))
            q = _VISUAL_YESNO[int(rng.integers(len(_VISUAL_YESNO)))].format(v=visual_words[k])
            styles = _VISUAL_YES_STYLES if visual_present[k] else _VISUAL_NO_STYLES
            a = _pick(styles, rng, style_variants).format(v=visual_words[k])
    elif kind == "mixed":
        ka = int(rng.integers(len(audio_words)))
        kv = int(rng.integers(len(visual_words)))
        q = _MIXED[0].format(a=audio_words[ka], v=visual_words[kv])
        styles = (_MIXED_YES_STYLES if audio_present[ka] and visual_present[kv]
                  else _MIXED_NO_STYLES)
        a = _pick(styles, rng, style_variants)
    else:
        raise ValueError(f"unknown question kind {kind!r}")
    return q, a


def _kind_cycle(cfg: SynthCorpusConfig, rng: np.random.Generator) -> list[str]:
    kinds = []
    if cfg.audio_event_count:
        kinds.append("audio")
    if cfg.visual_event_count:
        kinds.append("visual")
    if cfg.audio_event_count and cfg.visual_event_count:
        kinds.append("mixed")
    if not kinds:
        raise ValueError("config yields no events to ask about")
    seq = [kinds[i % len(kinds)] for i in range(cfg.templates_per_clip)]
    rng.shuffle(seq)
    return seq


def _clip_payload(
    cfg: SynthCorpusConfig,
    clip_seed: np.random.SeedSequence,
    audio_emb: np.ndarray,
    visual_emb: np.ndarray,
    audio_words: tuple[str, ...],
    visual_words: tuple[str, ...],
    audio_presence_override: np.ndarray | None = None,
):
    """Features and raw dialogue text for one clip.

    RNG streams are spawned per concern; the video stream consumes only
    the visual-presence, visual-segment and video-noise streams, so its
    bits are identical for any audio-event assignment
    (``audio_presence_override`` exists to let tests verify that).
    """
    # derive child streams statelessly (SeedSequence.spawn mutates its
    # counter, which would make repeated calls on one seed diverge)
    children = [
        np.random.SeedSequence(entropy=clip_seed.entropy,
                               spawn_key=tuple(clip_seed.spawn_key) + (i,))
        for i in range(7)
    ]
    (s_apres, s_vpres, s_aseg, s_vseg, s_anoise, s_vnoise, s_q) = (
        np.random.Generator(np.random.PCG64(child)) for child in children
    )
    audio_present = s_apres.random(len(audio_words)) < 0.5
    if audio_presence_override is not None:
        audio_present = np.asarray(audio_presence_override, dtype=bool)
    visual_present = s_vpres.random(len(visual_words)) < 0.5

    video = _event_stream(
        cfg.length, cfg.video_dim, visual_present, visual_emb,
        s_vseg, s_vnoise, cfg.sigma_feat * cfg.video_noise_mult,
    )
    audio = _event_stream(
        cfg.length, cfg.audio_dim, audio_present, audio_emb,
        s_aseg, s_anoise, cfg.sigma_feat,
    )

    seen = [w for w, p in zip(visual_words, visual_present) if p]
    caption = (f"the video shows a person {seen[0]} in a room" if seen
               else "the video shows a person in a room")

    rounds = []
    for kind in _kind_cycle(cfg, s_q):
        q, a = _question_answer(kind, s_q, audio_words, visual_words,
                                audio_present, visual_present,
                                cfg.answer_style_variants)
        rounds.append((kind, q, a))
    return video, audio, caption, rounds


def synth_corpus(
    cfg: SynthCorpusConfig,
) -> tuple[SynthCorpus, dict[tuple[str, int], QuestionLabel]]:
    """Generate a deterministic toy corpus and its relatedness labels.

    Returns the corpus (clips of feature track + dialogue instances,
    plus the corpus vocabulary) and, per question, a
    :class:`QuestionLabel` keyed by (clip_id, round).
    """
    audio_words, visual_words = _event_words(cfg)
    root = np.random.SeedSequence(cfg.seed)
    emb_seed, *clip_seeds = root.spawn(1 + cfg.clips)
    emb_rng = np.random.Generator(np.random.PCG64(emb_seed))

    def unit_rows(n, d, gain):
        m = emb_rng.normal(size=(n, d))
        norms = np.linalg.norm(m, axis=1, keepdims=True)
        return gain * m / np.maximum(norms, 1e-12)

    # audio embeddings drawn first so stream order is stable even when
    # one of the pools is empty
    audio_emb = unit_rows(len(audio_words), cfg.audio_dim, cfg.audio_gain)
    visual_emb = unit_rows(len(visual_words), cfg.video_dim, cfg.video_gain)

    raw_clips = []
    for idx, clip_seed in enumerate(clip_seeds):
        clip_id = f"clip{idx:04d}"
        video, audio, caption, rounds = _clip_payload(
            cfg, clip_seed, audio_emb, visual_emb, audio_words, visual_words
        )
        raw_clips.append((clip_id, video, audio, caption, rounds))

    texts = []
    for _, _, _, caption, rounds in raw_clips:
        texts.append(caption)
        for _, q, a in rounds:
            texts.extend((q, a))
    vocab = build_vocab(texts)

    clips: list[tuple[FeatureTrack, list[DialogueInstance]]] = []
    labels: dict[tuple[str, int], QuestionLabel] = {}
    captions: dict[str, str] = {}
    for clip_id, video, audio, caption, rounds in raw_clips:
        track = FeatureTrack(video=video, audio=audio)
        captions[clip_id] = caption
        caption_ids = vocab.encode(caption)
        pairs: list[tuple[list[int], list[int]]] = []
        instances = []
        for rnd, (kind, q, a) in enumerate(rounds, start=1):
            q_ids, a_ids = vocab.encode(q), vocab.encode(a)
            instances.append(DialogueInstance(
                clip_id=clip_id,
                caption=caption_ids,
                history=build_history(pairs, cfg.history_window),
                question=q_ids,
                answer=a_ids,
                round=rnd,
                meta={"kind": kind, "audio_related": kind != "visual",
                      "question_text": q, "answer_text": a},
            ))
            labels[(clip_id, rnd)] = QuestionLabel(
                clip_id=clip_id, round=rnd, kind=kind,
                audio_related=kind != "visual",
            )
            pairs.append((q_ids, a_ids))
        clips.append((track, instances))

    corpus = SynthCorpus(clips=clips, vocab=vocab, config=cfg, captions=captions)
    return corpus, labels


# ---------------------------------------------------------------------------
# on-disk corpus layout used by the CLI:
#   <dir>/dialogues.json   dialogue JSON (same schema load_avsd reads)
#   <dir>/features/<clip>.{video,audio}.hearfeat
#   <dir>/labels.json      question kind / relatedness ground truth
#   <dir>/vocab.json       token-to-id map
# ---------------------------------------------------------------------------


def save_corpus_dir(
    corpus: SynthCorpus,
    labels: dict[tuple[str, int], QuestionLabel],
    out_dir: str | Path,
) -> Path:
    out = Path(out_dir)
    feat_dir = out / "features"
    feat_dir.mkdir(parents=True, exist_ok=True)

    dialogues = []
    for track, instances in corpus.clips:
        if not instances:
            continue
        clip_id = instances[0].clip_id
        write_hearfeat(feat_dir / f"{clip_id}.video.hearfeat", track.video)
        write_hearfeat(feat_dir / f"{clip_id}.audio.hearfeat", track.audio)
        dialogues.append({
            "image_id": clip_id,
            "caption": corpus.captions.get(clip_id, ""),
            "dialog": [
                {"question": inst.meta["question_text"],
                 "answer": inst.meta["answer_text"]}
                for inst in instances
            ],
        })
    (out / "dialogues.json").write_text(json.dumps({"dialogs": dialogues}, indent=1))
    (out / "labels.json").write_text(json.dumps(
        [label.__dict__ for label in labels.values()], indent=1))
    (out / "vocab.json").write_text(corpus.vocab.to_json())
    return out


def load_labels(path: str | Path) -> dict[tuple[str, int], QuestionLabel]:
    rows = json.loads(Path(path).read_text())
    return {(r["clip_id"], r["round"]): QuestionLabel(**r) for r in rows}


def load_corpus_dir(
    corpus_dir: str | Path,
    history_window: int = HISTORY_WINDOW,
) -> tuple[Corpus, dict[tuple[str, int], QuestionLabel]]:
    """Rebuild a corpus (and labels, when present) from an on-disk layout."""
    from hear.avsd import load_avsd, read_avsd_dialogues
    from hear.features import load_feature_track
    from hear.vocab import Vocabulary

    corpus_dir = Path(corpus_dir)
    dialogues = read_avsd_dialogues(corpus_dir / "dialogues.json")
    vocab_path = corpus_dir / "vocab.json"
    if vocab_path.exists():
        vocab = Vocabulary.from_json(vocab_path.read_text())
    else:
        texts = []
        for d in dialogues:
            texts.append(d["caption"])
            for q, a in d["pairs"]:
                texts.extend((q, a))
        vocab = build_vocab(texts)
    instances = load_avsd(corpus_dir / "dialogues.json", vocab=vocab,
                          window=history_window)

    by_clip: dict[str, list[DialogueInstance]] = {}
    for inst in instances:
        by_clip.setdefault(inst.clip_id, []).append(inst)

    captions = {d["clip_id"]: d["caption"] for d in dialogues}
    clips = []
    for clip_id, insts in by_clip.items():
        track = load_feature_track(
            corpus_dir / "features" / f"{clip_id}.video.hearfeat",
            corpus_dir / "features" / f"{clip_id}.audio.hearfeat",
        )
        clips.append((track, sorted(insts, key=lambda i: i.round)))
    corpus = Corpus(clips=clips, vocab=vocab, captions=captions)

    labels_path = corpus_dir / "labels.json"
    labels = load_labels(labels_path) if labels_path.exists() else {}
    return corpus, labels
