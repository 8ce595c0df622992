"""HTTP session service for interactive multi-round dialogue.

Endpoints (JSON in/out):

* ``POST /sessions`` ``{clip_id}``: open a session on a clip.
* ``POST /sessions/{id}/questions`` ``{text}``: ask; the response carries
  the answer text, the relatedness score r, the keyword hit flag, the
  gating mode and the round index.
* ``GET /sessions/{id}``: full round history.
* ``GET /clips``: clips available for new sessions.

Each answer is produced by the same encode/beam-decode path the offline
evaluator uses, over a frozen model snapshot, so a service answer is
byte-identical to an offline decode of the same session state.  Sessions
live in memory (optionally journaled to an append-only file); each
session serializes its own rounds under a lock.
"""

from __future__ import annotations

import dataclasses
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import torch
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from hear.data import Corpus, DialogueInstance, build_history
from hear.decoding import DecodeConfig, beam_decode, model_step_fn
from hear.estimator import AudioRelatednessEstimator, estimate_relatedness
from hear.gating import gate_streams
from hear.keywords import DEFAULT_KEYWORDS, KeywordSet
from hear.model import DlmModel
from hear.vocab import Vocabulary

DEFAULT_MAX_QUESTION_TOKENS = 50


@dataclass
class RoundRecord:
    round: int
    question: str
    answer: str
    keyword_hit: bool
    score: float | None
    mode: str
    elapsed_ms: float

    def to_json(self) -> dict:
        return {"round": self.round, "question": self.question,
                "answer": self.answer, "keyword_hit": self.keyword_hit,
                "r": self.score, "mode": self.mode,
                "elapsed_ms": self.elapsed_ms}


@dataclass
class Session:
    session_id: str
    clip_id: str
    rounds: list[RoundRecord] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class ServingBundle:
    """Everything the request handlers need, all frozen."""

    model: DlmModel
    vocab: Vocabulary
    corpus: Corpus
    estimator: AudioRelatednessEstimator | None = None
    sal_mode: str = "estimator"
    keywords: KeywordSet = DEFAULT_KEYWORDS
    decode: DecodeConfig | None = None
    history_window: int = 3
    max_question_tokens: int = DEFAULT_MAX_QUESTION_TOKENS

    def __post_init__(self):
        if self.decode is None:
            self.decode = DecodeConfig(eos_id=self.model.config.eos_id)
        self.model.eval()

    def answer(self, session: Session, question_text: str) -> RoundRecord:
        """Decode the next answer given the session's windowed history."""
        start = time.perf_counter()
        track = self.corpus.track_for(session.clip_id)
        caption = self.vocab.encode(self.corpus.captions.get(session.clip_id, ""))
        pairs = [(self.vocab.encode(r.question), self.vocab.encode(r.answer))
                 for r in session.rounds]
        question_ids = self.vocab.encode(question_text)
        instance = DialogueInstance(
            clip_id=session.clip_id,
            caption=caption,
            history=build_history(pairs, self.history_window),
            question=question_ids,
            answer=[self.vocab.eos_id],  # placeholder; decoding generates it
            round=len(session.rounds) + 1,
        )
        decision = estimate_relatedness(
            self.vocab.decode_tokens(question_ids), estimator=self.estimator,
            keywords=self.keywords, mode=self.sal_mode)
        audio, video = gate_streams(track, decision)
        with torch.no_grad():
            fused = self.model.embed_av(audio, video)
            enc_out, enc_mask = self.model.encode_instance(fused, instance)
            ids = beam_decode(model_step_fn(self.model, enc_out, enc_mask),
                              self.model.config.bos_id, self.decode)
        return RoundRecord(
            round=instance.round,
            question=" ".join(self.vocab.decode_tokens(question_ids)),
            answer=self.vocab.decode(ids),
            keyword_hit=decision.keyword_hit,
            score=decision.score,
            mode=decision.mode,
            elapsed_ms=(time.perf_counter() - start) * 1000.0,
        )


class SessionStore:
    """In-memory sessions with an optional append-only journal."""

    def __init__(self, journal: str | Path | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._journal = Path(journal) if journal else None
        if self._journal and self._journal.exists():
            self._replay()

    def _replay(self) -> None:
        for line in self._journal.read_text().splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            if entry["event"] == "create":
                self._sessions[entry["session_id"]] = Session(
                    session_id=entry["session_id"], clip_id=entry["clip_id"])
            elif entry["event"] == "round":
                sess = self._sessions.get(entry["session_id"])
                if sess is not None:
                    sess.rounds.append(RoundRecord(**entry["record"]))

    def _log(self, entry: dict) -> None:
        if self._journal:
            with self._lock:
                with open(self._journal, "a") as fh:
                    fh.write(json.dumps(entry) + "\n")

    def create(self, clip_id: str) -> Session:
        session = Session(session_id=uuid.uuid4().hex, clip_id=clip_id)
        with self._lock:
            self._sessions[session.session_id] = session
        self._log({"event": "create", "session_id": session.session_id,
                   "clip_id": clip_id})
        return session

    def get(self, session_id: str) -> Session | None:
        return self._sessions.get(session_id)

    def record(self, session: Session, record: RoundRecord) -> None:
        session.rounds.append(record)
        self._log({"event": "round", "session_id": session.session_id,
                   "record": dataclasses.asdict(record)})


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message,
                                           **extra}})


def build_app(bundle: ServingBundle,
              journal: str | Path | None = None,
              static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="hear dialogue service")
    store = SessionStore(journal=journal)
    app.state.bundle = bundle
    app.state.store = store

    @app.get("/clips")
    def list_clips():
        clips = []
        for track, insts in bundle.corpus.clips:
            if not insts:
                continue
            cid = insts[0].clip_id
            clips.append({"clip_id": cid, "length": track.length,
                          "caption": bundle.corpus.captions.get(cid, "")})
        return {"clips": clips}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        clip_id = body.get("clip_id")
        if not isinstance(clip_id, str):
            return _error(422, "bad_request", "clip_id (string) is required")
        try:
            bundle.corpus.track_for(clip_id)
        except KeyError:
            return _error(404, "clip_not_found", f"unknown clip {clip_id!r}")
        session = store.create(clip_id)
        return {"session_id": session.session_id, "clip_id": clip_id,
                "caption": bundle.corpus.captions.get(clip_id, ""),
                "round_count": 0,
                "history_window": bundle.history_window}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "session_not_found",
                          f"unknown session {session_id!r}")
        return {"session_id": session.session_id, "clip_id": session.clip_id,
                "history_window": bundle.history_window,
                "rounds": [r.to_json() for r in session.rounds]}

    @app.post("/sessions/{session_id}/questions")
    def ask(session_id: str, body: dict):
        session = store.get(session_id)
        if session is None:
            return _error(404, "session_not_found",
                          f"unknown session {session_id!r}")
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            return _error(422, "bad_request", "text (non-empty string) required")
        n_tokens = len(bundle.vocab.encode(text))
        if n_tokens > bundle.max_question_tokens:
            return _error(413, "question_too_long",
                          f"question has {n_tokens} tokens",
                          limit=bundle.max_question_tokens)
        with session.lock:  # rounds of one session run in arrival order
            record = bundle.answer(session, text)
            store.record(session, record)
        return record.to_json()

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")
    return app
