"""Alternating optimization of the gated-dialogue and reconstruction losses.

Odd training iterations step on the gated dialogue loss, even ones on
the reconstruction objective with the surrounding distance supplied by
the epoch curriculum; disabling either branch collapses the alternation
onto the enabled loss.  Validation (each epoch, dialogue loss only,
since reconstruction is a training-only device) selects the checkpoint.

All randomness is derived from the config seed plus loop counters, so a
run is bit-reproducible on a single worker and a restored checkpoint
continues exactly where it left off.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
from sklearn.base import BaseEstimator

from hear.checkpoint import load_checkpoint, save_checkpoint
from hear.data import Corpus, DialogueInstance
from hear.estimator import (AudioRelatednessEstimator, build_estimator_labels,
                            estimate_relatedness)
from hear.gating import SAL_MODES, RelatednessDecision, gate_streams
from hear.keywords import DEFAULT_KEYWORDS, KeywordSet
from hear.masking import sample_mask, surrounding_zero_set
from hear.model import (SEG_QUESTION, DlmConfig, DlmModel, history_text_ids)
from hear.schedule import ScheduleConfig, mask_distance_schedule


class TrainingDiverged(RuntimeError):
    """Raised when a loss goes non-finite; carries a diagnostic snapshot."""

    def __init__(self, message: str, snapshot: dict):
        super().__init__(message)
        self.snapshot = snapshot


@dataclass
class TrainConfig:
    # model
    d_model: int = 64
    n_heads: int = 4
    enc_layers: int = 2
    dec_layers: int = 2
    ffn_dim: int = 0
    max_len: int = 256
    max_answer_len: int = 24
    # optimization
    epochs: int = 15
    batch_size: int = 8
    lr_start: float = 6.24e-5
    lr_end: float = 3.63e-10
    lr_breakpoints: tuple = ()  # optional interior (fraction, lr) points
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    # objectives
    sal_mode: str = "estimator"  # none | keyword | estimator | both
    rle_recon: bool = True
    rle_rub: bool = True
    detach_upper: bool = True
    margin: float = 0.05
    mask_prob: float = 0.1
    schedule_curve: str = "hyperbolic"
    n_max: int = 5
    schedule_e_max: int = 0  # 0: follow epochs
    # data
    history_window: int = 3
    val_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.sal_mode not in SAL_MODES:
            raise ValueError(f"sal_mode must be one of {SAL_MODES}")
        if self.lr_start <= 0 or self.lr_end <= 0:
            raise ValueError("learning rates must be positive")
        if self.lr_end > self.lr_start:
            raise ValueError("learning rate must be non-increasing")
        if not 0 < self.mask_prob < 1:
            raise ValueError("mask_prob must lie in (0, 1)")
        if self.margin <= 0:
            raise ValueError("margin must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        last = self.lr_start
        for frac, lr in self.lr_breakpoints:
            if not 0.0 < frac < 1.0:
                raise ValueError("breakpoint fractions must lie in (0, 1)")
            if lr > last or lr <= 0:
                raise ValueError("breakpoint rates must be positive, non-increasing")
            last = lr

    @property
    def rle_enabled(self) -> bool:
        return self.rle_recon or self.rle_rub

    def schedule(self) -> ScheduleConfig:
        return ScheduleConfig(curve=self.schedule_curve, n_max=self.n_max,
                              e_max=self.schedule_e_max or self.epochs)


def lr_at(step: int, total_steps: int, cfg: TrainConfig) -> float:
    """Piecewise-linear decay from lr_start at step 0 to lr_end at the end.

    Default is a single linear segment; interior breakpoints may be
    supplied as (fraction-of-run, lr) pairs.
    """
    if step < 0 or step > total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    if total_steps == 0:
        return cfg.lr_start
    points = [(0.0, cfg.lr_start), *cfg.lr_breakpoints, (1.0, cfg.lr_end)]
    frac = step / total_steps
    for (f0, l0), (f1, l1) in zip(points, points[1:]):
        if frac <= f1:
            w = 0.0 if f1 == f0 else (frac - f0) / (f1 - f0)
            return l0 + (l1 - l0) * w
    return cfg.lr_end


@dataclass
class TrainState:
    """Loop counters; iteration is 1-based and its parity picks the loss."""

    iteration: int = 0  # completed iterations
    epoch: int = 0      # completed epochs
    best_val: float = math.inf
    best_epoch: int = -1


@dataclass
class _Prepared:
    """Per-instance tensors and gated feature streams, built once."""

    instances: list[DialogueInstance]
    text_ids: list[list[int]] = field(default_factory=list)
    text_seg: list[list[int]] = field(default_factory=list)
    ans_in: list[list[int]] = field(default_factory=list)
    ans_target: list[list[int]] = field(default_factory=list)
    audio: list[np.ndarray] = field(default_factory=list)   # gated
    video: list[np.ndarray] = field(default_factory=list)   # gated
    raw_audio: list[np.ndarray] = field(default_factory=list)
    raw_video: list[np.ndarray] = field(default_factory=list)
    decisions: list[RelatednessDecision] = field(default_factory=list)

    def __len__(self):
        return len(self.instances)


def prepare_instances(
    instances: list[DialogueInstance],
    corpus: Corpus,
    model_cfg: DlmConfig,
    sal_mode: str,
    estimator: AudioRelatednessEstimator | None,
    keywords: KeywordSet = DEFAULT_KEYWORDS,
) -> _Prepared:
    """Precompute text tensors and gated streams for a set of instances.

    Gating decisions depend only on the question and the frozen
    estimator, so they are computed once up front.
    """
    prep = _Prepared(instances=list(instances))
    tracks = {cid: corpus.track_for(cid) for cid in {i.clip_id for i in instances}}
    score_cache: dict[tuple, RelatednessDecision] = {}
    for inst in instances:
        hist_ids, hist_seg = history_text_ids(inst, model_cfg.eos_id)
        q = list(inst.question)
        text = hist_ids + q
        if len(text) + tracks[inst.clip_id].length > model_cfg.max_len:
            raise ValueError(
                f"{inst.clip_id} round {inst.round}: encoder input exceeds "
                f"max_len {model_cfg.max_len}")
        prep.text_ids.append(text)
        prep.text_seg.append(hist_seg + [SEG_QUESTION] * len(q))

        target = list(inst.answer) + [model_cfg.eos_id]
        if len(target) > model_cfg.max_answer_len + 1:
            raise ValueError(
                f"{inst.clip_id} round {inst.round}: answer exceeds "
                f"max_answer_len {model_cfg.max_answer_len}")
        prep.ans_in.append([model_cfg.bos_id] + target[:-1])
        prep.ans_target.append(target)

        key = tuple(inst.question)
        if key not in score_cache:
            q_tokens = corpus.vocab.decode_tokens(inst.question)
            score_cache[key] = estimate_relatedness(
                q_tokens, estimator=estimator, keywords=keywords, mode=sal_mode)
        decision = score_cache[key]
        prep.decisions.append(decision)

        track = tracks[inst.clip_id]
        gated_audio, gated_video = gate_streams(track, decision)
        prep.audio.append(np.asarray(gated_audio, dtype=np.float64))
        prep.video.append(np.asarray(gated_video, dtype=np.float64))
        prep.raw_audio.append(track.audio)
        prep.raw_video.append(track.video)
    return prep


def _pad_ids(rows: list[list[int]], pad: int):
    width = max(len(r) for r in rows)
    ids = torch.full((len(rows), width), pad, dtype=torch.long)
    mask = torch.zeros((len(rows), width), dtype=torch.bool)
    for i, r in enumerate(rows):
        ids[i, : len(r)] = torch.tensor(r, dtype=torch.long)
        mask[i, : len(r)] = True
    return ids, mask


def _pad_seg(rows: list[list[int]], width: int):
    seg = torch.zeros((len(rows), width), dtype=torch.long)
    for i, r in enumerate(rows):
        seg[i, : len(r)] = torch.tensor(r, dtype=torch.long)
    return seg


def _stack_streams(arrays: list[np.ndarray]):
    lengths = [a.shape[0] for a in arrays]
    width = max(lengths)
    dim = arrays[0].shape[1]
    out = np.zeros((len(arrays), width, dim), dtype=np.float64)
    mask = torch.zeros((len(arrays), width), dtype=torch.bool)
    for i, a in enumerate(arrays):
        out[i, : a.shape[0]] = a
        mask[i, : a.shape[0]] = True
    return torch.from_numpy(out), mask


class HearTrainer:
    """Owns the model, optimizer and loop state; one step per call."""

    def __init__(
        self,
        config: TrainConfig,
        corpus: Corpus,
        train_instances: list[DialogueInstance],
        val_instances: list[DialogueInstance],
        estimator: AudioRelatednessEstimator | None = None,
        keywords: KeywordSet = DEFAULT_KEYWORDS,
        model: DlmModel | None = None,
    ):
        torch.set_num_threads(1)  # summation order fixed -> bit reproducible
        self.config = config
        self.corpus = corpus
        self.keywords = keywords
        self.estimator = estimator
        first_track = corpus.clips[0][0]
        self.model_cfg = DlmConfig(
            vocab_size=len(corpus.vocab),
            audio_dim=first_track.audio_dim,
            video_dim=first_track.video_dim,
            d_model=config.d_model, n_heads=config.n_heads,
            enc_layers=config.enc_layers, dec_layers=config.dec_layers,
            ffn_dim=config.ffn_dim, max_len=config.max_len,
            max_answer_len=config.max_answer_len,
            pad_id=corpus.vocab.pad_id, bos_id=corpus.vocab.bos_id,
            eos_id=corpus.vocab.eos_id, seed=config.seed,
        )
        self.model = model if model is not None else DlmModel(self.model_cfg)
        self.optimizer = torch.optim.AdamW(
            self.model.parameters(), lr=config.lr_start,
            betas=(config.beta1, config.beta2), eps=config.eps,
            weight_decay=config.weight_decay)
        self.state = TrainState()
        self.schedule_cfg = config.schedule()
        self.train_prep = prepare_instances(
            train_instances, corpus, self.model_cfg, config.sal_mode,
            estimator, keywords)
        self.val_prep = prepare_instances(
            val_instances, corpus, self.model_cfg, config.sal_mode,
            estimator, keywords)
        steps_per_epoch = math.ceil(len(train_instances) / config.batch_size)
        self.total_iterations = max(1, config.epochs * steps_per_epoch)
        self.steps_per_epoch = steps_per_epoch
        self.metrics_log: list[dict] = []
        self.schedule_trace: list[dict] = []
        self.best_state_dict: dict | None = None

    # ------------------------------------------------------------------
    # loss computation
    # ------------------------------------------------------------------

    def _sal_batch(self, prep: _Prepared, idxs: list[int]):
        audio, av_mask = _stack_streams([prep.audio[i] for i in idxs])
        video, _ = _stack_streams([prep.video[i] for i in idxs])
        text_ids, text_mask = _pad_ids([prep.text_ids[i] for i in idxs],
                                       self.model_cfg.pad_id)
        text_seg = _pad_seg([prep.text_seg[i] for i in idxs], text_ids.shape[1])
        ans_in, ans_mask = _pad_ids([prep.ans_in[i] for i in idxs],
                                    self.model_cfg.pad_id)
        ans_target, _ = _pad_ids([prep.ans_target[i] for i in idxs],
                                 self.model_cfg.pad_id)
        fused = self.model.embed_av(audio, video)
        enc_out, enc_mask = self.model.encode_fused(
            fused, av_mask, text_ids, text_seg, text_mask)
        logits = self.model.decode_logits(enc_out, enc_mask, ans_in, ans_mask)
        logp = torch.log_softmax(logits, dim=-1)
        picked = logp.gather(-1, ans_target.unsqueeze(-1)).squeeze(-1)
        picked = picked.masked_fill(~ans_mask, 0.0)
        token_count = ans_mask.sum()
        loss_sum = -picked.sum()
        return loss_sum / token_count, loss_sum, int(token_count)

    def _encode_streams(self, prep, idxs, audio_arrays, video_arrays):
        audio, av_mask = _stack_streams(audio_arrays)
        video, _ = _stack_streams(video_arrays)
        text_ids, text_mask = _pad_ids([prep.text_ids[i] for i in idxs],
                                       self.model_cfg.pad_id)
        text_seg = _pad_seg([prep.text_seg[i] for i in idxs], text_ids.shape[1])
        fused = self.model.embed_av(audio, video)
        enc_out, _ = self.model.encode_fused(
            fused, av_mask, text_ids, text_seg, text_mask)
        return enc_out

    def _rle_batch(self, prep: _Prepared, idxs: list[int], n: int, iteration: int):
        cfg = self.config
        plans = []
        for k, i in enumerate(idxs):
            L = prep.raw_audio[i].shape[0]
            seed = int(np.random.SeedSequence(
                [cfg.seed, iteration, k]).generate_state(1)[0])
            plans.append(sample_mask(L, cfg.mask_prob, seed, distance=n))

        ctx_audio, targets = [], []
        for plan, i in zip(plans, idxs):
            masked_audio = prep.raw_audio[i].copy()
            masked_audio[plan.masked] = 0.0
            ctx_audio.append(masked_audio)
            targets.append(torch.as_tensor(prep.raw_audio[i][plan.masked]))
        enc_ctx = self._encode_streams(
            prep, idxs, ctx_audio, [prep.raw_video[i] for i in idxs])

        l_ar = []
        for b, (plan, target) in enumerate(zip(plans, targets)):
            recon = self.model.reconstruct_audio(enc_ctx[b], plan.masked)
            l_ar.append(((target - recon) ** 2).sum())
        l_ar = torch.stack(l_ar)

        l_ar_n = None
        if cfg.rle_rub:
            bound_audio, bound_video = [], []
            for plan, i in zip(plans, idxs):
                zero = surrounding_zero_set(
                    plan.masked, prep.raw_audio[i].shape[0], n)
                a = prep.raw_audio[i].copy()
                v = prep.raw_video[i].copy()
                a[zero] = 0.0
                v[zero] = 0.0
                bound_audio.append(a)
                bound_video.append(v)

            def upper():
                enc_n = self._encode_streams(prep, idxs, bound_audio, bound_video)
                rows = []
                for b, (plan, target) in enumerate(zip(plans, targets)):
                    recon = self.model.reconstruct_audio(enc_n[b], plan.masked)
                    rows.append(((target - recon) ** 2).sum())
                return torch.stack(rows)

            if cfg.detach_upper:
                with torch.no_grad():
                    l_ar_n = upper()
            else:
                l_ar_n = upper()

        parts = []
        hinge = None
        if cfg.rle_recon:
            parts.append(l_ar)
        if cfg.rle_rub:
            hinge = torch.clamp(l_ar - l_ar_n + cfg.margin, min=0.0)
            parts.append(hinge)
        loss = sum(p.mean() for p in parts)
        record = {
            "l_ar": float(l_ar.detach().mean()),
            "l_ar_n": float(l_ar_n.detach().mean()) if l_ar_n is not None else None,
            "l_rub": float(hinge.detach().mean()) if hinge is not None else None,
            "n": n,
        }
        return loss, record

    # ------------------------------------------------------------------
    # stepping
    # ------------------------------------------------------------------

    def _branch_for(self, iteration: int) -> str:
        """Loss branch for a 1-based iteration: odd SAL, even RLE.

        With reconstruction disabled every iteration is a dialogue step;
        a hypothetical dialogue-free config would collapse the other way.
        """
        if not self.config.rle_enabled:
            return "sal"
        return "sal" if iteration % 2 == 1 else "rle"

    def step(self, batch_idxs: list[int]) -> dict:
        """One optimizer update; returns the log record for the iteration."""
        iteration = self.state.iteration + 1
        epoch = min(self.state.epoch + 1, self.config.epochs)
        branch = self._branch_for(iteration)
        lr = lr_at(iteration - 1, max(1, self.total_iterations - 1), self.config)
        for group in self.optimizer.param_groups:
            group["lr"] = lr

        if branch == "sal":
            loss, loss_sum, tokens = self._sal_batch(self.train_prep, batch_idxs)
            record = {"loss_sum": float(loss_sum.detach()), "tokens": tokens}
        else:
            n = mask_distance_schedule(
                min(epoch, self.schedule_cfg.e_max), self.schedule_cfg)
            loss, record = self._rle_batch(self.train_prep, batch_idxs, n, iteration)

        if not torch.isfinite(loss):
            snapshot = {"iteration": iteration, "epoch": epoch, "branch": branch,
                        "loss": float(loss.detach()), **record}
            raise TrainingDiverged(
                f"non-finite {branch} loss at iteration {iteration}", snapshot)

        self.optimizer.zero_grad()
        loss.backward()
        self.optimizer.step()
        self.state.iteration = iteration
        record.update({"iteration": iteration, "epoch": epoch,
                       "branch": branch, "loss": float(loss.detach()), "lr": lr})
        self.metrics_log.append(record)
        return record

    def validate(self) -> float:
        """Token-mean dialogue loss over the validation split."""
        if not len(self.val_prep):
            return math.nan
        total, tokens = 0.0, 0
        with torch.no_grad():
            for start in range(0, len(self.val_prep), self.config.batch_size):
                idxs = list(range(start, min(start + self.config.batch_size,
                                             len(self.val_prep))))
                _, loss_sum, count = self._sal_batch(self.val_prep, idxs)
                total += float(loss_sum)
                tokens += count
        return total / max(1, tokens)

    def run_epoch(self) -> dict:
        epoch = self.state.epoch + 1
        if epoch > self.config.epochs:
            raise ValueError("training already finished")
        order = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([self.config.seed, 1000 + epoch])
        )).permutation(len(self.train_prep))
        for start in range(0, len(order), self.config.batch_size):
            self.step([int(i) for i in order[start: start + self.config.batch_size]])
        self.state.epoch = epoch

        val = self.validate()
        if math.isfinite(val) and val < self.state.best_val:
            self.state.best_val = val
            self.state.best_epoch = epoch
            self.best_state_dict = {k: v.detach().clone()
                                    for k, v in self.model.state_dict().items()}
        n = mask_distance_schedule(
            min(epoch, self.schedule_cfg.e_max), self.schedule_cfg)
        rle_rows = [r for r in self.metrics_log
                    if r["branch"] == "rle" and r["epoch"] == epoch]

        def mean_of(key):
            vals = [r[key] for r in rle_rows if r.get(key) is not None]
            return sum(vals) / len(vals) if vals else None

        trace = {"epoch": epoch, "n": n, "val_sal_loss": val,
                 "mean_l_ar": mean_of("l_ar"), "mean_l_ar_n": mean_of("l_ar_n"),
                 "mean_l_rub": mean_of("l_rub")}
        self.schedule_trace.append(trace)
        return trace

    def run(self) -> None:
        while self.state.epoch < self.config.epochs:
            self.run_epoch()

    # ------------------------------------------------------------------
    # checkpointing
    # ------------------------------------------------------------------

    def save(self, path: str | Path, best: bool = False) -> Path:
        model = self.model
        if best and self.best_state_dict is not None:
            model = DlmModel(self.model_cfg)
            model.load_state_dict(self.best_state_dict)
        extra = {
            "train_config": asdict(self.config),
            "state": asdict(self.state),
            "best": best,
        }
        return save_checkpoint(path, model, self.corpus.vocab, extra=extra,
                               optimizer=None if best else self.optimizer)

    @classmethod
    def resume(
        cls,
        path: str | Path,
        corpus: Corpus,
        train_instances: list[DialogueInstance],
        val_instances: list[DialogueInstance],
        estimator: AudioRelatednessEstimator | None = None,
        keywords: KeywordSet = DEFAULT_KEYWORDS,
    ) -> "HearTrainer":
        bundle = load_checkpoint(path)
        cfg = TrainConfig(**bundle.meta["train_config"])
        trainer = cls(cfg, corpus, train_instances, val_instances,
                      estimator=estimator, keywords=keywords, model=bundle.model)
        if bundle.optimizer_state is not None:
            trainer.optimizer.load_state_dict(bundle.optimizer_state)
        trainer.state = TrainState(**bundle.meta["state"])
        return trainer


def split_by_clip(corpus: Corpus, val_fraction: float, seed: int
                  ) -> tuple[list[DialogueInstance], list[DialogueInstance]]:
    """Deterministic clip-level train/validation split (no clip leakage)."""
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([seed, 424242])))
    clip_ids = corpus.clip_ids
    order = rng.permutation(len(clip_ids))
    n_val = int(round(val_fraction * len(clip_ids)))
    if val_fraction > 0 and n_val == 0 and len(clip_ids) > 1:
        n_val = 1
    val_ids = {clip_ids[i] for i in order[:n_val]}
    train, val = [], []
    for inst in corpus.instances:
        (val if inst.clip_id in val_ids else train).append(inst)
    if not train:
        raise ValueError("training split is empty")
    return train, val


@dataclass
class TrainResult:
    model: DlmModel
    estimator: AudioRelatednessEstimator | None
    config: TrainConfig
    metrics_log: list[dict]
    schedule_trace: list[dict]
    best_epoch: int
    best_val: float
    trainer: HearTrainer


def train(
    config: TrainConfig,
    corpus: Corpus,
    estimator: AudioRelatednessEstimator | None = None,
    keywords: KeywordSet = DEFAULT_KEYWORDS,
    out_dir: str | Path | None = None,
    splits: tuple[list[DialogueInstance], list[DialogueInstance]] | None = None,
) -> TrainResult:
    """Full training run; returns the lowest-validation-loss model.

    When the gating mode needs a relatedness estimator and none is
    supplied, one is fitted on the training split's questions first.
    Artifacts written under ``out_dir`` (when given): ``checkpoint.npz``
    (best), ``last.npz``, ``metrics.jsonl``, ``schedule_trace.jsonl``
    and ``config.json``.
    """
    if splits is None:
        splits = split_by_clip(corpus, config.val_fraction, config.seed)
    train_instances, val_instances = splits
    if not train_instances:
        raise ValueError("empty training split")
    if not val_instances:
        raise ValueError("empty validation split")

    if config.sal_mode in ("estimator", "both") and estimator is None:
        questions = [" ".join(corpus.vocab.decode_tokens(i.question))
                     for i in train_instances]
        labeled = build_estimator_labels(questions, keywords=keywords,
                                         seed=config.seed)
        estimator = AudioRelatednessEstimator(seed=config.seed).fit(labeled)

    trainer = HearTrainer(config, corpus, train_instances, val_instances,
                          estimator=estimator, keywords=keywords)
    trainer.run()

    best_model = trainer.model
    if trainer.best_state_dict is not None:
        best_model = DlmModel(trainer.model_cfg)
        best_model.load_state_dict(trainer.best_state_dict)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_checkpoint(out / "checkpoint.npz", best_model, corpus.vocab,
                        extra={"train_config": asdict(config),
                               "state": asdict(trainer.state), "best": True})
        trainer.save(out / "last.npz")
        with open(out / "metrics.jsonl", "w") as fh:
            for row in trainer.metrics_log:
                fh.write(json.dumps(row) + "\n")
        with open(out / "schedule_trace.jsonl", "w") as fh:
            for row in trainer.schedule_trace:
                fh.write(json.dumps(row) + "\n")
        (out / "config.json").write_text(json.dumps(asdict(config), indent=1))

    return TrainResult(
        model=best_model, estimator=estimator, config=config,
        metrics_log=trainer.metrics_log, schedule_trace=trainer.schedule_trace,
        best_epoch=trainer.state.best_epoch, best_val=trainer.state.best_val,
        trainer=trainer,
    )


def hear_step(trainer: HearTrainer, batch_idxs: list[int]) -> tuple[float, TrainState]:
    """One alternating step; returns (loss value, updated state)."""
    record = trainer.step(batch_idxs)
    return record["loss"], trainer.state


class HearDialogue(BaseEstimator):
    """sklearn-style wrapper: fit on a corpus, predict answer strings.

    Construction parameters mirror :class:`TrainConfig` (flat, per
    sklearn convention) plus the decode settings used by ``predict``.
    """

    def __init__(self, d_model: int = 64, n_heads: int = 4, enc_layers: int = 2,
                 dec_layers: int = 2, epochs: int = 15, batch_size: int = 8,
                 lr_start: float = 6.24e-5, lr_end: float = 3.63e-10,
                 sal_mode: str = "estimator", rle_recon: bool = True,
                 rle_rub: bool = True, margin: float = 0.05,
                 mask_prob: float = 0.1, schedule_curve: str = "hyperbolic",
                 n_max: int = 5, val_fraction: float = 0.2,
                 beam_size: int = 5, decode_max_len: int = 20,
                 length_penalty: float = 0.3, seed: int = 0):
        self.d_model = d_model
        self.n_heads = n_heads
        self.enc_layers = enc_layers
        self.dec_layers = dec_layers
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr_start = lr_start
        self.lr_end = lr_end
        self.sal_mode = sal_mode
        self.rle_recon = rle_recon
        self.rle_rub = rle_rub
        self.margin = margin
        self.mask_prob = mask_prob
        self.schedule_curve = schedule_curve
        self.n_max = n_max
        self.val_fraction = val_fraction
        self.beam_size = beam_size
        self.decode_max_len = decode_max_len
        self.length_penalty = length_penalty
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            d_model=self.d_model, n_heads=self.n_heads,
            enc_layers=self.enc_layers, dec_layers=self.dec_layers,
            epochs=self.epochs, batch_size=self.batch_size,
            lr_start=self.lr_start, lr_end=self.lr_end,
            sal_mode=self.sal_mode, rle_recon=self.rle_recon,
            rle_rub=self.rle_rub, margin=self.margin,
            mask_prob=self.mask_prob, schedule_curve=self.schedule_curve,
            n_max=self.n_max, val_fraction=self.val_fraction, seed=self.seed)

    def fit(self, corpus: Corpus, y=None):
        result = train(self._train_config(), corpus)
        self.model_ = result.model
        self.estimator_ = result.estimator
        self.vocab_ = corpus.vocab
        self.result_ = result
        return self

    def predict(self, corpus: Corpus, instances=None) -> list[str]:
        from sklearn.exceptions import NotFittedError

        from hear.evaluation import decode_instances
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit before predict")
        instances = corpus.instances if instances is None else instances
        decoded = decode_instances(
            self.model_, corpus, instances, estimator=self.estimator_,
            sal_mode=self.sal_mode, beam_size=self.beam_size,
            max_len=self.decode_max_len, length_penalty=self.length_penalty)
        return [d["candidate"] for d in decoded]
