"""Compact encoder-decoder dialogue model over fused audio-visual input.

The encoder runs over the concatenation [fused A/V sequence ; history ;
question]; a causal decoder generates the answer.  A single projection
matrix W of shape (audio_dim + video_dim) x d embeds the concatenated
per-frame audio and video features, and every fusion variant (plain,
keyword-gated, score-calibrated) goes through this same W.

A two-layer perceptron on top of the encoder states serves as the
audio-reconstruction head used by the masked-reconstruction losses.

Everything runs in float64 on CPU; parameter init is symmetric uniform
scaled by fan-in and fully seed-controlled, so identically configured
models are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from hear.data import DialogueInstance

# segments of the encoder input
SEG_AV, SEG_HISTORY, SEG_QUESTION = 0, 1, 2

_NEG = -1e30  # additive mask value; exp() underflows to exactly 0 in float64


@dataclass
class DlmConfig:
    vocab_size: int
    audio_dim: int = 8
    video_dim: int = 32
    d_model: int = 64
    n_heads: int = 4
    enc_layers: int = 2
    dec_layers: int = 2
    ffn_dim: int = 0  # 0 means 4 * d_model
    max_len: int = 256
    max_answer_len: int = 32
    pad_id: int = 0
    bos_id: int = 1
    eos_id: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.ffn_dim == 0:
            self.ffn_dim = 4 * self.d_model
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        for name in ("vocab_size", "audio_dim", "video_dim", "d_model",
                     "n_heads", "enc_layers", "dec_layers", "max_len",
                     "max_answer_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


class JointEmbedder(nn.Module):
    """Single shared projection of [audio || video] rows into d dims."""

    def __init__(self, audio_dim: int, video_dim: int, d_model: int):
        super().__init__()
        self.audio_dim = audio_dim
        self.video_dim = video_dim
        self.weight = nn.Parameter(
            torch.empty(audio_dim + video_dim, d_model, dtype=torch.float64))

    def forward(self, audio: torch.Tensor, video: torch.Tensor) -> torch.Tensor:
        if audio.shape[-1] != self.audio_dim or video.shape[-1] != self.video_dim:
            raise ValueError(
                f"stream dims ({audio.shape[-1]}, {video.shape[-1]}) do not "
                f"match projection ({self.audio_dim}, {self.video_dim})")
        return torch.cat([audio, video], dim=-1) @ self.weight


class MultiHeadAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.q = nn.Linear(d_model, d_model)
        self.k = nn.Linear(d_model, d_model)
        self.v = nn.Linear(d_model, d_model)
        self.out = nn.Linear(d_model, d_model)

    def forward(self, x_q, x_kv, mask=None):
        # mask: bool (B, Tq, Tk) or (Tq, Tk), True = attend
        B, Tq, _ = x_q.shape
        Tk = x_kv.shape[1]
        q = self.q(x_q).view(B, Tq, self.n_heads, self.head_dim).transpose(1, 2)
        k = self.k(x_kv).view(B, Tk, self.n_heads, self.head_dim).transpose(1, 2)
        v = self.v(x_kv).view(B, Tk, self.n_heads, self.head_dim).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        if mask is not None:
            if mask.dim() == 2:
                mask = mask.unsqueeze(0)
            scores = scores.masked_fill(~mask.unsqueeze(1), _NEG)
        att = torch.softmax(scores, dim=-1)
        ctx = (att @ v).transpose(1, 2).reshape(B, Tq, -1)
        return self.out(ctx)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, ffn_dim: int):
        super().__init__()
        self.fc1 = nn.Linear(d_model, ffn_dim)
        self.fc2 = nn.Linear(ffn_dim, d_model)

    def forward(self, x):
        return self.fc2(F.gelu(self.fc1(x)))


class EncoderLayer(nn.Module):
    def __init__(self, d_model: int, n_heads: int, ffn_dim: int):
        super().__init__()
        self.attn = MultiHeadAttention(d_model, n_heads)
        self.ffn = FeedForward(d_model, ffn_dim)
        self.ln1 = nn.LayerNorm(d_model)
        self.ln2 = nn.LayerNorm(d_model)

    def forward(self, x, mask):
        x = self.ln1(x + self.attn(x, x, mask))
        return self.ln2(x + self.ffn(x))


class DecoderLayer(nn.Module):
    def __init__(self, d_model: int, n_heads: int, ffn_dim: int):
        super().__init__()
        self.self_attn = MultiHeadAttention(d_model, n_heads)
        self.cross_attn = MultiHeadAttention(d_model, n_heads)
        self.ffn = FeedForward(d_model, ffn_dim)
        self.ln1 = nn.LayerNorm(d_model)
        self.ln2 = nn.LayerNorm(d_model)
        self.ln3 = nn.LayerNorm(d_model)

    def forward(self, x, enc_out, causal_mask, cross_mask):
        x = self.ln1(x + self.self_attn(x, x, causal_mask))
        x = self.ln2(x + self.cross_attn(x, enc_out, cross_mask))
        return self.ln3(x + self.ffn(x))


class DlmModel(nn.Module):
    """Dialogue language model with an audio-reconstruction head."""

    def __init__(self, config: DlmConfig):
        super().__init__()
        self.config = config
        d = config.d_model
        self.joint = JointEmbedder(config.audio_dim, config.video_dim, d)
        self.tok_emb = nn.Embedding(config.vocab_size, d)
        self.pos_emb = nn.Embedding(config.max_len, d)
        self.seg_emb = nn.Embedding(3, d)
        self.dec_pos_emb = nn.Embedding(config.max_answer_len + 1, d)
        self.enc_norm = nn.LayerNorm(d)
        self.dec_norm = nn.LayerNorm(d)
        self.encoder = nn.ModuleList(
            EncoderLayer(d, config.n_heads, config.ffn_dim)
            for _ in range(config.enc_layers))
        self.decoder = nn.ModuleList(
            DecoderLayer(d, config.n_heads, config.ffn_dim)
            for _ in range(config.dec_layers))
        self.lm_head = nn.Linear(d, config.vocab_size)
        self.recon_head = nn.Sequential(
            nn.Linear(d, d), nn.GELU(), nn.Linear(d, config.audio_dim))
        self.to(torch.float64)
        self.reset_parameters(config.seed)

    def reset_parameters(self, seed: int) -> None:
        """Symmetric uniform init scaled by fan-in, deterministic per seed."""
        gen = torch.Generator().manual_seed(seed)
        for name, p in self.named_parameters():
            with torch.no_grad():
                if p.dim() >= 2:
                    # joint.weight is applied as x @ W, so its input dim
                    # is axis 0; Linear/Embedding weights use axis 1
                    fan_in = p.shape[0] if name.startswith("joint") else p.shape[1]
                    bound = 1.0 / math.sqrt(fan_in)
                    p.uniform_(-bound, bound, generator=gen)
                elif "weight" in name:  # layer norm gains
                    p.fill_(1.0)
                else:
                    p.zero_()

    @property
    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    # ------------------------------------------------------------------
    # embedding and encoding
    # ------------------------------------------------------------------

    def embed_av(self, audio, video) -> torch.Tensor:
        """Project per-frame [audio || video] rows into the model space.

        Accepts (L, dim) or (B, L, dim) arrays/tensors; linear in both
        streams.
        """
        audio = torch.as_tensor(audio, dtype=torch.float64)
        video = torch.as_tensor(video, dtype=torch.float64)
        if audio.shape[:-1] != video.shape[:-1]:
            raise ValueError("audio and video must share leading shape")
        return self.joint(audio, video)

    def encode_fused(self, fused, av_mask, text_ids, text_seg, text_mask):
        """Encoder over [fused A/V ; history ; question].

        fused: (B, L, d) already-projected A/V rows.
        av_mask/text_mask: bool, True on valid positions.
        Returns (enc_out (B, S, d), enc_mask (B, S)).
        """
        if fused.dim() == 2:
            fused = fused.unsqueeze(0)
        B, L, _ = fused.shape
        T = text_ids.shape[1]
        S = L + T
        if S > self.config.max_len:
            raise ValueError(
                f"encoder input length {S} exceeds max_len {self.config.max_len}")
        av = fused + self.seg_emb.weight[SEG_AV]
        txt = self.tok_emb(text_ids) + self.seg_emb(text_seg)
        x = torch.cat([av, txt], dim=1)
        pos = torch.arange(S)
        x = self.enc_norm(x + self.pos_emb(pos).unsqueeze(0))
        enc_mask = torch.cat([av_mask, text_mask], dim=1)
        attn_mask = enc_mask.unsqueeze(1).expand(B, S, S)
        for layer in self.encoder:
            x = layer(x, attn_mask)
        return x, enc_mask

    def decode_logits(self, enc_out, enc_mask, ans_in, ans_mask=None):
        """Causal decoder logits (B, Ta, vocab) for teacher-forced input."""
        B, Ta = ans_in.shape
        if Ta > self.config.max_answer_len + 1:
            raise ValueError(
                f"answer length {Ta} exceeds max_answer_len "
                f"{self.config.max_answer_len}")
        x = self.tok_emb(ans_in) + self.dec_pos_emb(torch.arange(Ta)).unsqueeze(0)
        x = self.dec_norm(x)
        causal = torch.tril(torch.ones(Ta, Ta, dtype=torch.bool))
        if ans_mask is not None:
            causal = causal.unsqueeze(0) & ans_mask.unsqueeze(1)
        cross = enc_mask.unsqueeze(1).expand(B, Ta, enc_mask.shape[1])
        for layer in self.decoder:
            x = layer(x, enc_out, causal, cross)
        return self.lm_head(x)

    def reconstruct_audio(self, enc_out, masked_indices) -> torch.Tensor:
        """Reconstructed audio rows at the masked frame indices.

        enc_out: (S, d) or (B, S, d) with the A/V block occupying the
        first L positions; masked_indices: 1-D index sequence into the
        frame axis.  Output rows follow the order of ``masked_indices``.
        """
        idx = torch.as_tensor(masked_indices, dtype=torch.long)
        if idx.numel() == 0:
            raise ValueError("masked_indices must be non-empty")
        if idx.min() < 0:
            raise IndexError("masked index out of range")
        states = enc_out[..., idx, :]
        return self.recon_head(states)

    # ------------------------------------------------------------------
    # single-instance convenience used by the op-level contracts
    # ------------------------------------------------------------------

    def text_inputs(self, instance: DialogueInstance):
        """History and question token/segment tensors for one instance."""
        ids, segs = history_text_ids(instance, self.config.eos_id)
        q = list(instance.question)
        ids = ids + q
        segs = segs + [SEG_QUESTION] * len(q)
        text_ids = torch.tensor([ids], dtype=torch.long)
        text_seg = torch.tensor([segs], dtype=torch.long)
        text_mask = torch.ones_like(text_ids, dtype=torch.bool)
        return text_ids, text_seg, text_mask

    def encode_instance(self, fused, instance: DialogueInstance):
        if fused.dim() == 2:
            fused = fused.unsqueeze(0)
        av_mask = torch.ones(fused.shape[:2], dtype=torch.bool)
        text_ids, text_seg, text_mask = self.text_inputs(instance)
        return self.encode_fused(fused, av_mask, text_ids, text_seg, text_mask)

    def forward(self, fused, instance: DialogueInstance, answer=None,
                include_eos: bool = False) -> torch.Tensor:
        """Teacher-forced logits for an answer, shape (len(answer), vocab).

        With ``include_eos`` the target is extended by the end token and
        one more logit row is produced (the training setup).
        """
        answer = list(instance.answer if answer is None else answer)
        target = answer + ([self.config.eos_id] if include_eos else [])
        if not target:
            raise ValueError("answer must contain at least one token")
        ans_in = torch.tensor([[self.config.bos_id] + target[:-1]], dtype=torch.long)
        enc_out, enc_mask = self.encode_instance(fused, instance)
        return self.decode_logits(enc_out, enc_mask, ans_in)[0]


def history_text_ids(instance: DialogueInstance, eos_id: int):
    """Flatten caption + windowed Q/A pairs, separated by the end token."""
    ids = list(instance.caption)
    for q, a in instance.history:
        ids += [eos_id] + list(q) + [eos_id] + list(a)
    return ids, [SEG_HISTORY] * len(ids)


def dlm_loss(logits: torch.Tensor, answer, reduction: str = "mean") -> torch.Tensor:
    """Next-word cross-entropy over the answer tokens.

    ``logits`` is (T, vocab) or (B, T, vocab); ``answer`` the matching
    target ids.  The mean form is the training objective; the sum form
    equals the negative log-probability of the whole answer and is what
    the metrics logs record.
    """
    target = torch.as_tensor(answer, dtype=torch.long)
    if logits.dim() == 2:
        logits = logits.unsqueeze(0)
        target = target.unsqueeze(0)
    logp = F.log_softmax(logits, dim=-1)
    picked = logp.gather(-1, target.unsqueeze(-1)).squeeze(-1)
    if reduction == "mean":
        return -picked.mean()
    if reduction == "sum":
        return -picked.sum()
    raise ValueError(f"unknown reduction {reduction!r}")
