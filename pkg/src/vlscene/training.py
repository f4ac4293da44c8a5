"""Contrastive alignment training for the toy encoders.

The objective is the image-to-text InfoNCE loss over in-batch negatives:
each image's logit row is its cosine to every text in the batch divided by
the temperature, and the loss is the mean cross-entropy of picking the
image's own text. Gradients are derived analytically through the cosine
and the L2-normalization of both encoder branches, and are validated
against central finite differences in the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .encoders import EncoderParams
from .errors import (
    ConfigInvalidError,
    EmptyBatchError,
    InvalidTauError,
    TokenOutOfRangeError,
    ZeroVectorError,
)


@dataclass(frozen=True)
class Batch:
    """B positive (image features, token ids) pairs; other rows act as negatives."""

    pairs: tuple  # of (features: (f,) array, token_ids: int sequence)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if len(self.pairs) == 0:
            raise EmptyBatchError("batch has no pairs")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 200
    lr: float = 0.05
    tau: float = 0.07
    seed: int = 0

    def validate(self) -> "TrainConfig":
        if self.steps < 0:
            raise ConfigInvalidError(f"steps must be >= 0, got {self.steps}")
        if self.lr < 0 or not np.isfinite(self.lr):
            raise ConfigInvalidError(f"lr must be >= 0, got {self.lr}")
        if self.tau <= 0 or not np.isfinite(self.tau):
            raise InvalidTauError(f"tau must be > 0, got {self.tau}")
        return self


@dataclass(frozen=True)
class EncoderGrads:
    """Partial derivatives of the loss, same shapes as EncoderParams."""

    w_vision: np.ndarray
    token_table: np.ndarray
    w_text: np.ndarray


def _norm_or_raise(x: np.ndarray, what: str) -> float:
    n = float(np.linalg.norm(x))
    if n <= 1e-12:
        raise ZeroVectorError(f"{what} projects to a zero vector")
    return n


def _forward(params: EncoderParams, batch: Batch, tau: float):
    """Shared forward pass; returns the loss and everything backward needs."""
    if tau <= 0 or not np.isfinite(tau):
        raise InvalidTauError(f"tau must be > 0, got {tau}")
    b = len(batch)
    feats = np.stack([np.asarray(p[0], dtype=np.float64) for p in batch.pairs])  # (B, f)
    id_seqs = []
    for _, ids in batch.pairs:
        arr = np.asarray(ids, dtype=np.int64)
        if arr.size == 0:
            raise EmptyBatchError("a pair has an empty token sequence")
        if np.any(arr < 0) or np.any(arr >= params.vocab_size):
            raise TokenOutOfRangeError(f"token ids out of range: {arr.tolist()}")
        id_seqs.append(arr)

    pre_v = feats @ params.w_vision  # (B, d)
    v_norms = np.array([_norm_or_raise(row, "an image") for row in pre_v])
    v = pre_v / v_norms[:, None]

    pooled_raw = np.stack([
        (params.token_table[ids] @ params.w_text).mean(axis=0) for ids in id_seqs
    ])  # (B, d)
    t_norms = np.array([_norm_or_raise(row, "a text") for row in pooled_raw])
    t = pooled_raw / t_norms[:, None]

    logits = (v @ t.T) / tau
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    softmax = exp / exp.sum(axis=1, keepdims=True)
    # -log softmax[i, i], computed in shifted space for stability.
    per_pair = np.log(exp.sum(axis=1)) - shifted[np.arange(b), np.arange(b)]
    loss = float(per_pair.mean())
    return loss, (feats, id_seqs, pre_v, v_norms, v, pooled_raw, t_norms, t, softmax)


def contrastive_loss(params: EncoderParams, batch: Batch, tau: float) -> float:
    """Mean InfoNCE loss of the batch. Zero exactly when B == 1."""
    return _forward(params, batch, tau)[0]


def loss_and_gradients(params: EncoderParams, batch: Batch, tau: float):
    """Loss plus analytic gradients for every encoder weight."""
    loss, cache = _forward(params, batch, tau)
    feats, id_seqs, _pre_v, v_norms, v, _pooled_raw, t_norms, t, softmax = cache
    b = len(batch)

    g_logits = (softmax - np.eye(b)) / b  # d loss / d logits
    g_sim = g_logits / tau

    g_v = g_sim @ t  # (B, d)
    g_t = g_sim.T @ v  # (B, d)

    # Back through v = pre_v / ||pre_v||: project out the radial component.
    g_pre_v = (g_v - (g_v * v).sum(axis=1, keepdims=True) * v) / v_norms[:, None]
    grad_w_vision = feats.T @ g_pre_v

    grad_w_text = np.zeros_like(params.w_text)
    grad_token_table = np.zeros_like(params.token_table)
    for j, ids in enumerate(id_seqs):
        g_pooled = (g_t[j] - float(np.dot(g_t[j], t[j])) * t[j]) / t_norms[j]
        g_token_row = g_pooled / ids.size  # gradient of each raw token projection
        rows = params.token_table[ids]  # (m, d)
        grad_w_text += np.outer(rows.sum(axis=0), g_token_row)
        np.add.at(grad_token_table, ids, g_token_row @ params.w_text.T)

    return loss, EncoderGrads(
        w_vision=grad_w_vision,
        token_table=grad_token_table,
        w_text=grad_w_text,
    )


def loss_gradients(params: EncoderParams, batch: Batch, tau: float) -> EncoderGrads:
    """Analytic gradients of contrastive_loss with respect to every weight."""
    return loss_and_gradients(params, batch, tau)[1]


def train_toy(params: EncoderParams, data, cfg: TrainConfig):
    """Plain gradient descent over the given batches.

    Batch order is a fixed seed-derived permutation cycled for cfg.steps
    steps. Returns the final parameters and the per-step pre-update loss
    trace. steps = 0 returns the input unchanged with an empty trace.
    """
    cfg = cfg.validate()
    batches = list(data)
    if not batches:
        raise EmptyBatchError("no training batches")
    if cfg.steps == 0:
        return params, []
    order = np.random.default_rng(cfg.seed).permutation(len(batches))
    trace = []
    current = params
    for step in range(cfg.steps):
        batch = batches[order[step % len(batches)]]
        loss, grads = loss_and_gradients(current, batch, cfg.tau)
        trace.append(loss)
        current = EncoderParams(
            w_vision=current.w_vision - cfg.lr * grads.w_vision,
            token_table=current.token_table - cfg.lr * grads.token_table,
            w_text=current.w_text - cfg.lr * grads.w_text,
            seed=current.seed,
        )
    return current, trace


def dataset_loss(params: EncoderParams, data, tau: float) -> float:
    """Mean contrastive loss across a list of batches."""
    batches = list(data)
    if not batches:
        raise EmptyBatchError("no batches")
    return float(np.mean([contrastive_loss(params, b, tau) for b in batches]))
