"""Cross-modal attention and scene-context aggregation.

Visual object embeddings attend over text token embeddings (queries from
vision, keys/values from text) with standard 1/sqrt(d_k) scaling. The
resulting context vector blends the object average with a scene-level text
prior, and can be folded back into the global visual embedding as an
additive residual.
"""

from dataclasses import dataclass

import numpy as np

from .embeddings import as_matrix, as_vector, l2_normalize
from .errors import (
    ConfigInvalidError,
    DimMismatchError,
    EmptyInputError,
    InvalidShapeError,
    NonFiniteError,
)


@dataclass(frozen=True)
class AttentionParams:
    """Query/key/value projections, each (d, d_k)."""

    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray

    def __post_init__(self):
        shape = self.w_q.shape
        for name in ("w_q", "w_k", "w_v"):
            a = getattr(self, name)
            if a.ndim != 2 or a.shape != shape:
                raise InvalidShapeError(f"{name} must match shape {shape}, got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise NonFiniteError(f"{name} contains NaN or Inf")

    @property
    def d(self) -> int:
        return self.w_q.shape[0]

    @property
    def d_k(self) -> int:
        return self.w_q.shape[1]

    @classmethod
    def identity(cls, d: int) -> "AttentionParams":
        """Untrained default: all three projections are the d x d identity."""
        eye = np.eye(d, dtype=np.float64)
        return cls(w_q=eye, w_k=eye.copy(), w_v=eye.copy())


@dataclass(frozen=True)
class AttentionMap:
    """Row-stochastic attention weights plus the attended value rows.

    weights[i, j] is how much object i attends to token j; each row sums
    to 1. attended[i] is the weight-averaged projected token value for
    object i, of dimension d_k.
    """

    weights: np.ndarray  # (n, m)
    attended: np.ndarray  # (n, d_k)


@dataclass(frozen=True)
class ContextVector:
    """Aggregated scene context: object average plus alpha-weighted text prior."""

    c: np.ndarray
    alpha: float


def cross_attention(params: AttentionParams, objects, tokens) -> AttentionMap:
    """Scaled dot-product attention from objects (queries) onto tokens (keys/values).

    weights = softmax(Q K^T / sqrt(d_k)) row-wise, attended = weights @ V,
    with Q = objects w_q, K = tokens w_k, V = tokens w_v. Rows are softmaxed
    with max-subtraction, so every row sums to 1 for any finite input.
    """
    obj = as_matrix(objects, "objects")
    tok = as_matrix(tokens, "tokens")
    if obj.shape[1] != params.d or tok.shape[1] != params.d:
        raise DimMismatchError(
            f"embeddings have dim {obj.shape[1]}/{tok.shape[1]}, params expect {params.d}"
        )
    q = obj @ params.w_q
    k = tok @ params.w_k
    v = tok @ params.w_v
    logits = (q @ k.T) / np.sqrt(params.d_k)
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    w /= w.sum(axis=1, keepdims=True)
    return AttentionMap(weights=w, attended=w @ v)


def aggregate_context(objects, t_scene, alpha: float) -> ContextVector:
    """Average the object embeddings and add alpha times the scene text prior.

    The result is deliberately not renormalized; its magnitude carries how
    much evidence went in.
    """
    if alpha < 0 or not np.isfinite(alpha):
        raise ConfigInvalidError(f"alpha must be a finite real >= 0, got {alpha}")
    obj = as_matrix(objects, "objects")
    ts = as_vector(t_scene, "t_scene")
    if obj.shape[1] != ts.shape[0]:
        raise DimMismatchError(f"dims differ: objects {obj.shape[1]}, t_scene {ts.shape[0]}")
    c = obj.mean(axis=0) + alpha * ts
    return ContextVector(c=c, alpha=float(alpha))


def contextualize(global_v, ctx: ContextVector, beta: float) -> np.ndarray:
    """Fold the context vector into the global visual embedding.

    Returns l2_normalize(global_v + beta * ctx.c). beta = 0 returns global_v
    unchanged, recovering the context-free scoring path.
    """
    if beta < 0 or not np.isfinite(beta):
        raise ConfigInvalidError(f"beta must be a finite real >= 0, got {beta}")
    g = as_vector(global_v, "global_v")
    if beta == 0.0:
        return g
    c = as_vector(ctx.c, "context")
    if g.shape[0] != c.shape[0]:
        raise DimMismatchError(f"dims differ: global {g.shape[0]}, context {c.shape[0]}")
    return l2_normalize(g + beta * c)
