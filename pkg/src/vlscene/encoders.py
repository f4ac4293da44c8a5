"""Deterministic trainable toy encoders for images and text.

A linear projection stands in for each modality encoder: raw image features
(dimension f) map through w_vision to the shared embedding space (dimension
d); token ids index a token table whose rows pass through w_text. Outputs are
L2-normalized, so downstream cosine scoring sees unit vectors. Everything is
a pure function of (params, input), bit-stable across calls.
"""

from dataclasses import dataclass

import numpy as np

from .embeddings import as_vector, l2_normalize
from .errors import (
    DimMismatchError,
    EmptyInputError,
    InvalidShapeError,
    NonFiniteError,
    TokenOutOfRangeError,
)


@dataclass(frozen=True)
class EncoderParams:
    """Weights of the toy encoder pair.

    Attributes:
        w_vision: (f, d) projection from raw image features.
        token_table: (vocab, d) one row per token id.
        w_text: (d, d) projection applied to token rows.
        seed: seed the weights were drawn from (bookkeeping only).
    """

    w_vision: np.ndarray
    token_table: np.ndarray
    w_text: np.ndarray
    seed: int

    def __post_init__(self):
        for name in ("w_vision", "token_table", "w_text"):
            a = getattr(self, name)
            if a.ndim != 2:
                raise InvalidShapeError(f"{name} must be 2-D, got shape {a.shape}")
            if not np.all(np.isfinite(a)):
                raise NonFiniteError(f"{name} contains NaN or Inf")
        d = self.w_vision.shape[1]
        if self.token_table.shape[1] != d or self.w_text.shape != (d, d):
            raise InvalidShapeError(
                "inconsistent shapes: w_vision %s, token_table %s, w_text %s"
                % (self.w_vision.shape, self.token_table.shape, self.w_text.shape)
            )

    @property
    def feature_dim(self) -> int:
        return self.w_vision.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.w_vision.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.token_table.shape[0]


@dataclass(frozen=True)
class RawScene:
    """Pre-encoder synthetic scene: raw object features plus prompt token ids."""

    object_features: np.ndarray  # (n, f)
    token_ids: tuple  # one integer sequence per prompt

    def __post_init__(self):
        if self.object_features.ndim != 2 or self.object_features.shape[0] < 1:
            raise InvalidShapeError("object_features must be a nonempty (n, f) matrix")


def init_params(f: int, d: int, vocab: int, seed: int) -> EncoderParams:
    """Draw fresh encoder weights, deterministically from the seed.

    Each matrix is uniform in [-1/sqrt(rows), 1/sqrt(rows)] where rows is its
    first dimension (f for w_vision, vocab for token_table, d for w_text).
    Draw order is fixed, so identical arguments give bit-identical params.
    """
    if f < 1 or d < 1 or vocab < 1:
        raise InvalidShapeError(f"dims must be >= 1, got f={f} d={d} vocab={vocab}")
    rng = np.random.default_rng(seed)
    w_vision = rng.uniform(-1.0, 1.0, size=(f, d)) / np.sqrt(f)
    token_table = rng.uniform(-1.0, 1.0, size=(vocab, d)) / np.sqrt(vocab)
    w_text = rng.uniform(-1.0, 1.0, size=(d, d)) / np.sqrt(d)
    return EncoderParams(w_vision=w_vision, token_table=token_table, w_text=w_text, seed=seed)


def encode_image(params: EncoderParams, features) -> np.ndarray:
    """Project raw image features into the shared space and normalize.

    Positively homogeneous in the input: scaling features by any a > 0 gives
    the same embedding.
    """
    x = as_vector(features, "features")
    if x.shape[0] != params.feature_dim:
        raise DimMismatchError(
            f"features have dim {x.shape[0]}, encoder expects {params.feature_dim}"
        )
    return l2_normalize(x @ params.w_vision)


def encode_text(params: EncoderParams, token_ids) -> tuple[np.ndarray, np.ndarray]:
    """Encode a token-id sequence.

    Returns:
        (pooled, tokens) where tokens is an (m, d) matrix of per-token unit
        embeddings and pooled is the unit-normalized mean of the raw
        (pre-normalization) token projections.
    """
    ids = np.asarray(token_ids, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise EmptyInputError("token_ids must be a nonempty 1-D sequence")
    if np.any(ids < 0) or np.any(ids >= params.vocab_size):
        raise TokenOutOfRangeError(
            f"token ids must lie in [0, {params.vocab_size}), got {ids.tolist()}"
        )
    raw = params.token_table[ids] @ params.w_text  # (m, d)
    tokens = np.stack([l2_normalize(row) for row in raw])
    pooled = l2_normalize(raw.mean(axis=0))
    return pooled, tokens
