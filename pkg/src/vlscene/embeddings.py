"""Vector primitives: normalization, cosine similarity, temperature softmax.

All arithmetic is 64-bit. Embeddings are plain 1-D numpy arrays; batches are
2-D arrays with one embedding per row. Functions are pure and safe to call
concurrently.
"""

import numpy as np

from .errors import (
    DimMismatchError,
    EmptyInputError,
    InvalidTauError,
    NonFiniteError,
    ZeroVectorError,
)

# Norms at or below this are treated as zero vectors.
ZERO_NORM_EPS = 1e-12


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float64 array, raising on NaN/Inf."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimMismatchError(f"{name} must be 1-D, got shape {v.shape}")
    if v.size == 0:
        raise EmptyInputError(f"{name} is empty")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return v


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce a list of embeddings (or a 2-D array) to a finite float64 matrix."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimMismatchError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] == 0 or m.shape[1] == 0:
        raise EmptyInputError(f"{name} is empty")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return m


def l2_normalize(e) -> np.ndarray:
    """Scale a vector to unit L2 norm, preserving direction.

    Raises:
        ZeroVectorError: if the norm is at or below 1e-12.
    """
    v = as_vector(e, "embedding")
    n = float(np.linalg.norm(v))
    if n <= ZERO_NORM_EPS:
        raise ZeroVectorError("cannot normalize a zero vector")
    return v / n


def normalize_rows(m) -> np.ndarray:
    """L2-normalize each row of a matrix of embeddings."""
    a = as_matrix(m, "embeddings")
    norms = np.linalg.norm(a, axis=1)
    if np.any(norms <= ZERO_NORM_EPS):
        raise ZeroVectorError("matrix contains a zero row")
    return a / norms[:, None]


def cosine_sim(v, t) -> float:
    """Cosine similarity between two vectors, in [-1, 1].

    Symmetric and invariant to positive rescaling of either argument.
    """
    a = as_vector(v, "left")
    b = as_vector(t, "right")
    if a.shape[0] != b.shape[0]:
        raise DimMismatchError(f"dims differ: {a.shape[0]} vs {b.shape[0]}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na <= ZERO_NORM_EPS or nb <= ZERO_NORM_EPS:
        raise ZeroVectorError("cosine similarity of a zero vector is undefined")
    return float(np.dot(a, b) / (na * nb))


def pairwise_sim(left, right) -> np.ndarray:
    """Cosine similarity between every left/right pair.

    Args:
        left: n embeddings (list of vectors or an n x d array).
        right: m embeddings of the same dimension.

    Returns:
        An n x m matrix with entry (i, j) = cosine_sim(left[i], right[j]).
    """
    ln = normalize_rows(left)
    rn = normalize_rows(right)
    if ln.shape[1] != rn.shape[1]:
        raise DimMismatchError(f"dims differ: {ln.shape[1]} vs {rn.shape[1]}")
    return ln @ rn.T


def stable_softmax(scores, tau: float) -> np.ndarray:
    """Temperature softmax with max-subtraction.

    Computes exp(s_i / tau) / sum_j exp(s_j / tau) after shifting scores by
    their maximum, so arbitrarily large finite scores cannot overflow. Adding
    a constant to every score leaves the result unchanged.

    Args:
        scores: finite real scores, at least one.
        tau: temperature, > 0. Small tau sharpens toward the argmax, large
            tau flattens toward uniform.
    """
    if not np.isfinite(tau) or tau <= 0:
        raise InvalidTauError(f"tau must be positive and finite, got {tau}")
    s = as_vector(scores, "scores")
    z = (s - np.max(s)) / tau
    e = np.exp(z)
    return e / np.sum(e)
