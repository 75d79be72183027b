"""Exact discrete information measures.

All logarithms are base 2. Entries below ``ZERO_CUTOFF`` are treated as
exact zeros so that ``0 * log 0 = 0`` holds without underflow.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, InvalidDistributionError, ShapeError

SUM_TOLERANCE = 1e-12
ZERO_CUTOFF = 1e-300


def as_prob_vector(p, tol: float = SUM_TOLERANCE) -> np.ndarray:
    """Validate ``p`` as a probability vector and return it as a float array.

    No silent renormalisation is performed; use :func:`normalize` for that.
    """
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-d probability vector, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidDistributionError("empty probability vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistributionError("probability vector has non-finite entries")
    if np.any(arr < 0):
        raise InvalidDistributionError(f"negative entry {arr.min()!r}")
    total = math.fsum(arr.tolist()) if arr.size < 4096 else float(np.sum(arr))
    if abs(total - 1.0) > tol:
        raise InvalidDistributionError(f"entries sum to {total!r}, not 1")
    return arr


def normalize(weights) -> np.ndarray:
    """Scale non-negative weights to sum to one."""
    arr = np.asarray(weights, dtype=float).ravel()
    if np.any(arr < 0):
        raise InvalidDistributionError("weights must be non-negative")
    total = arr.sum()
    if total <= 0:
        raise InvalidDistributionError("weights sum to zero")
    return arr / total


def _entropy_unchecked(arr: np.ndarray) -> float:
    nz = arr[arr > ZERO_CUTOFF]
    return float(max(0.0, -np.sum(nz * np.log2(nz))))


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, ``-sum p_i log2 p_i``.

    Parameters
    ----------
    p : array_like
        Probability vector. Must be non-negative and sum to one within
        ``SUM_TOLERANCE``.

    Returns
    -------
    float
        Entropy in ``[0, log2(len(p))]``.
    """
    return _entropy_unchecked(as_prob_vector(p))


def binary_entropy(t: float) -> float:
    """``-t log2 t - (1 - t) log2 (1 - t)`` for ``t`` in [0, 1]."""
    t = float(t)
    if not 0.0 <= t <= 1.0 or math.isnan(t):
        raise DomainError(f"binary entropy needs t in [0, 1], got {t!r}")
    out = 0.0
    for q in (t, 1.0 - t):
        if q > ZERO_CUTOFF:
            out -= q * math.log2(q)
    return out


def mutual_information_binary(P, Q, prior: float = 0.5) -> float:
    """Mutual information I(X; Y) for a binary X.

    ``P`` and ``Q`` are the laws of Y given X = 0 and X = 1, and ``prior``
    is Pr[X = 0]. Computed as H(X) - H(X | Y) from the exact joint table.
    """
    P = as_prob_vector(P)
    Q = as_prob_vector(Q)
    if P.shape != Q.shape:
        raise ShapeError(f"length mismatch: {P.size} vs {Q.size}")
    prior = float(prior)
    if not 0.0 <= prior <= 1.0:
        raise DomainError(f"prior must lie in [0, 1], got {prior!r}")

    j0 = prior * P
    j1 = (1.0 - prior) * Q
    py = j0 + j1
    # H(X | Y) = sum over joint cells of -p(x, y) log2 p(x | y)
    cond = 0.0
    for j in (j0, j1):
        m = j > ZERO_CUTOFF
        cond += float(np.sum(j[m] * np.log2(py[m] / j[m])))
    return max(0.0, binary_entropy(prior) - cond)


def kl_divergence(p, q) -> float:
    """Relative entropy D(p || q) in bits; ``inf`` if p is not dominated by q."""
    p = as_prob_vector(p)
    q = as_prob_vector(q)
    if p.shape != q.shape:
        raise ShapeError(f"length mismatch: {p.size} vs {q.size}")
    mask = p > ZERO_CUTOFF
    if np.any(q[mask] <= ZERO_CUTOFF):
        return math.inf
    return float(np.sum(p[mask] * (np.log2(p[mask]) - np.log2(q[mask]))))
