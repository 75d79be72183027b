"""Bounds on Eve's information about the final key when the generators are imperfect.

Two evaluations are offered for every budget:

* ``"leading"``: the leading-order closed form
  ``eps0 + (4k + 1) sqrt(epsA / 2) [+ (4k + 1) sqrt(epsB / 2)]``, with the
  higher-order terms dropped.
* ``"exact"``: the same entropy-floor chain evaluated with the numerically
  inverted ratio envelope ``Delta = delta_max(eps / 2)``, i.e.
  ``eps0 + Delta k + (1 + Delta) log2(1 + Delta)`` per imperfect party.
  No asymptotic terms are left out, so it is the number to compare against
  simulated instances.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .delta_bound import delta_max
from .errors import DomainError, InconsistentPosteriorError, SaturationError, ShapeError
from .info_metrics import ZERO_CUTOFF, as_prob_vector, shannon_entropy

VARIANTS = ("leading", "exact")
POSTERIOR_TOL = 1e-9


@dataclass(frozen=True)
class SecurityBudget:
    epsilon0: float
    k: int
    epsilonA: float = 0.0
    epsilonB: float = 0.0

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or isinstance(self.k, bool) or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        for name in ("epsilon0", "epsilonA", "epsilonB"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and non-negative, got {v!r}")


@dataclass(frozen=True)
class KeyPosterior:
    """Eve's key laws given a perfect (``P``) and an imperfect (``Q``) generator."""

    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        P = as_prob_vector(self.P, tol=POSTERIOR_TOL)
        Q = as_prob_vector(self.Q, tol=POSTERIOR_TOL)
        if P.shape != Q.shape:
            raise ShapeError(f"P has {P.size} keys, Q has {Q.size}")
        k = math.log2(P.size)
        if k != int(k) or P.size < 2:
            raise ShapeError(f"key space of size {P.size} is not 2**k with k >= 1")
        if np.any((P <= ZERO_CUTOFF) & (Q > ZERO_CUTOFF)):
            raise InconsistentPosteriorError(
                "Q puts weight on a key that P excludes: the ratio is unbounded"
            )
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)

    @property
    def k(self) -> int:
        return int(round(math.log2(self.P.size)))

    @property
    def deltas(self) -> np.ndarray:
        """``Q_j / P_j - 1`` where ``P_j > 0``; keys with ``P_j = Q_j = 0`` get 0."""
        out = np.zeros_like(self.P)
        m = self.P > ZERO_CUTOFF
        out[m] = self.Q[m] / self.P[m] - 1.0
        return out

    @property
    def max_abs_delta(self) -> float:
        return float(np.max(np.abs(self.deltas)))


def entropy_floor(P, Delta: float) -> float:
    """Smallest entropy any ``Q`` with ``|Q_j / P_j - 1| <= Delta`` can have.

    Returns ``(1 - Delta) H(P) - (1 + Delta) log2(1 + Delta)``.
    """
    if not Delta >= 0:
        raise DomainError(f"Delta must be non-negative, got {Delta!r}")
    return (1.0 - Delta) * shannon_entropy(P) - (1.0 + Delta) * math.log2(1.0 + Delta)


def leakage_from_delta(k: int, Delta: float) -> float:
    """Extra information a ratio envelope ``Delta`` can buy on a ``k``-bit key."""
    return Delta * k + (1.0 + Delta) * math.log2(1.0 + Delta)


def bound_from_delta(epsilon0: float, k: int, Delta: float) -> float:
    """``eps0 + Delta k + (1 + Delta) log2(1 + Delta)``.

    Follows from ``H(Q) >= (1 - Delta)(k - eps0) - (1 + Delta) log2(1 + Delta)``
    after dropping the non-positive ``-Delta eps0`` term.
    """
    return epsilon0 + leakage_from_delta(k, Delta)


def _party_term(k: int, eps: float, variant: str) -> float:
    if eps == 0.0:
        return 0.0
    if variant == "leading":
        return (4 * k + 1) * math.sqrt(eps / 2.0)
    if eps / 2.0 >= 1.0:
        raise SaturationError(f"entropy deficit {eps!r} >= 2 bits leaves no finite ratio envelope")
    return leakage_from_delta(k, delta_max(eps / 2.0))


def _check_variant(variant: str):
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def theorem_bound(b: SecurityBudget, variant: str = "leading") -> float:
    """Bound on Eve's key information when only Alice's generator is imperfect."""
    _check_variant(variant)
    if b.epsilonB != 0.0:
        raise DomainError("theorem_bound covers epsilonB = 0; use corollary_bound")
    return b.epsilon0 + _party_term(b.k, b.epsilonA, variant)


def corollary_bound(b: SecurityBudget, variant: str = "leading") -> float:
    """Bound when both Alice's and Bob's generators are imperfect."""
    _check_variant(variant)
    return b.epsilon0 + _party_term(b.k, b.epsilonA, variant) + _party_term(b.k, b.epsilonB, variant)


@dataclass(frozen=True)
class BoundReport:
    epsilon0: float
    k: int
    epsilonA: float
    epsilonB: float
    leading: float
    exact: float | None
    delta_A: float | None
    delta_B: float | None
    saturated: bool
    vacuous: bool

    def to_dict(self) -> dict:
        return asdict(self)


def bound_report(b: SecurityBudget) -> BoundReport:
    """Both variants plus diagnostics; a saturated exact variant is reported as ``None``."""
    leading = corollary_bound(b, "leading")
    try:
        exact = corollary_bound(b, "exact")
        dA = delta_max(b.epsilonA / 2.0)
        dB = delta_max(b.epsilonB / 2.0)
        saturated = False
    except SaturationError:
        exact = dA = dB = None
        saturated = True
    # Eve never learns more than k bits, so any bound past k says nothing
    vacuous = leading > b.k or exact is None or exact > b.k
    return BoundReport(b.epsilon0, int(b.k), b.epsilonA, b.epsilonB, leading, exact, dA, dB, saturated, vacuous)


def eta_from_posterior(kp: KeyPosterior, epsilon_prime: float) -> float:
    """Eve's information ``k - H(Q)`` about the key under the imperfect generator.

    ``epsilon_prime`` is her information under the perfect one; the posterior
    must satisfy ``H(P) >= k - epsilon_prime``.
    """
    k = kp.k
    if shannon_entropy(kp.P) < k - epsilon_prime - POSTERIOR_TOL:
        raise InconsistentPosteriorError(
            f"H(P) = {shannon_entropy(kp.P)!r} is below k - epsilon' = {k - epsilon_prime!r}"
        )
    return k - shannon_entropy(kp.Q)


def posterior_bound(kp: KeyPosterior, epsilon_prime: float) -> float:
    """Right-hand side of the single-party bound chain for this posterior's own ``max |delta_j|``."""
    return bound_from_delta(epsilon_prime, kp.k, kp.max_abs_delta)
