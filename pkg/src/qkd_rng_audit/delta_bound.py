"""Per-key probability ratios and the Holevo-limited ratio envelope.

For one candidate final key ``j``, Eve holds ``P_j`` (uniform generator) and
``Q_j`` (imperfect generator) and ``delta_j = Q_j / P_j - 1``. Conditioned on
that key, her information about which generator was used is
``1 - H(1 / (2 + delta))``; keeping that below ``h`` caps ``|delta|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, SaturationError

BISECT_TOL = 1e-12
BISECT_MAX_ITER = 2000
SMALL_H_CONSTANT = math.sqrt(8.0 * math.log(2.0))


@dataclass(frozen=True)
class OutcomeRatio:
    delta: float

    def __post_init__(self):
        if not self.delta > -1.0:
            raise DomainError(f"delta must exceed -1, got {self.delta!r}")

    @property
    def p_prime(self) -> float:
        return 1.0 / (2.0 + self.delta)

    @property
    def q_prime(self) -> float:
        return 1.0 - self.p_prime

    @classmethod
    def from_probabilities(cls, P_j: float, Q_j: float) -> "OutcomeRatio":
        if P_j <= 0:
            raise DomainError("P_j must be positive for a finite ratio")
        return cls(Q_j / P_j - 1.0)


def per_outcome_info(delta: float) -> float:
    """``1 - H(1/(2+delta))`` in bits, with full relative precision near 0.

    With ``u = delta / (2 + delta)`` this is
    ``((1+u) ln(1+u) + (1-u) ln(1-u)) / (2 ln 2)``, whose even power series
    ``sum_n u^(2n) / (n (2n - 1))`` has only positive terms and is used for
    ``|u| < 1/2``.
    """
    delta = float(delta)
    if not delta > -1.0:
        raise DomainError(f"delta must exceed -1, got {delta!r}")
    if math.isinf(delta):
        return 1.0
    u = delta / (2.0 + delta)
    if abs(u) < 0.5:
        u2 = u * u
        term, total, n = u2, 0.0, 1
        while term > 1e-18 * total or n == 1:
            total += term / (n * (2 * n - 1))
            term *= u2
            n += 1
    else:
        total = (1.0 + u) * math.log1p(u)
        if u < 1.0:
            total += (1.0 - u) * math.log1p(-u)
    return min(1.0, max(0.0, total / (2.0 * math.log(2.0))))


def lower_bound_pos(delta: float) -> float:
    """Closed-form lower bound ``delta^2 / (2 (2+delta)^3)`` for ``delta >= 0``."""
    delta = float(delta)
    if not delta >= 0.0:
        raise DomainError(f"lower_bound_pos needs delta >= 0, got {delta!r}")
    return delta * delta / (2.0 * (2.0 + delta) ** 3)


def lower_bound_neg(delta: float) -> float:
    """Closed-form lower bound ``2 delta^2 / (8 (2+delta)^2)`` for ``-1 < delta < 0``."""
    delta = float(delta)
    if not -1.0 < delta < 0.0:
        raise DomainError(f"lower_bound_neg needs -1 < delta < 0, got {delta!r}")
    return 2.0 * delta * delta / (8.0 * (2.0 + delta) ** 2)


def lower_bound(delta: float) -> float:
    return lower_bound_pos(delta) if delta >= 0 else lower_bound_neg(delta)


def bisect_increasing(f, target: float, lo: float, hi: float, tol: float = BISECT_TOL):
    """Solve ``f(x) = target`` for increasing ``f`` with ``f(lo) <= target <= f(hi)``.

    Returns ``(x, iterations)``; the bracket is shrunk until its width is at
    most ``tol`` relative to the larger endpoint magnitude.
    """
    it = 0
    while hi - lo > tol * max(abs(lo), abs(hi)) and it < BISECT_MAX_ITER:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) <= target:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi), it


def _check_h(h: float) -> float:
    h = float(h)
    if not h >= 0.0:
        raise DomainError(f"h must be non-negative, got {h!r}")
    if h >= 1.0:
        raise SaturationError(
            f"h={h!r} >= 1 bit: every ratio is admissible, no finite envelope exists"
        )
    return h


def delta_positive(h: float) -> float:
    """Largest ``delta >= 0`` with ``per_outcome_info(delta) <= h``."""
    h = _check_h(h)
    if h == 0.0:
        return 0.0
    hi = 1.0
    while per_outcome_info(hi) <= h:
        hi *= 2.0
        if math.isinf(hi):
            raise SaturationError(f"no finite ratio bracket for h={h!r}")
    return bisect_increasing(per_outcome_info, h, 0.0, hi)[0]


def delta_negative(h: float) -> float:
    """Largest ``|delta|`` with ``-1 < delta <= 0`` and ``per_outcome_info(delta) <= h``."""
    h = _check_h(h)
    if h == 0.0:
        return 0.0
    x, _ = bisect_increasing(lambda x: per_outcome_info(-x), h, 0.0, 1.0 - 1e-16)
    return x


def delta_max(h: float) -> float:
    """Two-sided ratio envelope: the largest ``|delta_j|`` compatible with information ``h``.

    The positive side always binds, since ``I(delta) = I(-delta / (1 + delta))``
    maps each positive solution to a smaller negative one; both are still
    computed and the larger returned.
    """
    return max(delta_positive(h), delta_negative(h))


def leading_delta(h: float) -> float:
    """Leading-order envelope ``4 sqrt(h)``, kept for comparison with the exact one."""
    if h < 0:
        raise DomainError(f"h must be non-negative, got {h!r}")
    return 4.0 * math.sqrt(h)
