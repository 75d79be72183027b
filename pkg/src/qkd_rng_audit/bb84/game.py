"""The two-generator distinguishing game wrapped around a BB84 run.

A referee flips a fair bit X and hands Alice a string from the uniform
generator (X = 0) or from the imperfect one (X = 1). Alice runs the protocol
with it and announces the final key, or an abort. Whatever an observer learns
about X from that announcement is a processing of Alice's string, so it can
never exceed the Holevo quantity ``h`` of the two string states.

``game_g_exact`` enumerates every Alice string and every Bob string and
treats channel errors analytically. ``game_g_monte_carlo`` samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .. import rng_models
from ..errors import CapacityError, DomainError, SaturationError, ShapeError
from ..holevo import DiscriminationEnsemble, holevo_bound
from ..info_metrics import ZERO_CUTOFF, mutual_information_binary, shannon_entropy
from ..kernels import BACKEND, VIEW_BITS_MAX, pipeline_batch, view_bits
from ..rng_models import RngDistribution
from ..security_bound import SecurityBudget, corollary_bound
from .protocol import (
    EveStrategy,
    ProtocolParams,
    abort_probability,
    alice_budget,
    sifted_error_rate,
)

EXACT_CAP = 20
BOB_ENUM_CAP = 12
ROWS_CAP = 1 << 24
HOLEVO_SLACK = 1e-9
MIN_TRIALS = 1000


@dataclass
class GameResult:
    P: np.ndarray | None
    Q: np.ndarray | None
    info: float
    h: float
    epsilon_A: float
    epsilon_prime: float | None
    eta: float | None
    abort_prob0: float
    abort_prob1: float
    observable: str
    n_outcomes: int
    injective: bool
    omega_a: int
    k: int
    backend: str = field(default=BACKEND)

    @property
    def holevo_ok(self) -> bool:
        return self.info <= self.h + HOLEVO_SLACK

    @property
    def saturates(self) -> bool:
        return abs(self.info - self.h) <= HOLEVO_SLACK


def _validate(params: ProtocolParams, alice_law: RngDistribution):
    need = alice_budget(params)
    if alice_law.omega != need:
        raise ShapeError(f"Alice's law emits {alice_law.omega} bits, the protocol consumes {need}")


def _bob_rows(params, bob_law, bob_bits, seed):
    n = params.n
    if bob_bits is not None:
        bits = np.asarray(bob_bits, dtype=np.uint8).reshape(1, n)
        return bits, np.ones(1)
    if n <= BOB_ENUM_CAP:
        return rng_models.all_strings(n), rng_models.expand(bob_law)
    # too many Bob strings: fix one draw
    return rng_models.sample(bob_law, seed).bits.reshape(1, n), np.ones(1)


def _conditional_key_entropy(codes, keys, w, k):
    """H(K | public record) for one hypothesis, restricted to successful runs."""
    total = w.sum()
    if total <= ZERO_CUTOFF:
        return None
    combined = (codes << k) | keys
    uniq, inv = np.unique(combined, return_inverse=True)
    sums = np.bincount(inv, weights=w) / total
    views = uniq >> k
    _, vinv = np.unique(views, return_inverse=True)
    pv = np.bincount(vinv, weights=sums)
    nz = sums > ZERO_CUTOFF
    # H(K | V) = H(V, K) - H(V)
    hvk = -np.sum(sums[nz] * np.log2(sums[nz]))
    pvn = pv[pv > ZERO_CUTOFF]
    return float(max(0.0, hvk + np.sum(pvn * np.log2(pvn))))


def game_g_exact(
    params: ProtocolParams,
    alice_law: RngDistribution,
    eve: EveStrategy | None = None,
    *,
    bob_law: RngDistribution | None = None,
    bob_bits=None,
    seed: int = 0,
    observable: str | None = None,
) -> GameResult:
    """Exact information about X carried by the protocol's public outcome.

    ``observable`` is ``"key"`` (the announced key or abort) or
    ``"transcript"`` (the key together with the whole public record). It
    defaults to ``"transcript"`` for the pattern-guessing Eve and ``"key"``
    otherwise. Intercept-resend only changes abort probabilities here; its
    own measurement record is not part of the observable.
    """
    eve = eve or EveStrategy.none()
    _validate(params, alice_law)
    omega = alice_law.omega
    if omega > EXACT_CAP:
        raise CapacityError(
            f"exact Game G is capped at omega_a={EXACT_CAP} (got {omega}); use game_g_monte_carlo"
        )
    if observable is None:
        observable = "transcript" if eve.kind == "pattern_guesser" else "key"
    if observable not in ("key", "transcript"):
        raise DomainError(f"observable must be 'key' or 'transcript', got {observable!r}")
    k = params.k
    if observable == "transcript" and view_bits(params.n, k, params.toeplitz) + k + 1 > VIEW_BITS_MAX:
        raise CapacityError("public record too wide to pack into a 64-bit code")
    bob_law = bob_law or rng_models.uniform(params.n)

    strings = rng_models.all_strings(omega)
    rho0, rho1 = rng_models.mixture_states(alice_law)
    bobs, wb = _bob_rows(params, bob_law, bob_bits, seed)
    n_s, n_b = strings.shape[0], bobs.shape[0]
    if n_s * n_b > ROWS_CAP:
        raise CapacityError(f"{n_s * n_b} (Alice, Bob) pairs exceed the cap {ROWS_CAP}")

    A = np.tile(strings, (n_b, 1))
    B = np.repeat(bobs, n_s, axis=0)
    w0 = np.tile(rho0, n_b) * np.repeat(wb, n_s)
    w1 = np.tile(rho1, n_b) * np.repeat(wb, n_s)
    keys, n_test, _, codes = pipeline_batch(
        A, B, params.n, k, params.test_random, params.toeplitz, observable == "transcript"
    )
    err = sifted_error_rate(eve, params.noise)
    p_abort = np.where(keys >= 0, abort_probability(n_test, err, params.qber_threshold), 1.0)
    p_ok = 1.0 - p_abort
    abort_sym = 1 << k
    ok = keys >= 0

    base = codes * (abort_sym + 1) if observable == "transcript" else np.zeros_like(keys)
    y = np.concatenate([base[ok] + keys[ok], base + abort_sym])
    uniq, inv = np.unique(y, return_inverse=True)
    W0 = np.bincount(inv, weights=np.concatenate([w0[ok] * p_ok[ok], w0 * p_abort]), minlength=uniq.size)
    W1 = np.bincount(inv, weights=np.concatenate([w1[ok] * p_ok[ok], w1 * p_abort]), minlength=uniq.size)
    keep = (W0 > 0) | (W1 > 0)
    W0, W1 = W0[keep], W1[keep]
    info = mutual_information_binary(W0 / W0.sum(), W1 / W1.sum(), 0.5)
    h = holevo_bound(DiscriminationEnsemble(rho0, rho1))

    def key_law(w):
        law = np.bincount(keys[ok], weights=w[ok] * p_ok[ok], minlength=abort_sym)
        s = law.sum()
        return law / s if s > ZERO_CUTOFF else None

    P, Q = key_law(w0), key_law(w1)
    if observable == "key":
        eps_prime = k - shannon_entropy(P) if P is not None else None
        eta = k - shannon_entropy(Q) if Q is not None else None
    else:
        hp = _conditional_key_entropy(codes[ok], keys[ok], w0[ok] * p_ok[ok], k)
        hq = _conditional_key_entropy(codes[ok], keys[ok], w1[ok] * p_ok[ok], k)
        eps_prime = k - hp if hp is not None else None
        eta = k - hq if hq is not None else None

    # injective: no aborts and every Alice string gives a distinct outcome for each Bob string
    outcome = base + np.where(ok, keys, abort_sym)
    per_bob = np.repeat(np.arange(n_b, dtype=np.int64), n_s)
    injective = bool(
        np.all(p_abort == 0.0)
        and np.unique(np.stack([per_bob, outcome]), axis=1).shape[1] == n_s * n_b
    )
    return GameResult(
        P=P,
        Q=Q,
        info=info,
        h=h,
        epsilon_A=rng_models.entropy_deficit(alice_law),
        epsilon_prime=eps_prime,
        eta=eta,
        abort_prob0=float(np.dot(w0, p_abort)),
        abort_prob1=float(np.dot(w1, p_abort)),
        observable=observable,
        n_outcomes=int(W0.size),
        injective=injective,
        omega_a=omega,
        k=k,
    )


@dataclass(frozen=True)
class TheoremCheck:
    """Imperfect-minus-perfect key information against both bound variants."""

    epsilon_prime: float
    eta: float
    epsilon_A: float
    epsilon_B: float
    k: int
    leading: float
    exact: float | None

    @property
    def gain(self) -> float:
        return self.eta - self.epsilon_prime

    def holds(self, variant: str, strict: bool = False) -> bool:
        """``gain <= bound`` (or ``eta <= bound`` when ``strict``); a saturated exact bound holds vacuously."""
        bound = self.leading if variant == "leading" else self.exact
        if bound is None:
            return True
        lhs = self.eta if strict else self.gain
        return lhs <= bound + HOLEVO_SLACK


def theorem_check(result: GameResult, epsilon_B: float = 0.0) -> TheoremCheck | None:
    """Compare the game's measured key information with the two-party bound.

    Returns ``None`` when either hypothesis never produces a key.
    """
    if result.epsilon_prime is None or result.eta is None:
        return None
    eps0 = max(0.0, result.epsilon_prime)
    budget = SecurityBudget(eps0, result.k, result.epsilon_A, epsilon_B)
    leading = corollary_bound(budget, "leading")
    try:
        exact = corollary_bound(budget, "exact")
    except SaturationError:
        exact = None
    return TheoremCheck(eps0, result.eta, result.epsilon_A, epsilon_B, result.k, leading, exact)


# -- Monte Carlo ------------------------------------------------------------------


def plugin_mutual_information(counts: np.ndarray, miller_madow: bool = True) -> float:
    """I(X; Y) in bits from a ``2 x m`` contingency table of counts.

    With ``miller_madow`` the first-order bias ``(cells - rows - cols + 1) / (2 N ln 2)``
    is removed; the result may then be slightly negative.
    """
    counts = np.asarray(counts, dtype=float)
    N = counts.sum()
    if N <= 0:
        raise DomainError("empty contingency table")
    joint = counts / N

    def H(p):
        p = p[p > 0]
        return float(-np.sum(p * np.log2(p)))

    px, py = joint.sum(axis=1), joint.sum(axis=0)
    mi = H(px) + H(py) - H(joint.ravel())
    if miller_madow:
        nx, ny, nxy = np.count_nonzero(px), np.count_nonzero(py), np.count_nonzero(joint)
        mi += ((nx - 1) + (ny - 1) - (nxy - 1)) / (2.0 * N * math.log(2.0))
    return mi


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    half_width: float
    h: float
    n_trials: int
    confidence: float
    counts: np.ndarray
    seed: int

    @property
    def holevo_ok(self) -> bool:
        return self.estimate - self.half_width <= self.h


def game_g_monte_carlo(
    params: ProtocolParams,
    alice_law: RngDistribution,
    eve: EveStrategy | None = None,
    n_trials: int = 10_000,
    seed: int = 0,
    *,
    bob_law: RngDistribution | None = None,
    confidence: float = 0.99,
    n_boot: int = 200,
) -> MonteCarloResult:
    """Sampled estimate of I(X; key-or-abort) with a bootstrap half-width.

    The half-width is ``z * sd`` of ``n_boot`` multinomial resamples of the
    observed table, ``z`` the two-sided normal quantile for ``confidence``.
    """
    eve = eve or EveStrategy.none()
    _validate(params, alice_law)
    if n_trials < MIN_TRIALS:
        raise DomainError(f"n_trials must be at least {MIN_TRIALS}")
    bob_law = bob_law or rng_models.uniform(params.n)
    rng = np.random.default_rng(seed)
    k = params.k

    x = rng.integers(0, 2, n_trials)
    s0 = rng_models.sample_batch(rng_models.uniform(alice_law.omega), n_trials, rng)
    s1 = rng_models.sample_batch(alice_law, n_trials, rng)
    S = np.where(x[:, None] == 1, s1, s0)
    R = rng_models.sample_batch(bob_law, n_trials, rng)
    keys, n_test, _, _ = pipeline_batch(S, R, params.n, k, params.test_random, params.toeplitz, False)
    errors = rng.binomial(n_test, sifted_error_rate(eve, params.noise))
    with np.errstate(divide="ignore", invalid="ignore"):
        qber = np.where(n_test > 0, errors / np.maximum(n_test, 1), 0.0)
    aborted = (keys < 0) | (qber > params.qber_threshold)
    y = np.where(aborted, 1 << k, keys)

    counts = np.zeros((2, (1 << k) + 1))
    np.add.at(counts, (x, y), 1)
    estimate = plugin_mutual_information(counts)

    probs = (counts / n_trials).ravel()
    boot = np.array([
        plugin_mutual_information(rng.multinomial(n_trials, probs).reshape(counts.shape))
        for _ in range(n_boot)
    ])
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    h = holevo_bound(DiscriminationEnsemble.from_generator(alice_law))
    return MonteCarloResult(estimate, float(z * boot.std(ddof=1)), h, n_trials, confidence, counts, seed)
