"""Classical BB84 with explicit, fully accounted randomness budgets.

Alice reads her string left to right in this fixed order:

1. ``n`` bit values,
2. ``n`` basis choices,
3. ``n`` test-selection flags (``test_method="random"`` only; the flag at
   position ``i`` is consulted only if position ``i`` survives sifting),
4. ``n + k - 1`` Toeplitz seed bits (``hashing="toeplitz"`` only).

Bob reads ``n`` basis choices. Everything else (Eve's bases, outcomes of
measurements in the wrong basis, channel flips) is nature's randomness and is
drawn from a separate channel seed. Error correction is ideal: Bob ends with
Alice's block and the public leakage ``ceil(h(qber) * m)`` is recorded.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .. import rng_models
from ..errors import DomainError, ShapeError
from ..info_metrics import binary_entropy
from ..kernels import toeplitz_hash
from ..rng_models import BitString, RngDistribution

TEST_METHODS = ("random", "alternate")
HASHINGS = ("toeplitz", "none")
EVE_KINDS = ("none", "intercept_resend", "pattern_guesser")
DEFAULT_THRESHOLD = 0.11
MIN_QUBITS = 4


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    k: int
    test_method: str = "random"
    hashing: str = "toeplitz"
    qber_threshold: float = DEFAULT_THRESHOLD
    noise: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise DomainError("n and k must be positive")
        if self.test_method not in TEST_METHODS:
            raise DomainError(f"test_method must be one of {TEST_METHODS}")
        if self.hashing not in HASHINGS:
            raise DomainError(f"hashing must be one of {HASHINGS}")
        if not 0.0 <= self.qber_threshold <= 1.0 or not 0.0 <= self.noise <= 1.0:
            raise DomainError("qber_threshold and noise must lie in [0, 1]")

    @property
    def test_random(self) -> bool:
        return self.test_method == "random"

    @property
    def toeplitz(self) -> bool:
        return self.hashing == "toeplitz"

    @property
    def seed_offset(self) -> int:
        return 3 * self.n if self.test_random else 2 * self.n

    @property
    def seed_length(self) -> int:
        return self.n + self.k - 1 if self.toeplitz else 0

    def to_dict(self) -> dict:
        return asdict(self)


def alice_budget(params: ProtocolParams) -> int:
    return params.seed_offset + params.seed_length


def bob_budget(params: ProtocolParams) -> int:
    return params.n


@dataclass(frozen=True)
class PartyConfig:
    """A party's generator; its ``omega`` is the declared randomness budget."""

    randomness: RngDistribution

    @property
    def budget(self) -> int:
        return self.randomness.omega


@dataclass(frozen=True)
class EveStrategy:
    kind: str = "none"
    fraction: float = 0.0
    alice_law: RngDistribution | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in EVE_KINDS:
            raise DomainError(f"eve kind must be one of {EVE_KINDS}")
        if not 0.0 <= self.fraction <= 1.0:
            raise DomainError(f"intercept fraction must lie in [0, 1], got {self.fraction!r}")

    @classmethod
    def none(cls) -> "EveStrategy":
        return cls("none")

    @classmethod
    def intercept_resend(cls, fraction: float = 1.0) -> "EveStrategy":
        return cls("intercept_resend", float(fraction))

    @classmethod
    def pattern_guesser(cls, alice_law: RngDistribution | None = None) -> "EveStrategy":
        return cls("pattern_guesser", 0.0, alice_law)

    @classmethod
    def parse(cls, text: str) -> "EveStrategy":
        """``none``, ``ir:<fraction>`` or ``pattern``."""
        text = text.strip()
        if text == "none":
            return cls.none()
        if text == "pattern":
            return cls.pattern_guesser()
        if text.startswith("ir:"):
            try:
                return cls.intercept_resend(float(text[3:]))
            except ValueError as exc:
                raise DomainError(f"bad intercept fraction in {text!r}") from exc
        raise DomainError(f"unknown eve strategy {text!r}; expected none, ir:<f> or pattern")

    @property
    def label(self) -> str:
        if self.kind == "intercept_resend":
            return f"ir:{self.fraction!r}"
        return "pattern" if self.kind == "pattern_guesser" else "none"

    @property
    def intercept(self) -> float:
        return self.fraction if self.kind == "intercept_resend" else 0.0


def intercept_resend_error_table() -> dict[tuple[int, int, int, int], Fraction]:
    """Exact error probability for every (bit, Alice basis, Eve basis, Bob basis) case.

    Eve measures in her basis and resends her result in that basis; a
    measurement in a mismatched basis gives a fair coin.
    """
    table = {}
    for a, alpha, e, beta in product((0, 1), repeat=4):
        p_eve = {a: Fraction(1)} if e == alpha else {0: Fraction(1, 2), 1: Fraction(1, 2)}
        err = Fraction(0)
        for r, pr in p_eve.items():
            if beta == e:
                err += pr * (1 if r != a else 0)
            else:
                err += pr * Fraction(1, 2)
        table[(a, alpha, e, beta)] = err
    return table


def sifted_error_rate(eve: EveStrategy, noise: float = 0.0) -> float:
    """Per-position error probability on sifted bits: intercept errors then a channel flip."""
    sifted = [v for (a, al, e, be), v in intercept_resend_error_table().items() if al == be]
    e_eve = eve.intercept * float(sum(sifted) / len(sifted))
    return e_eve * (1.0 - noise) + (1.0 - e_eve) * noise


def abort_probability(n_test, error_rate: float, threshold: float) -> np.ndarray:
    """Pr[observed qber > threshold] when each of ``n_test`` test bits errs independently."""
    n_test = np.asarray(n_test)
    out = np.ones(n_test.shape, dtype=float)
    for t in np.unique(n_test):
        t = int(t)
        if t <= 0:
            continue
        p = 0.0
        for x in range(t + 1):
            if x / t > threshold:
                p += math.comb(t, x) * error_rate**x * (1.0 - error_rate) ** (t - x)
        out[n_test == t] = min(1.0, p)
    return out


def _bits(arr) -> str:
    return "".join("1" if b else "0" for b in np.asarray(arr).ravel())


def _unbits(text: str) -> np.ndarray:
    return np.array([c == "1" for c in text], dtype=np.uint8)


@dataclass(frozen=True)
class Seeds:
    alice: int
    bob: int
    channel: int

    @classmethod
    def derive(cls, master: int) -> "Seeds":
        a, b, c = (int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(master).spawn(3))
        return cls(a, b, c)


@dataclass
class ProtocolTranscript:
    n_qubits: int
    alice_bits: str
    alice_bases: str
    bob_bases: str
    bob_outcomes: str
    sift_mask: str
    test_subset: list[int]
    qber: float
    final_key: str
    bob_key: str
    keys_agree: bool
    leakage: int
    aborted: bool
    abort_reason: str
    test_flags: str
    hash_seed: str
    alice_bits_read: int
    bob_bits_read: int
    seeds: dict
    params: dict
    alice_law: dict
    bob_law: dict
    eve: str
    eve_guess: str | None = None
    eve_guess_method: str | None = None
    config: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ProtocolTranscript":
        return cls(**json.loads(text))

    @property
    def key_block_positions(self) -> list[int]:
        tests = set(self.test_subset)
        return [i for i, c in enumerate(self.sift_mask) if c == "1" and i not in tests]


def run_protocol(
    alice: PartyConfig,
    bob: PartyConfig,
    params: ProtocolParams,
    eve: EveStrategy | None = None,
    seeds: Seeds | int = 0,
    *,
    enforce_min_qubits: bool = True,
) -> ProtocolTranscript:
    """Run one BB84 session and return its full transcript.

    ``seeds`` is either a :class:`Seeds` record or a master integer from
    which the three streams are derived.
    """
    eve = eve or EveStrategy.none()
    if not isinstance(seeds, Seeds):
        seeds = Seeds.derive(int(seeds))
    n, k = params.n, params.k
    if enforce_min_qubits and n < MIN_QUBITS:
        raise DomainError(f"run_protocol needs n >= {MIN_QUBITS}, got {n}")
    for who, cfg, need in (("alice", alice, alice_budget(params)), ("bob", bob, bob_budget(params))):
        if cfg.budget > need:
            raise ShapeError(f"{who} declares {cfg.budget} random bits but the protocol consumes {need}")

    s_alice = rng_models.sample(alice.randomness, seeds.alice)
    s_bob = rng_models.sample(bob.randomness, seeds.bob)
    a_vals = s_alice.read(n)
    a_bases = s_alice.read(n)
    b_bases = s_bob.read(n)

    chan = np.random.default_rng(seeds.channel)
    intercepted = chan.random(n) < eve.intercept
    eve_bases = chan.integers(0, 2, n, dtype=np.uint8)
    eve_coin = chan.integers(0, 2, n, dtype=np.uint8)
    bob_coin = chan.integers(0, 2, n, dtype=np.uint8)
    flips = chan.random(n) < params.noise

    sent_bit = a_vals.copy()
    sent_basis = a_bases.copy()
    eve_result = np.where(eve_bases == a_bases, a_vals, eve_coin)
    sent_bit[intercepted] = eve_result[intercepted]
    sent_basis[intercepted] = eve_bases[intercepted]
    bob_out = np.where(b_bases == sent_basis, sent_bit, bob_coin).astype(np.uint8)
    bob_out ^= flips.astype(np.uint8)

    sift = a_bases == b_bases
    flags = s_alice.read(n) if params.test_random else np.zeros(n, dtype=np.uint8)
    tests, block = [], []
    for i in np.flatnonzero(sift):
        is_test = flags[i] == 1 if params.test_random else (len(tests) + len(block)) % 2 == 0
        (tests if is_test else block).append(int(i))
    seed_bits = s_alice.read(params.seed_length)

    n_err = int(np.sum(a_vals[tests] != bob_out[tests])) if tests else 0
    qber = n_err / len(tests) if tests else 0.0
    m = len(block)

    reason = ""
    if not tests or m == 0 or (not params.toeplitz and m < k):
        reason = "degenerate"
    elif qber > params.qber_threshold:
        reason = "qber"

    def finish(bits) -> str:
        if params.toeplitz:
            key = toeplitz_hash(np.asarray(bits, dtype=np.uint8), seed_bits, n, k)
            return format(key, f"0{k}b")
        return _bits(bits[:k])

    final_key = bob_key = ""
    if not reason:
        final_key = finish(a_vals[block])
        bob_key = finish(bob_out[block])
    leakage = math.ceil(binary_entropy(qber) * m) if not reason else 0

    guess = method = None
    if eve.kind == "pattern_guesser" and not reason:
        from .eve import PublicView, pattern_guess

        law = eve.alice_law or alice.randomness
        view = PublicView(a_bases, b_bases, tuple(tests), a_vals[tests], flags, seed_bits, False)
        guess_key, method = pattern_guess(law, view, params)
        guess = format(guess_key, f"0{k}b")

    return ProtocolTranscript(
        n_qubits=n,
        alice_bits=_bits(a_vals),
        alice_bases=_bits(a_bases),
        bob_bases=_bits(b_bases),
        bob_outcomes=_bits(bob_out),
        sift_mask=_bits(sift),
        test_subset=tests,
        qber=qber,
        final_key=final_key,
        bob_key=bob_key,
        keys_agree=bool(final_key == bob_key) if not reason else False,
        leakage=leakage,
        aborted=bool(reason),
        abort_reason=reason,
        test_flags=_bits(flags) if params.test_random else "",
        hash_seed=_bits(seed_bits),
        alice_bits_read=s_alice.cursor,
        bob_bits_read=s_bob.cursor,
        seeds=asdict(seeds),
        params=params.to_dict(),
        alice_law=alice.randomness.to_dict(),
        bob_law=bob.randomness.to_dict(),
        eve=eve.label,
        eve_guess=guess,
        eve_guess_method=method,
    )


def replay(transcript: ProtocolTranscript, *, enforce_min_qubits: bool = True) -> ProtocolTranscript:
    """Re-run a session from the configuration and seeds recorded in ``transcript``."""
    alice = PartyConfig(rng_models.from_dict(transcript.alice_law))
    bob = PartyConfig(rng_models.from_dict(transcript.bob_law))
    params = ProtocolParams(**transcript.params)
    eve = EveStrategy.parse(transcript.eve)
    return run_protocol(alice, bob, params, eve, Seeds(**transcript.seeds), enforce_min_qubits=enforce_min_qubits)
