"""Perfect and imperfect random number generators over fixed-length bit strings.

A generator is an :class:`RngDistribution`: a string length ``omega`` plus a
law over the ``2**omega`` strings. Three laws are supported:

``explicit``
    A full probability table indexed by string value.
``iid_bias``
    Independent bits, each equal to 1 with probability ``b``.
``markov``
    A two-state Markov chain; ``initial`` is Pr[first bit = 1] and
    ``transition[a][c]`` is Pr[next bit = c | current bit = a].

Strings map to table indices with the leftmost bit most significant, so the
string ``"011"`` is index 3.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BudgetExhaustedError,
    CapacityError,
    InvalidDistributionError,
    ShapeError,
)
from .info_metrics import SUM_TOLERANCE, as_prob_vector, binary_entropy, shannon_entropy

EXPLICIT_CAP = 24
KINDS = ("explicit", "iid_bias", "markov")


def bits_to_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def index_to_bits(index: int, omega: int) -> np.ndarray:
    return np.array([(index >> (omega - 1 - i)) & 1 for i in range(omega)], dtype=np.uint8)


def all_strings(omega: int) -> np.ndarray:
    """Every ``omega``-bit string as rows of a ``(2**omega, omega)`` uint8 array, in index order."""
    if omega > EXPLICIT_CAP:
        raise CapacityError(f"omega={omega} exceeds the expansion cap {EXPLICIT_CAP}")
    idx = np.arange(1 << omega, dtype=np.int64)[:, None]
    shifts = np.arange(omega - 1, -1, -1, dtype=np.int64)[None, :]
    return ((idx >> shifts) & 1).astype(np.uint8)


@dataclass
class BitString:
    """A random string consumed left to right.

    ``read`` advances the cursor by exactly the number of bits requested and
    raises :class:`BudgetExhaustedError` instead of returning a short read.
    """

    bits: np.ndarray
    cursor: int = 0

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8).ravel()
        if np.any(self.bits > 1):
            raise ValueError("bit strings hold only 0 and 1")

    def __len__(self) -> int:
        return int(self.bits.size)

    @property
    def remaining(self) -> int:
        return len(self) - self.cursor

    def read(self, count: int) -> np.ndarray:
        if count < 0:
            raise ValueError("cannot read a negative number of bits")
        if count > self.remaining:
            raise BudgetExhaustedError(
                f"asked for {count} bits with {self.remaining} of {len(self)} left"
            )
        out = self.bits[self.cursor : self.cursor + count].copy()
        self.cursor += count
        return out

    def to_str(self) -> str:
        return "".join(str(int(b)) for b in self.bits)

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        if set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(np.array([int(c) for c in text], dtype=np.uint8))


@dataclass(frozen=True)
class RngDistribution:
    """A law over ``omega``-bit strings. Build instances with the constructors below."""

    omega: int
    kind: str
    table: np.ndarray | None = field(default=None, compare=False, repr=False)
    b: float | None = None
    initial: float | None = None
    transition: tuple[tuple[float, float], tuple[float, float]] | None = None

    def __post_init__(self):
        if not isinstance(self.omega, (int, np.integer)) or self.omega < 1:
            raise InvalidDistributionError(f"omega must be a positive integer, got {self.omega!r}")
        if self.kind not in KINDS:
            raise InvalidDistributionError(f"unknown kind {self.kind!r}")
        if self.kind == "explicit":
            if self.omega > EXPLICIT_CAP:
                raise CapacityError(f"explicit tables are capped at omega={EXPLICIT_CAP}")
            table = as_prob_vector(self.table)
            if table.size != 1 << self.omega:
                raise ShapeError(f"table has {table.size} entries, expected {1 << self.omega}")
            table.setflags(write=False)
            object.__setattr__(self, "table", table)
        elif self.kind == "iid_bias":
            if self.b is None or not 0.0 <= self.b <= 1.0:
                raise InvalidDistributionError(f"bias must lie in [0, 1], got {self.b!r}")
        else:
            if self.initial is None or not 0.0 <= self.initial <= 1.0:
                raise InvalidDistributionError(f"initial must lie in [0, 1], got {self.initial!r}")
            rows = self.transition
            if rows is None or len(rows) != 2 or any(len(r) != 2 for r in rows):
                raise ShapeError("transition must be a 2x2 matrix")
            for r in rows:
                if min(r) < 0 or abs(r[0] + r[1] - 1.0) > SUM_TOLERANCE:
                    raise InvalidDistributionError(f"transition row {r!r} is not stochastic")

    def __eq__(self, other):
        if not isinstance(other, RngDistribution):
            return NotImplemented
        same = (self.omega, self.kind, self.b, self.initial, self.transition) == (
            other.omega, other.kind, other.b, other.initial, other.transition,
        )
        if same and self.kind == "explicit":
            return bool(np.array_equal(self.table, other.table))
        return same

    def __hash__(self):
        return hash((self.omega, self.kind, self.b, self.initial, self.transition))

    @property
    def is_uniform(self) -> bool:
        return entropy_deficit(self) <= 1e-9

    def to_dict(self) -> dict:
        out: dict = {"omega": int(self.omega), "kind": self.kind}
        if self.kind == "explicit":
            out["table"] = [repr(float(x)) for x in self.table]
        elif self.kind == "iid_bias":
            out["b"] = repr(float(self.b))
        else:
            out["initial"] = repr(float(self.initial))
            out["transition"] = [[repr(float(x)) for x in row] for row in self.transition]
        return out


def explicit(table, omega: int | None = None) -> RngDistribution:
    table = np.asarray(table, dtype=float).ravel()
    if omega is None:
        omega = int(round(math.log2(table.size))) if table.size else 0
    return RngDistribution(omega=omega, kind="explicit", table=table)


def iid_bias(omega: int, b: float) -> RngDistribution:
    return RngDistribution(omega=omega, kind="iid_bias", b=float(b))


def uniform(omega: int) -> RngDistribution:
    return iid_bias(omega, 0.5)


def markov(omega: int, initial: float, transition) -> RngDistribution:
    rows = tuple(tuple(float(x) for x in row) for row in transition)
    return RngDistribution(omega=omega, kind="markov", initial=float(initial), transition=rows)


def point_mass(atom: str | Sequence[int]) -> RngDistribution:
    bits = [int(c) for c in atom]
    omega = len(bits)
    table = np.zeros(1 << omega)
    table[bits_to_index(bits)] = 1.0
    return explicit(table, omega)


def _as_bits(s) -> np.ndarray:
    if isinstance(s, BitString):
        return s.bits
    if isinstance(s, str):
        return BitString.from_str(s).bits
    return np.asarray(s, dtype=np.uint8).ravel()


def probability_of(d: RngDistribution, s) -> float:
    """Probability that generator ``d`` emits the string ``s``."""
    bits = _as_bits(s)
    if bits.size != d.omega:
        raise ShapeError(f"string has {bits.size} bits, generator emits {d.omega}")
    if d.kind == "explicit":
        return float(d.table[bits_to_index(bits)])
    if d.kind == "iid_bias":
        ones = int(bits.sum())
        return d.b**ones * (1.0 - d.b) ** (d.omega - ones)
    p = d.initial if bits[0] else 1.0 - d.initial
    for prev, cur in zip(bits[:-1], bits[1:]):
        p *= d.transition[prev][cur]
    return float(p)


def expand(d: RngDistribution) -> np.ndarray:
    """The full ``2**omega`` probability table of ``d``, in index order."""
    if d.kind == "explicit":
        return np.array(d.table)
    if d.omega > EXPLICIT_CAP:
        raise CapacityError(f"omega={d.omega} exceeds the expansion cap {EXPLICIT_CAP}")
    if d.kind == "iid_bias":
        bit = np.array([1.0 - d.b, d.b])
        out = np.ones(1)
        for _ in range(d.omega):
            out = np.outer(out, bit).ravel()
        return out
    # markov: grow the table one bit at a time, tracking the last bit of each prefix
    T = np.array(d.transition)
    out = np.array([1.0 - d.initial, d.initial])
    for _ in range(d.omega - 1):
        last = np.arange(out.size) & 1
        out = (out[:, None] * T[last]).ravel()
    return out


def _markov_marginals(d: RngDistribution) -> np.ndarray:
    """Pr[bit_i = 1] for every position of a Markov law."""
    T = np.array(d.transition)
    pi = np.array([1.0 - d.initial, d.initial])
    out = np.empty(d.omega)
    for i in range(d.omega):
        out[i] = pi[1]
        pi = pi @ T
    return out


def entropy(d: RngDistribution) -> float:
    """Shannon entropy of the string law, in bits."""
    if d.kind == "iid_bias":
        return d.omega * binary_entropy(d.b)
    if d.kind == "markov":
        # chain rule: H(first) + sum_i sum_a Pr[bit_{i-1} = a] H(row a)
        ones = _markov_marginals(d)
        rows = [binary_entropy(r[1]) for r in d.transition]
        total = binary_entropy(d.initial)
        for q in ones[:-1]:
            total += (1.0 - q) * rows[0] + q * rows[1]
        return total
    return shannon_entropy(d.table)


def entropy_deficit(d: RngDistribution) -> float:
    """``omega - H(d)``: how far the generator falls short of a perfect one."""
    return max(0.0, d.omega - entropy(d))


def mixture_states(d: RngDistribution) -> tuple[np.ndarray, np.ndarray]:
    """The two diagonal states of the discrimination game: uniform and ``d``."""
    rho1 = expand(d)
    rho0 = np.full(rho1.size, 1.0 / rho1.size)
    return rho0, rho1


def sample_batch(d: RngDistribution, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` strings as rows of a uint8 array."""
    if d.kind == "explicit":
        idx = rng.choice(d.table.size, size=count, p=d.table)
        shifts = np.arange(d.omega - 1, -1, -1, dtype=np.int64)[None, :]
        return ((idx[:, None] >> shifts) & 1).astype(np.uint8)
    if d.kind == "iid_bias":
        return (rng.random((count, d.omega)) < d.b).astype(np.uint8)
    u = rng.random((count, d.omega))
    out = np.empty((count, d.omega), dtype=np.uint8)
    out[:, 0] = u[:, 0] < d.initial
    p_one = np.array([d.transition[0][1], d.transition[1][1]])
    for i in range(1, d.omega):
        out[:, i] = u[:, i] < p_one[out[:, i - 1]]
    return out


def sample(d: RngDistribution, seed) -> BitString:
    """One reproducible ``omega``-bit draw from ``d``.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts.
    """
    rng = np.random.default_rng(seed)
    return BitString(sample_batch(d, 1, rng)[0])


# -- distribution files ------------------------------------------------------


def _exact(value) -> Fraction:
    if isinstance(value, bool):
        raise InvalidDistributionError("booleans are not probabilities")
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidDistributionError(f"cannot parse probability {value!r}") from exc


def from_dict(doc: dict) -> RngDistribution:
    """Build a distribution from the JSON document layout.

    Probabilities may be JSON numbers or decimal/fraction strings; they are
    parsed exactly so that the sum check is not blurred by float rounding.
    """
    try:
        omega = int(doc["omega"])
        kind = doc["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDistributionError(f"distribution needs 'omega' and 'kind': {exc}") from exc
    if kind == "explicit":
        if "table" not in doc:
            raise InvalidDistributionError("explicit distribution needs 'table'")
        exact = [_exact(v) for v in doc["table"]]
        if any(v < 0 for v in exact):
            raise InvalidDistributionError("negative table entry")
        if abs(float(sum(exact, Fraction(0)) - 1)) > SUM_TOLERANCE:
            raise InvalidDistributionError("table entries do not sum to 1")
        return explicit([float(v) for v in exact], omega)
    try:
        if kind == "iid_bias":
            return iid_bias(omega, float(_exact(doc["b"])))
        if kind == "markov":
            rows = [[float(_exact(x)) for x in row] for row in doc["transition"]]
            return markov(omega, float(_exact(doc["initial"])), rows)
    except (KeyError, TypeError) as exc:
        raise InvalidDistributionError(f"{kind} distribution is missing a field: {exc}") from exc
    raise InvalidDistributionError(f"unknown kind {kind!r}; expected one of {KINDS}")


def loads(text: str) -> RngDistribution:
    # parse_float keeps the literal text so Fraction sees every digit
    return from_dict(json.loads(text, parse_float=str))


def load(path: str | Path) -> RngDistribution:
    return loads(Path(path).read_text())


def dumps(d: RngDistribution) -> str:
    return json.dumps(d.to_dict(), indent=2)
