"""An eavesdropper who knows the law of Alice's generator.

She never touches the channel. From the public record (bases, which sifted
positions were tested, the revealed test bits and the hashing seed) and the
law ``{p_i}`` she forms a posterior over Alice's unrevealed bits and hence
over the final key.

Two variants: exact Bayesian enumeration over every string consistent with
the public record, and a greedy per-position maximum-likelihood guess for
strings too long to enumerate. The greedy guess is not optimal in general.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng_models
from ..errors import CapacityError, DomainError, ShapeError
from ..kernels import VIEW_BITS_MAX, pipeline_batch, toeplitz_hash, view_bits
from ..rng_models import RngDistribution
from .protocol import ProtocolParams, ProtocolTranscript, _unbits, alice_budget

EXACT_CAP = 20
EXACT_GUESS_CAP = 16


@dataclass(frozen=True)
class PublicView:
    alice_bases: np.ndarray
    bob_bases: np.ndarray
    test_subset: tuple[int, ...]
    test_values: np.ndarray
    test_flags: np.ndarray
    hash_seed: np.ndarray
    aborted: bool

    @classmethod
    def from_transcript(cls, t: ProtocolTranscript) -> "PublicView":
        vals = _unbits(t.alice_bits)
        flags = _unbits(t.test_flags) if t.test_flags else np.zeros(t.n_qubits, dtype=np.uint8)
        return cls(
            _unbits(t.alice_bases),
            _unbits(t.bob_bases),
            tuple(t.test_subset),
            vals[list(t.test_subset)],
            flags,
            _unbits(t.hash_seed),
            t.aborted,
        )

    def code(self, params: ProtocolParams) -> int:
        """Pack the record exactly as ``pipeline_batch`` does."""
        n = params.n
        code = 0
        for b in self.alice_bases:
            code = (code << 1) | int(b)
        for b in self.bob_bases:
            code = (code << 1) | int(b)
        mask = vals = 0
        revealed = dict(zip(self.test_subset, (int(v) for v in self.test_values)))
        for j in range(n):
            mask = (mask << 1) | (1 if j in revealed else 0)
            vals = (vals << 1) | revealed.get(j, 0)
        code = (code << n) | mask
        code = (code << n) | vals
        for b in self.hash_seed:
            code = (code << 1) | int(b)
        return code


def _check_exact(law: RngDistribution, params: ProtocolParams):
    if law.omega != alice_budget(params):
        raise ShapeError(f"law emits {law.omega} bits, protocol consumes {alice_budget(params)}")
    if law.omega > EXACT_CAP:
        raise CapacityError(f"exact enumeration is capped at {EXACT_CAP} bits, got {law.omega}")
    if view_bits(params.n, params.k, params.toeplitz) + params.k + 1 > VIEW_BITS_MAX:
        raise CapacityError("public record too wide to pack into a 64-bit code")


def eve_pattern_attack(law: RngDistribution, view: PublicView, params: ProtocolParams) -> np.ndarray:
    """Exact posterior over the ``2**k`` final keys given the public record."""
    _check_exact(law, params)
    strings = rng_models.all_strings(law.omega)
    weights = rng_models.expand(law)
    bob = np.broadcast_to(np.asarray(view.bob_bases, dtype=np.uint8), (strings.shape[0], params.n))
    keys, _, _, codes = pipeline_batch(strings, bob, params.n, params.k, params.test_random, params.toeplitz, True)
    match = (codes == view.code(params)) & (keys >= 0)
    post = np.bincount(keys[match], weights=weights[match], minlength=1 << params.k)
    total = post.sum()
    if total <= 0:
        raise DomainError("no string consistent with this public record yields a key")
    return post / total


def pattern_guess_greedy(law: RngDistribution, view: PublicView, params: ProtocolParams) -> int:
    """Per-position maximum-likelihood fill of the unrevealed key bits (sub-optimal)."""
    n = params.n
    sift = np.asarray(view.alice_bases) == np.asarray(view.bob_bases)
    revealed = dict(zip(view.test_subset, (int(v) for v in view.test_values)))
    if law.kind == "iid_bias":
        vals = [revealed.get(j, int(law.b > 0.5)) for j in range(n)]
    elif law.kind == "markov":
        vals = []
        for j in range(n):
            if j in revealed:
                vals.append(revealed[j])
            elif j == 0:
                vals.append(int(law.initial > 0.5))
            else:
                vals.append(int(law.transition[vals[-1]][1] > 0.5))
    else:
        return int(np.argmax(eve_pattern_attack(law, view, params)))
    block = [vals[j] for j in range(n) if sift[j] and j not in revealed]
    if params.toeplitz:
        return toeplitz_hash(np.asarray(block, dtype=np.uint8), view.hash_seed, n, params.k)
    key = 0
    for b in block[: params.k]:
        key = (key << 1) | b
    return key


def pattern_guess(law: RngDistribution, view: PublicView, params: ProtocolParams) -> tuple[int, str]:
    """Eve's best single key guess and the method used to get it."""
    if law.omega <= EXACT_GUESS_CAP:
        return int(np.argmax(eve_pattern_attack(law, view, params))), "exact"
    return pattern_guess_greedy(law, view, params), "greedy"


def expected_guess_probability(
    law: RngDistribution, params: ProtocolParams, bob_law: RngDistribution | None = None
) -> float:
    """Pr[Eve's optimal guess equals the final key], averaged over non-degenerate runs."""
    _check_exact(law, params)
    bob_law = bob_law or rng_models.uniform(params.n)
    strings = rng_models.all_strings(law.omega)
    bobs = rng_models.all_strings(params.n)
    wa, wb = rng_models.expand(law), rng_models.expand(bob_law)
    A = np.tile(strings, (bobs.shape[0], 1))
    B = np.repeat(bobs, strings.shape[0], axis=0)
    w = np.tile(wa, bobs.shape[0]) * np.repeat(wb, strings.shape[0])
    keys, _, _, codes = pipeline_batch(A, B, params.n, params.k, params.test_random, params.toeplitz, True)
    ok = keys >= 0
    combined = (codes[ok] << params.k) | keys[ok]
    uniq, inv = np.unique(combined, return_inverse=True)
    sums = np.bincount(inv, weights=w[ok])
    views = uniq >> params.k
    starts = np.flatnonzero(np.r_[True, views[1:] != views[:-1]])
    return float(np.maximum.reduceat(sums, starts).sum() / w[ok].sum())
