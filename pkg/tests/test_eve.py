import numpy as np
import pytest

import oracles
from frozen import FROZEN
from qkd_rng_audit import rng_models
from qkd_rng_audit.bb84 import (
    EveStrategy,
    PartyConfig,
    ProtocolParams,
    PublicView,
    alice_budget,
    eve_pattern_attack,
    expected_guess_probability,
    pattern_guess,
    run_protocol,
)
from qkd_rng_audit.bb84.eve import pattern_guess_greedy
from qkd_rng_audit.errors import CapacityError, ShapeError
from qkd_rng_audit.kernels import pipeline_batch

SMALL = [
    ProtocolParams(2, 1),
    ProtocolParams(4, 2, "alternate", "none"),
    ProtocolParams(3, 2, "alternate", "toeplitz"),
    ProtocolParams(5, 2, "alternate", "none"),
]


def view_for(params, alice_bits, bob_bits):
    """The public record of one run, computed by the reference pipeline."""
    _, _, (bases, bob, tests, vals, seed) = oracles.pipeline(
        list(alice_bits), list(bob_bits), params.n, params.k, params.test_method, params.hashing
    )
    n = params.n
    flags = np.asarray(alice_bits[2 * n : 3 * n] if params.test_random else [0] * n, dtype=np.uint8)
    return PublicView(np.array(bases), np.array(bob), tests, np.array(vals), flags, np.array(seed, dtype=np.uint8), False)


def brute_posterior(law, params, view):
    post = np.zeros(1 << params.k)
    table = rng_models.expand(law)
    for s, p in zip(rng_models.all_strings(law.omega), table):
        key, _, public = oracles.pipeline(s.tolist(), list(view.bob_bases), params.n, params.k, params.test_method, params.hashing)
        if key is not None and public == (
            tuple(view.alice_bases.tolist()), tuple(view.bob_bases.tolist()), view.test_subset,
            tuple(view.test_values.tolist()), tuple(view.hash_seed.tolist()),
        ):
            post[key] += p
    return post / post.sum()


@pytest.mark.parametrize("params", SMALL)
def test_view_code_matches_kernel(params):
    rng = np.random.default_rng(0)
    omega = alice_budget(params)
    for _ in range(30):
        a = rng.integers(0, 2, omega, dtype=np.uint8)
        b = rng.integers(0, 2, params.n, dtype=np.uint8)
        _, _, _, codes = pipeline_batch(a[None], b[None], params.n, params.k, params.test_random, params.toeplitz, True)
        assert view_for(params, a, b).code(params) == codes[0]


@pytest.mark.parametrize("params", SMALL)
def test_posterior_matches_brute_force(params):
    law = rng_models.iid_bias(alice_budget(params), 0.3)
    rng = np.random.default_rng(1)
    checked = 0
    while checked < 10:
        a = rng_models.sample_batch(law, 1, rng)[0]
        b = rng.integers(0, 2, params.n, dtype=np.uint8)
        if oracles.pipeline(a.tolist(), b.tolist(), params.n, params.k, params.test_method, params.hashing)[0] is None:
            continue
        view = view_for(params, a, b)
        np.testing.assert_allclose(eve_pattern_attack(law, view, params), brute_posterior(law, params, view), atol=1e-12)
        checked += 1


def test_point_mass_posterior():
    params = ProtocolParams(4, 2, "alternate", "none")
    atom = "10110101"
    law = rng_models.point_mass(atom)
    bob = [0, 1, 0, 1]
    a = [int(c) for c in atom]
    key = oracles.pipeline(a, bob, 4, 2, "alternate", "none")[0]
    post = eve_pattern_attack(law, view_for(params, np.array(a), bob), params)
    assert post[key] == 1.0 and post.sum() == 1.0


def test_uniform_posterior_uniform():
    # with raw key bits (no hashing) every unrevealed bit is a fair coin
    params = ProtocolParams(5, 2, "alternate", "none")
    law = rng_models.uniform(alice_budget(params))
    a = np.array([1, 0, 1, 1, 0] + [0, 0, 0, 0, 0], dtype=np.uint8)
    post = eve_pattern_attack(law, view_for(params, a, [0, 0, 0, 0, 0]), params)
    np.testing.assert_allclose(post, np.full(4, 0.25))


@pytest.mark.parametrize(
    "params, key",
    [(ProtocolParams(2, 1), "guess_w8_b025"), (ProtocolParams(4, 2, "alternate", "none"), "guess_w8_b025_alt")],
)
def test_expected_guess_probability_oracle(params, key):
    law = rng_models.iid_bias(8, 0.25)
    p = expected_guess_probability(law, params)
    assert p == pytest.approx(FROZEN[key], abs=1e-12)
    assert p >= 2.0 ** -params.k


def test_uniform_guess_probability_baseline():
    params = ProtocolParams(4, 2, "alternate", "none")
    assert expected_guess_probability(rng_models.uniform(8), params) == pytest.approx(0.25, abs=1e-12)


def test_guess_method_switches():
    params = ProtocolParams(4, 2, "alternate", "none")
    law = rng_models.iid_bias(8, 0.2)
    t = run_protocol(PartyConfig(law), PartyConfig(rng_models.point_mass("0000")), params, seeds=0)
    view = PublicView.from_transcript(t)
    guess, method = pattern_guess(law, view, params)
    assert method == "exact" and guess == 0
    assert pattern_guess_greedy(law, view, params) == 0


def test_greedy_markov_follows_transitions():
    params = ProtocolParams(6, 2, "alternate", "none")
    law = rng_models.markov(18, 1.0, [[0.1, 0.9], [0.1, 0.9]])
    view = PublicView(np.zeros(6, np.uint8), np.zeros(6, np.uint8), (0, 2, 4), np.ones(3, np.uint8), np.zeros(6, np.uint8), np.zeros(0, np.uint8), False)
    assert pattern_guess_greedy(law, view, params) == 0b11


def test_shape_and_capacity_errors():
    params = ProtocolParams(4, 2, "alternate", "none")
    view = PublicView(np.zeros(4, np.uint8), np.zeros(4, np.uint8), (0,), np.zeros(1, np.uint8), np.zeros(4, np.uint8), np.zeros(0, np.uint8), False)
    with pytest.raises(ShapeError):
        eve_pattern_attack(rng_models.uniform(9), view, params)
    big = ProtocolParams(8, 2)
    with pytest.raises(CapacityError):
        eve_pattern_attack(rng_models.uniform(alice_budget(big)), view, big)
