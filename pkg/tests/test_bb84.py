from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from frozen import FROZEN
from qkd_rng_audit import rng_models
from qkd_rng_audit.bb84 import (
    EveStrategy,
    PartyConfig,
    ProtocolParams,
    ProtocolTranscript,
    Seeds,
    alice_budget,
    bob_budget,
    replay,
    run_protocol,
)
from qkd_rng_audit.bb84.protocol import abort_probability, intercept_resend_error_table, sifted_error_rate
from qkd_rng_audit.errors import BudgetExhaustedError, DomainError, ShapeError


def parties(params, alice_law=None, bob_law=None):
    a = alice_law or rng_models.uniform(alice_budget(params))
    b = bob_law or rng_models.uniform(bob_budget(params))
    return PartyConfig(a), PartyConfig(b)


@pytest.mark.parametrize(
    "params, expected",
    [
        (ProtocolParams(8, 4), 8 * 4 + 3),
        (ProtocolParams(8, 4, test_method="alternate"), 8 * 3 + 3),
        (ProtocolParams(8, 4, hashing="none"), 8 * 3),
        (ProtocolParams(8, 4, test_method="alternate", hashing="none"), 16),
    ],
)
def test_budget_layout(params, expected):
    assert alice_budget(params) == expected
    assert alice_budget(params) == oracles.budget(params.n, params.k, params.test_method, params.hashing)
    assert bob_budget(params) == params.n


def test_undisturbed_channel():
    params = ProtocolParams(64, 8)
    t = run_protocol(*parties(params), params, EveStrategy.none(), 4)
    assert t.qber == 0.0
    assert not t.aborted
    assert t.keys_agree and len(t.final_key) == 8
    assert t.leakage == 0


def test_intercept_resend_table():
    table = intercept_resend_error_table()
    assert len(table) == 16
    sifted = [v for (a, al, e, be), v in table.items() if al == be]
    assert sum(sifted) / len(sifted) == Fraction(1, 4) == oracles.intercept_resend_sifted_error()
    assert sifted_error_rate(EveStrategy.intercept_resend(1.0)) == FROZEN["ir_sifted_error"]
    assert sifted_error_rate(EveStrategy.intercept_resend(0.4), noise=0.1) == pytest.approx(0.1 * 0.9 + 0.9 * 0.1)


def test_intercept_resend_qber():
    params = ProtocolParams(10_000, 16)
    t = run_protocol(*parties(params), params, EveStrategy.intercept_resend(1.0), 2024)
    sd = np.sqrt(0.25 * 0.75 / len(t.test_subset))
    assert abs(t.qber - 0.25) <= 4 * sd
    assert t.aborted and t.abort_reason == "qber"


def test_intercept_resend_qber_unbiased():
    params = ProtocolParams(10_000, 16)
    a, b = parties(params)
    runs = [run_protocol(a, b, params, EveStrategy.intercept_resend(1.0), s) for s in range(100)]
    errors = sum(round(t.qber * len(t.test_subset)) for t in runs)
    tested = sum(len(t.test_subset) for t in runs)
    assert abs(errors / tested - 0.25) <= 4 * np.sqrt(0.25 * 0.75 / tested)


def test_partial_intercept_scales():
    params = ProtocolParams(20_000, 16, qber_threshold=1.0)
    t = run_protocol(*parties(params), params, EveStrategy.intercept_resend(0.4), 5)
    assert t.qber == pytest.approx(0.1, abs=0.01)


def test_transcript_invariants():
    params = ProtocolParams(200, 8, noise=0.02)
    t = run_protocol(*parties(params), params, EveStrategy.intercept_resend(0.2), 17)
    sift = [a == b for a, b in zip(t.alice_bases, t.bob_bases)]
    assert t.sift_mask == "".join("1" if s else "0" for s in sift)
    assert all(sift[i] for i in t.test_subset)
    assert set(t.key_block_positions).isdisjoint(t.test_subset)
    assert sorted(t.key_block_positions + t.test_subset) == [i for i, s in enumerate(sift) if s]
    errs = sum(t.alice_bits[i] != t.bob_outcomes[i] for i in t.test_subset)
    assert t.qber == errs / len(t.test_subset)


def test_alternate_test_selection():
    params = ProtocolParams(40, 4, test_method="alternate")
    t = run_protocol(*parties(params), params, seeds=3)
    sifted = [i for i, c in enumerate(t.sift_mask) if c == "1"]
    assert t.test_subset == sifted[::2]


@pytest.mark.parametrize(
    "params",
    [ProtocolParams(16, 4), ProtocolParams(16, 4, "alternate", "none"), ProtocolParams(33, 5, "random", "none")],
)
def test_randomness_accounting(params):
    for seed in range(5):
        t = run_protocol(*parties(params), params, EveStrategy.intercept_resend(0.5), seed)
        assert t.alice_bits_read == alice_budget(params)
        assert t.bob_bits_read == bob_budget(params)


def test_short_budget_exhausts():
    params = ProtocolParams(16, 4)
    with pytest.raises(BudgetExhaustedError):
        run_protocol(PartyConfig(rng_models.uniform(alice_budget(params) - 1)), PartyConfig(rng_models.uniform(16)), params)
    with pytest.raises(ShapeError):
        run_protocol(PartyConfig(rng_models.uniform(alice_budget(params) + 1)), PartyConfig(rng_models.uniform(16)), params)


def test_minimum_qubits():
    params = ProtocolParams(3, 1)
    with pytest.raises(DomainError):
        run_protocol(*parties(params), params)
    run_protocol(*parties(params), params, enforce_min_qubits=False)


def test_degenerate_run_flagged():
    params = ProtocolParams(4, 2, test_method="alternate", hashing="none")
    # Bob's bases never match Alice's: nothing survives sifting
    alice = rng_models.point_mass("0000" + "1111")
    bob = rng_models.point_mass("0000")
    t = run_protocol(PartyConfig(alice), PartyConfig(bob), params)
    assert t.aborted and t.abort_reason == "degenerate" and t.final_key == ""


def test_determinism_and_replay():
    params = ProtocolParams(128, 8, noise=0.03)
    law = rng_models.markov(alice_budget(params), 0.5, [[0.6, 0.4], [0.45, 0.55]])
    a, b = parties(params, law)
    t1 = run_protocol(a, b, params, EveStrategy.intercept_resend(0.3), Seeds(1, 2, 3))
    t2 = run_protocol(a, b, params, EveStrategy.intercept_resend(0.3), Seeds(1, 2, 3))
    assert t1.to_json() == t2.to_json()
    back = ProtocolTranscript.from_json(t1.to_json())
    assert replay(back).to_json() == t1.to_json()
    t3 = run_protocol(a, b, params, EveStrategy.intercept_resend(0.3), Seeds(1, 2, 4))
    assert t3.to_json() != t1.to_json()


def test_pattern_guesser_records_guess():
    params = ProtocolParams(4, 2, test_method="alternate", hashing="none")
    law = rng_models.point_mass("10110101")
    t = run_protocol(PartyConfig(law), PartyConfig(rng_models.point_mass("0101")), params, EveStrategy.pattern_guesser(), 0)
    assert t.eve_guess_method == "exact"
    assert t.eve_guess == t.final_key


def test_pattern_guesser_greedy_at_scale():
    params = ProtocolParams(64, 4)
    t = run_protocol(*parties(params, rng_models.iid_bias(alice_budget(params), 0.3)), params, EveStrategy.pattern_guesser(), 1)
    assert t.eve_guess_method == "greedy"
    assert len(t.eve_guess) == 4


def test_eve_parse():
    assert EveStrategy.parse("none") == EveStrategy.none()
    assert EveStrategy.parse("ir:0.25") == EveStrategy.intercept_resend(0.25)
    assert EveStrategy.parse("pattern").kind == "pattern_guesser"
    for bad in ("ir:x", "ir:1.5", "mitm"):
        with pytest.raises(DomainError):
            EveStrategy.parse(bad)


def test_abort_probability_matches_oracle():
    for t in range(1, 12):
        for e in (0.0, 0.05, 0.25):
            ours = float(abort_probability(np.array([t]), e, 0.11)[0])
            assert ours == pytest.approx(float(oracles.abort_prob(t, e, 0.11)), abs=1e-12)
    assert abort_probability(np.array([0]), 0.1, 0.11)[0] == 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 60), st.integers(1, 6), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_abort_iff_qber_above_threshold(n, k, f, seed):
    params = ProtocolParams(n, k, noise=0.05)
    t = run_protocol(*parties(params), params, EveStrategy.intercept_resend(f), seed)
    if t.abort_reason != "degenerate":
        assert t.aborted == (t.qber > params.qber_threshold)
