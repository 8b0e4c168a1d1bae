import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublecap import fixtures, hilbert, protocol
from doublecap.hilbert import BlochVector, PureState, RandomStream
from doublecap.protocol import MessageBits, SharedPair


def test_sign_tie_is_positive():
    assert protocol.sign(0.0) == 1
    assert list(protocol.sign(np.array([-2.0, 0.0, 3.0]))) == [-1, 1, 1]


@pytest.mark.parametrize("k", range(4))
def test_message_index_round_trip(k):
    assert MessageBits.from_index(k).index == k


def test_message_bits_validation():
    with pytest.raises(ValueError):
        MessageBits(0, 1)


def test_encode_decode_scalar_matches_vectorized():
    rng = RandomStream(3)
    for _ in range(200):
        shared = SharedPair.sample(rng)
        x, y = hilbert.uniform_sphere_points(3, 2, rng)
        msg = protocol.tb_encode(BlochVector.from_array(x), shared)
        out = protocol.tb_decode(BlochVector.from_array(y), msg, shared)
        vec = protocol.tb_outcomes(x, y, shared.lambda1.as_array()[None], shared.lambda2.as_array()[None])
        assert out == int(vec[0])


def test_outcome_sign_calibration():
    sign, corr = protocol.calibrate_outcome_sign()
    assert sign == protocol.OUTCOME_SIGN
    # the orientation we keep must correlate with x.y, here 0.5
    assert abs(corr - 0.5) < 0.01


def test_extremes_deterministic():
    for label, perp in (("0", "1"), ("+", "-"), ("+i", "-i")):
        psi, phi = fixtures.pure_state(label), fixtures.pure_state(perp)
        assert protocol.tb_frequency(psi, psi, 10_000, seed=1) == 1.0
        assert protocol.tb_frequency(psi, phi, 10_000, seed=1) == 0.0


@settings(max_examples=8, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_pair_within_six_sigma(seed):
    rng = RandomStream(seed)
    psi, phi = hilbert.haar_random_state(2, rng), hilbert.haar_random_state(2, rng)
    res = protocol.tb_simulate(psi, phi, 50_000, seed)
    assert res.within()
    assert res.born == pytest.approx(hilbert.born_probability(psi, phi))


def test_simulation_threads_invariant():
    psi, phi = fixtures.pure_state("0"), fixtures.pure_state("+i")
    a = protocol.tb_simulate(psi, phi, 200_000, seed=4, threads=1)
    b = protocol.tb_simulate(psi, phi, 200_000, seed=4, threads=4)
    assert a == b


def test_rejects_qudits_and_small_trials():
    with pytest.raises(ValueError):
        protocol.tb_simulate(PureState([1, 0, 0]), PureState([1, 0, 0]), 10_000, 0)
    with pytest.raises(ValueError):
        protocol.tb_simulate(fixtures.pure_state("0"), fixtures.pure_state("1"), 10, 0)


class TestEquivalence:
    def test_identity_grid_exact(self):
        rep = protocol.verify_equivalence(fixtures.identity_grid_protocol())
        assert rep.mode == "exact"
        assert rep.passed
        assert rep.max_deviation < 1e-15

    def test_perturbed_decoder_flagged(self):
        tp = fixtures.identity_grid_protocol()
        dec = np.array(tp.decoder)
        dec[0, 2, 0] += 1e-6
        rep = protocol.verify_equivalence(tp.replace(decoder=dec))
        assert not rep.passed
        assert [(p.state, p.measurement) for p in rep.flagged] == [(2, 0)]

    def test_executable_protocol(self):
        rng = RandomStream(8)
        pairs = [(hilbert.haar_random_state(2, rng), hilbert.haar_random_state(2, rng)) for _ in range(5)]
        rep = protocol.verify_equivalence(protocol.tb_frequency, pairs=pairs, trials=20_000, seed=2)
        assert rep.mode == "monte_carlo"
        assert rep.passed

    def test_classical_guess_fails(self):
        # ignores the states: a fair coin
        coin = lambda psi, phi, trials, seed: 0.5
        pairs = [(fixtures.pure_state("0"), fixtures.pure_state("0"))]
        assert not protocol.verify_equivalence(coin, pairs=pairs, trials=10_000).passed

    def test_executable_needs_trials(self):
        with pytest.raises(ValueError):
            protocol.verify_equivalence(protocol.tb_frequency, pairs=[])


def test_lune_fractions_sum_to_one():
    rng = RandomStream(5)
    for _ in range(20):
        f = fixtures.lune_fractions(SharedPair.sample(rng))
        assert math.fsum(f) == pytest.approx(1.0, abs=1e-15)
