import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbnn.canonical import Permutation
from pbnn.core import (
    BinaryState,
    Pbnn,
    StateError,
    endpoints,
    hidden_layer,
    hidden_layer_direct,
    step,
    step_bits,
    step_direct,
    trajectory,
    transition_table,
    truth_table,
    weights_for_cn,
)

from conftest import GBPO50


def sgn_oracle_mask(w):
    """Truth table straight from the signum over all eight +-1 neighborhoods."""
    mask = 0
    for k, (a, b, c) in enumerate(itertools.product((-1, 1), repeat=3)):
        if w[0] * a + w[1] * b + w[2] * c >= 0:
            mask |= 1 << k
    return mask


@pytest.mark.parametrize("cn, w", [(0, (-1, -1, -1)), (1, (-1, -1, 1)), (7, (1, 1, 1))])
def test_weights_for_cn_table(cn, w):
    assert weights_for_cn(cn) == w


def test_weights_bit_layout():
    for cn in range(8):
        assert weights_for_cn(cn) == tuple(1 if cn >> b & 1 else -1 for b in (2, 1, 0))


@pytest.mark.parametrize("cn", [-1, 8, 1.5])
def test_weights_reject_out_of_range(cn):
    with pytest.raises(ValueError):
        weights_for_cn(cn)


def test_truth_table_frozen_values():
    assert truth_table(1) == 0x2B
    assert truth_table(7) == 0xE8
    assert truth_table(0) == ~truth_table(7) & 0xFF


@pytest.mark.parametrize("cn", range(8))
def test_truth_table_matches_signum_oracle(cn):
    assert truth_table(cn) == sgn_oracle_mask(weights_for_cn(cn))


def test_no_ties_anywhere():
    for cn in range(8):
        w = weights_for_cn(cn)
        for a, b, c in itertools.product((-1, 1), repeat=3):
            assert abs(w[0] * a + w[1] * b + w[2] * c) in (1, 3)


def test_state_round_trip_exhaustive():
    for n in range(3, 9):
        for v in itertools.product((-1, 1), repeat=n):
            s = BinaryState.from_values(v)
            assert s.values() == v
            assert s.bits >> n == 0
            assert BinaryState.parse(s.to_pm()) == s
            assert BinaryState.parse(s.to_hex(), n) == s


def test_state_parse_errors():
    with pytest.raises(StateError, match="position 3"):
        BinaryState.parse("++x-")
    with pytest.raises(StateError):
        BinaryState.parse("ff")  # hex needs n
    with pytest.raises(StateError):
        BinaryState.parse("+++", 4)
    with pytest.raises(StateError):
        BinaryState(3, 8)
    with pytest.raises(ValueError):
        BinaryState(65, 0)


def test_hidden_layer_hand_example():
    x = BinaryState.from_values((1, -1, -1))
    expected = (-1, -1, 1)
    assert hidden_layer_direct(x, 1).values() == expected
    assert hidden_layer(x, 1).values() == expected


@pytest.mark.parametrize("n", [3, 7, 17, 64])
def test_homogeneous_states(n):
    plus = BinaryState.from_values((1,) * n)
    minus = BinaryState.from_values((-1,) * n)
    assert hidden_layer(plus, 1) == minus
    assert hidden_layer(minus, 7) == minus


def test_step_with_permutation_hand_example():
    net = Pbnn(3, 1, Permutation((1, 3, 2)))
    x = BinaryState.from_values((1, -1, -1))
    assert step(x, net).values() == (-1, 1, -1)
    assert step_direct(x, net).values() == (-1, 1, -1)


def test_identity_step_is_hidden_layer():
    net = Pbnn(9, 5, Permutation.identity(9))
    for bits in range(1 << 9):
        x = BinaryState(9, bits)
        assert step(x, net) == hidden_layer(x, 5)


def test_step_dimension_mismatch():
    with pytest.raises(ValueError):
        step(BinaryState(4, 0), Pbnn(3, 1, Permutation.identity(3)))
    with pytest.raises(ValueError):
        Pbnn(4, 1, Permutation.identity(3))


def test_bit_parallel_equals_direct_exhaustive():
    rng = np.random.default_rng(7)
    for n in range(3, 11):
        sigma = Permutation(tuple(int(v) + 1 for v in rng.permutation(n)))
        for cn in range(8):
            net = Pbnn(n, cn, sigma)
            table = transition_table(net)
            for bits in range(1 << n):
                x = BinaryState(n, bits)
                direct = step_direct(x, net).bits
                assert step_bits(bits, net) == direct
                assert int(table[bits]) == direct


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 64).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(0, 7), st.permutations(range(1, n + 1)), st.integers(0, (1 << n) - 1))))
def test_bit_parallel_equals_direct_random(case):
    n, cn, ids, bits = case
    net = Pbnn(n, cn, Permutation(tuple(ids)))
    x = BinaryState(n, bits)
    assert step(x, net) == step_direct(x, net)


def test_endpoint_closure():
    for n in range(3, 13):
        lo, hi = endpoints(n)
        for cn in range(8):
            net = Pbnn(n, cn, Permutation.identity(n))
            for e in (lo, hi):
                assert step_bits(e, net) in (lo, hi)


def test_trajectory_basics():
    net = Pbnn(7, 1, Permutation.identity(7))
    x0 = BinaryState(7, 0b0010011)
    assert trajectory(x0, net, 0) == [x0]
    a = trajectory(x0, net, 5)
    b = trajectory(a[-1], net, 8)
    assert trajectory(x0, net, 13) == a + b[1:]
    with pytest.raises(ValueError):
        trajectory(x0, net, -1)


def test_gbpo50_orbit_returns_after_50_steps():
    from pbnn.attractor import analyze

    net = Pbnn(17, 1, GBPO50)
    x0 = BinaryState(17, analyze(net).gbpo.min_state)
    traj = trajectory(x0, net, 50)
    assert traj[-1] == x0
    assert len(set(traj[:50])) == 50
