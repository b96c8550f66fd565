import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pnc_sim import bp_upnc
from pnc_sim.bp_upnc import (decide_sync, decide_xor, forward_backward, joint_posterior,
                             joint_posteriors, node_posteriors, pair_posteriors)
from pnc_sim.evidence import evidence_tables, xor_posterior
from pnc_sim.oracles import exhaustive_pair_posteriors
from pnc_sim.signal_model import ChannelParams, Constellation, transmit

BPSK, QPSK = Constellation.bpsk(), Constellation.qpsk()


def random_frame(rng, c, n, delta, phi, es):
    p = ChannelParams(delta, phi, es)
    xa, xb = rng.integers(0, c.size, n), rng.integers(0, c.size, n)
    return transmit(xa, xb, p, rng, c), p, xa, xb


@given(st.sampled_from(["bpsk", "qpsk"]), st.integers(1, 4), st.floats(0.05, 0.95),
       st.floats(0, 2 * math.pi - 1e-9), st.floats(-3, 10), st.integers(0, 2**32 - 1))
def test_tree_exactness(mod, n, delta, phi, es, seed):
    c = Constellation.of(mod)
    f, p, _, _ = random_frame(np.random.default_rng(seed), c, n, delta, phi, es)
    assert np.max(np.abs(pair_posteriors(f, p, c) - exhaustive_pair_posteriors(f, p, c))) < 1e-9


def test_exactness_at_six_symbols(rng):
    f, p, _, _ = random_frame(rng, QPSK, 6, 0.5, math.pi / 8, 1.0)
    assert np.max(np.abs(pair_posteriors(f, p, QPSK) - exhaustive_pair_posteriors(f, p, QPSK))) < 1e-9


def test_exhaustive_decisions_identical(rng):
    for _ in range(20):
        f, p, _, _ = random_frame(rng, QPSK, 4, 0.9, math.pi / 4, 0.0)
        d = decide_xor(pair_posteriors(f, p, QPSK), QPSK).xor_symbols
        ref = np.argmax(xor_posterior(exhaustive_pair_posteriors(f, p, QPSK), QPSK), axis=1)
        assert np.array_equal(d, ref)


def test_three_node_hand_computation():
    p1 = np.array([[0.3, 0.3], [0.2, 0.2]])
    p2 = np.array([[0.1, 0.2], [0.3, 0.4]])
    p3 = np.array([[0.45, 0.05], [0.45, 0.05]])
    ev = np.stack([p1, p2, p3])
    m = forward_backward(ev)
    # into the middle node: from the left, sum_b p1 = (.6, .4) on x_A; from the right,
    # sum_a p3 = (.9, .1) on x_B
    assert np.allclose(m.q_right[1], np.array([[0.6, 0.6], [0.4, 0.4]]) / 2)
    assert np.allclose(m.q_left[1], np.array([[0.9, 0.1], [0.9, 0.1]]) / 2)
    # onward to the last node, on x_B: (.1*.6 + .3*.4, .2*.6 + .4*.4) = (.18, .28)
    assert np.allclose(m.q_right[2], np.array([[0.18, 0.28], [0.18, 0.28]]) / 0.92)
    # back to the first node, on x_A: (.1*.9 + .2*.1, .3*.9 + .4*.1) = (.11, .31)
    assert np.allclose(m.q_left[0], np.array([[0.11, 0.11], [0.31, 0.31]]) / 0.84)
    post = joint_posterior(ev, m, 1)
    assert np.allclose(post, np.array([[0.054, 0.012], [0.108, 0.016]]) / 0.19)
    assert np.allclose(m.r_right[0], p1)


def test_uniform_evidence_uniform_messages():
    ev = np.full((9, 4, 4), 1 / 16)
    m = forward_backward(ev)
    for arr in (m.q_right, m.r_right, m.q_left, m.r_left):
        assert np.allclose(arr, 1 / 16)
    assert np.allclose(joint_posteriors(ev, m), 1 / 16)


def test_indicator_evidence_propagates():
    p = ChannelParams(0.5, 0.4, 120.0)
    xa, xb = np.array([0, 3, 1, 2]), np.array([2, 2, 0, 1])
    f = transmit(xa, xb, p, None, QPSK)
    ev = evidence_tables(f, p, QPSK)
    m = forward_backward(ev)
    for i in range(1, 9):
        # 0-based node i holds (x_A[i // 2], x_B[(i + 1) // 2 - 1])
        a, b = xa[min(i // 2, 3)], xb[(i + 1) // 2 - 1]
        q = m.q_right[i]
        if i % 2:  # shares x_A with its left neighbour
            assert np.isclose(q[a].sum(), 1.0)
        else:
            assert np.isclose(q[:, b].sum(), 1.0)
    post = joint_posteriors(ev, m)
    for n in range(4):
        assert np.isclose(post[n, xa[n], xb[n]], 1.0)


def test_one_pass_sufficiency(rng):
    f, p, _, _ = random_frame(rng, QPSK, 50, 0.3, 1.0, 0.0)
    ev = evidence_tables(f, p, QPSK)
    m1 = forward_backward(ev)
    # a second sweep from the converged state: rerun with the first pass's output
    # as the starting messages; on a tree it reproduces them exactly
    K, S, _ = ev.shape
    fq = np.empty((K, S))
    bq = np.empty((K, S))
    ones = np.ones_like(ev)
    for _ in range(2):
        bp_upnc.chain_forward(ev, ones, fq)
        bp_upnc.chain_backward(ev, ones, bq)
    q_right, q_left = bp_upnc.expand_incoming(fq, bq)
    assert np.max(np.abs(q_right - m1.q_right)) < 1e-12
    assert np.max(np.abs(q_left - m1.q_left)) < 1e-12


def test_marginals_agree_across_neighbours(rng):
    f, p, _, _ = random_frame(rng, QPSK, 20, 0.6, 0.5, 2.0)
    ev = evidence_tables(f, p, QPSK)
    nodes = node_posteriors(ev, forward_backward(ev))
    for n in range(20):
        i = 2 * n + 1  # node holding (x_A[n], x_B[n])
        # x_A[n] is shared with node i-1, x_B[n] with node i+1
        assert np.allclose(nodes[i].sum(1), nodes[i - 1].sum(1), atol=1e-9)
        assert np.allclose(nodes[i].sum(0), nodes[i + 1].sum(0), atol=1e-9)


def test_joint_posterior_index_range(rng):
    f, p, _, _ = random_frame(rng, BPSK, 3, 0.5, 0.0, 0.0)
    ev = evidence_tables(f, p, BPSK)
    m = forward_backward(ev)
    with pytest.raises(IndexError):
        joint_posterior(ev, m, 0)
    with pytest.raises(IndexError):
        joint_posterior(ev, m, 4)
    assert np.allclose(joint_posterior(ev, m, 2), joint_posteriors(ev, m)[1])


def test_absent_evidence_rejected():
    ev = np.full((5, 2, 2), 0.25)
    ev[0] = np.nan
    with pytest.raises(ValueError):
        forward_backward(ev)


def test_decide_xor_examples():
    t = np.zeros((1, 4, 4))
    t[0, 0, 2] = 1
    assert decide_xor(t, QPSK).xor_symbols[0] == 2
    tie = np.zeros((1, 4, 4))
    tie[0, 0, 1] = tie[0, 0, 3] = 0.5  # XOR 1 and XOR 3, equally likely
    assert decide_xor(tie, QPSK).xor_symbols[0] == 1
    assert decide_xor(np.full((1, 2, 2), 0.25), BPSK).xor_symbols[0] == 0


def test_decide_sync_examples():
    p = ChannelParams(0.0, 0.0, 20.0)
    assert decide_sync(0.0, p, BPSK) == 1
    assert decide_sync(2.0, p, BPSK) == 0
    assert decide_sync(-2.0, p, BPSK) == 0


def test_decide_sync_direct_formula():
    # sigma^2 = 0.5 at Es/N0 = 0 dB
    p = ChannelParams(0.0, 0.0, 0.0)
    assert p.sigma2 == 0.5
    for y in (1.0, 0.4, 1.6, -1.2, 3.0):
        lhs = math.exp(-(y - 2) ** 2 / 1.0) + math.exp(-(y + 2) ** 2 / 1.0)
        rhs = 2 * math.exp(-(y**2) / 1.0)
        assert decide_sync(y, p, BPSK) == (0 if lhs >= rhs else 1)
    assert decide_sync(1.0, p, BPSK) == 1


@given(st.floats(-3, 12), st.integers(0, 2**32 - 1))
def test_sync_consistency_bpsk(es, seed):
    rng = np.random.default_rng(seed)
    f, p, _, _ = random_frame(rng, BPSK, 200, 0.0, 0.0, es)
    general = decide_xor(pair_posteriors(f, p, BPSK), BPSK).xor_symbols
    assert np.array_equal(general, decide_sync(f.samples[1::2], p, BPSK))


def test_sync_qpsk_matches_general_at_zero_phase(rng):
    f, p, _, _ = random_frame(rng, QPSK, 500, 0.0, 0.0, 6.0)
    general = decide_xor(pair_posteriors(f, p, QPSK), QPSK).xor_symbols
    assert np.array_equal(general, decide_sync(f.samples[1::2], p, QPSK))
