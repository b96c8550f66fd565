import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pnc_sim.harness import ebn0_to_esn0
from pnc_sim.oracles import ra_symbol_map
from pnc_sim.ra_code import (RaConfig, Xoshiro256, _wht, decode_xor, encode, from_labels,
                             make_interleaver, to_labels)
from pnc_sim.signal_model import Constellation, demodulate, modulate

BPSK, QPSK = Constellation.bpsk(), Constellation.qpsk()


def test_prng_reference_vectors():
    # splitmix64 from seed 0
    assert Xoshiro256(0).s == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F,
                               0xF88BB8A8724C81EC]
    # xoshiro256** from state (1, 2, 3, 4)
    r = Xoshiro256(0)
    r.s = [1, 2, 3, 4]
    assert [r.next() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_interleaver_frozen_values():
    assert make_interleaver(2, 3, 1).tolist() == [0, 3, 1, 5, 2, 4]
    assert make_interleaver(4, 3, 7).tolist() == [2, 10, 4, 1, 5, 0, 6, 7, 9, 11, 3, 8]


def test_interleaver_identity_and_determinism():
    assert make_interleaver(2, 3, 0).tolist() == list(range(6))
    assert np.array_equal(make_interleaver(50, 3, 9), make_interleaver(50, 3, 9))
    assert not np.array_equal(make_interleaver(50, 3, 9), make_interleaver(50, 3, 10))
    with pytest.raises(ValueError):
        make_interleaver(0, 3, 1)


@given(st.integers(1, 300), st.integers(1, 5), st.integers(0, 2**64 - 1))
def test_interleaver_bijection(m, q, seed):
    perm = make_interleaver(m, q, seed)
    assert sorted(perm.tolist()) == list(range(m * q))


def test_config_wiring():
    cfg = RaConfig(4, 3, 7)
    assert cfg.n == 12
    sc = cfg.source_checks
    assert sc.shape == (4, 3)
    assert sorted(sc.ravel().tolist()) == list(range(12))
    for m in range(4):
        assert np.all(cfg.check_source[sc[m]] == m)


def test_encode_examples():
    cfg = RaConfig(2, 3, 0)
    x = encode(modulate([1, 0], BPSK), cfg, BPSK)
    assert demodulate(x, BPSK).tolist() == [1, 0, 1, 1, 1, 1]
    assert np.all(encode(np.zeros(5, int), RaConfig(5, 3, 4), QPSK) == 0)
    with pytest.raises(ValueError):
        encode([0, 1, 0], cfg, BPSK)


def reference_accumulate(bits, perm, q):
    """Plain bit-level repeat, interleave, running XOR."""
    rep = [b for b in bits for _ in range(q)]
    out, acc = [], 0
    for n in range(len(rep)):
        acc ^= rep[perm[n]]
        out.append(acc)
    return out


@given(st.lists(st.integers(0, 1), min_size=1, max_size=30), st.integers(0, 1000))
def test_encode_matches_bit_reference(bits, seed):
    cfg = RaConfig(len(bits), 3, seed)
    x = encode(modulate(bits, BPSK), cfg, BPSK)
    assert demodulate(x, BPSK).tolist() == reference_accumulate(bits, cfg.interleaver, 3)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=20), st.data())
def test_encode_linear_under_xor(s1, data):
    s2 = np.array(data.draw(st.lists(st.integers(0, 3), min_size=len(s1), max_size=len(s1))))
    s1 = np.array(s1)
    cfg = RaConfig(len(s1), 3, 11)
    lhs = encode(QPSK.xor_table[s1, s2], cfg, QPSK)
    rhs = QPSK.xor_table[encode(s1, cfg, QPSK), encode(s2, cfg, QPSK)]
    assert np.array_equal(lhs, rhs)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=20))
def test_qpsk_is_two_bpsk_lanes(s):
    s = np.array(s)
    cfg = RaConfig(len(s), 3, 5)
    bits = QPSK.labels[encode(s, cfg, QPSK)]
    for lane in (0, 1):
        lane_src = QPSK.labels[s][:, lane]
        assert np.array_equal(bits[:, lane], BPSK.labels[encode(lane_src, cfg, BPSK)][:, 0])


def test_label_order_roundtrip(rng):
    t = rng.random((3, 4, 4))
    assert np.allclose(from_labels(to_labels(t, QPSK, pairs=True), QPSK, pairs=True), t)
    # in label order XOR is bitwise XOR of indices
    lab = QPSK.label_order()
    for a in range(4):
        for b in range(4):
            assert lab[QPSK.xor_table[a, b]] == lab[a] ^ lab[b]


def test_wht_convolution_matches_direct_sum(rng):
    L = 16
    u, v = rng.dirichlet(np.ones(L)), rng.dirichlet(np.ones(L))
    direct = np.zeros(L)
    for i in range(L):
        for j in range(L):
            direct[i ^ j] += u[i] * v[j]
    hu, hv = u[:, None].copy(), v[:, None].copy()
    _wht(hu)
    _wht(hv)
    prod = hu * hv
    _wht(prod)
    assert np.allclose(prod[:, 0] / L, direct, atol=1e-15)


def indicator_tables(x, c):
    t = np.full((len(x), c.size), 1e-9)
    t[np.arange(len(x)), x] = 1.0
    return t / t.sum(1, keepdims=True)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=40), st.integers(0, 99))
def test_noiseless_round_trip(s, seed):
    s = np.array(s)
    cfg = RaConfig(len(s), 3, seed)
    x = encode(s, cfg, QPSK)
    r = decode_xor(indicator_tables(x, QPSK), cfg, QPSK, iters=1)
    assert np.array_equal(r.source, s)
    r = decode_xor(indicator_tables(x, QPSK), cfg, QPSK)
    assert r.converged and np.array_equal(encode(r.source, cfg, QPSK), x)


def test_uniform_tables_stay_uniform():
    cfg = RaConfig(30, 3, 2)
    r = decode_xor(np.full((90, 4), 0.25), cfg, QPSK)
    assert np.allclose(r.posteriors, 0.25)
    assert r.converged


def test_decode_shape_check():
    with pytest.raises(ValueError):
        decode_xor(np.full((5, 4), 0.25), RaConfig(2, 3, 1), QPSK)


def test_cycle_free_code_is_exact(rng):
    # q = 1 leaves a chain, where sum-product is exact
    cfg = RaConfig(5, 1, 3)
    for _ in range(20):
        t = rng.dirichlet(np.full(4, 0.5), size=5)
        _, marg = ra_symbol_map(t, cfg, QPSK)
        r = decode_xor(t, cfg, QPSK, iters=100, tol=1e-15)
        assert np.allclose(r.posteriors, marg, atol=1e-10)


def test_agreement_with_exhaustive_map():
    cfg = RaConfig(2, 3, 1)
    es = ebn0_to_esn0(4.0, "qpsk", "upnc")  # Eb per coded bit
    s2 = 10 ** (-es / 10) / 2
    rng = np.random.default_rng(3)
    agree = 0
    for _ in range(1000):
        s = rng.integers(0, 4, 2)
        x = QPSK.alphabet[encode(s, cfg, QPSK)]
        y = x + np.sqrt(s2) * (rng.standard_normal(6) + 1j * rng.standard_normal(6))
        d = np.abs(y[:, None] - QPSK.alphabet[None, :]) ** 2
        t = np.exp(-(d - d.min(1, keepdims=True)) / (2 * s2))
        t /= t.sum(1, keepdims=True)
        agree += np.sum(ra_symbol_map(t, cfg, QPSK)[0] == decode_xor(t, cfg, QPSK).source)
    assert agree / 2000 >= 0.99
