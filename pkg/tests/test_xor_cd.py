import math

import numpy as np
import pytest

from pnc_sim import xor_cd
from pnc_sim.evidence import xor_posterior
from pnc_sim.oracles import exhaustive_pair_posteriors
from pnc_sim.ra_code import RaConfig, encode
from pnc_sim.signal_model import ChannelParams, Constellation, ReceivedFrame, transmit

QPSK = Constellation.qpsk()


def coded_frame(cfg, p, rng, noisy=True):
    sa, sb = rng.integers(0, 4, cfg.m), rng.integers(0, 4, cfg.m)
    xa, xb = encode(sa, cfg, QPSK), encode(sb, cfg, QPSK)
    return transmit(xa, xb, p, rng if noisy else None, QPSK), sa, sb, xa, xb


@pytest.mark.parametrize("delta,phi", [(0.5, 0.0), (0.5, math.pi / 4), (0.0, math.pi / 4)])
def test_stage1_noiseless_indicators(delta, phi, rng):
    cfg = RaConfig(20, 3, 1)
    p = ChannelParams(delta, phi, 150.0)
    f, _, _, xa, xb = coded_frame(cfg, p, rng, noisy=False)
    t = xor_cd.stage1(f, p, QPSK)
    assert t.shape == (60, 4)
    assert np.array_equal(np.argmax(t, axis=1), QPSK.xor_table[xa, xb])
    assert np.allclose(t.max(axis=1), 1.0)


def test_stage1_matches_exhaustive(rng):
    for delta in (0.1, 0.5, 0.9):
        p = ChannelParams(delta, math.pi / 8, 1.0)
        f = transmit(rng.integers(0, 4, 4), rng.integers(0, 4, 4), p, rng, QPSK)
        ref = xor_posterior(exhaustive_pair_posteriors(f, p, QPSK), QPSK)
        assert np.allclose(xor_cd.stage1(f, p, QPSK), ref, atol=1e-9)


def test_stage1_uninformative_frame():
    p = ChannelParams(0.5, 0.3, 0.0)
    f = ReceivedFrame(np.zeros(7, complex), np.full(7, 1e30), 3)
    assert np.allclose(xor_cd.stage1(f, p, QPSK), 0.25)


def test_stage2_indicator_tables(rng):
    cfg = RaConfig(30, 3, 5)
    s = rng.integers(0, 4, 30)
    x = encode(s, cfg, QPSK)
    t = np.full((90, 4), 1e-12)
    t[np.arange(90), x] = 1
    r = xor_cd.stage2(t, cfg, QPSK)
    assert np.array_equal(r.xor_sources, s)
    assert r.converged


def test_table_injection(rng):
    cfg = RaConfig(40, 3, 2)
    p = ChannelParams(0.5, 0.4, 3.0)
    f, *_ = coded_frame(cfg, p, rng)
    tables = xor_cd.stage1(f, p, QPSK)
    full = xor_cd.decode(f, p, cfg, QPSK)
    injected = xor_cd.stage2(tables.copy(), cfg, QPSK)
    assert np.array_equal(full.xor_sources, injected.xor_sources)
    assert np.array_equal(full.posteriors, injected.posteriors)
    assert np.array_equal(full.stage1_tables, tables)


@pytest.mark.parametrize("delta,phi", [(0.0, 0.0), (0.5, math.pi / 4), (0.3, 2.0)])
def test_noiseless_end_to_end(delta, phi, rng):
    cfg = RaConfig(100, 3, 6)
    p = ChannelParams(delta, phi, 150.0)
    f, sa, sb, _, _ = coded_frame(cfg, p, rng, noisy=False)
    r = xor_cd.decode(f, p, cfg, QPSK)
    assert np.array_equal(r.xor_sources, QPSK.xor_table[sa, sb])
    assert np.array_equal(np.argmax(r.posteriors, axis=1), r.xor_sources)
