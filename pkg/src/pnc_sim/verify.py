"""Decoder-versus-oracle checks shared by ``pnc-sim verify`` and the test suite.

Each check returns a small result object; thresholds live with the callers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bp_upnc, jt_cnc, xor_cd
from .harness import Scheme, SweepConfig, ebn0_to_esn0, run_point
from .oracles import (exhaustive_pair_posteriors, joint_xor_map, ra_symbol_map,
                      sync_bpsk_xor_ber)
from .ra_code import RaConfig, encode
from .signal_model import ChannelParams, Constellation, transmit

DELTAS = (0.1, 0.5, 0.9)
PHIS = (0.0, math.pi / 8, math.pi / 4)
GRID_DELTAS = (0.0, 0.5)
GRID_PHIS = tuple(k * math.pi / 8 for k in range(5))
# the four asynchrony cases: (aligned | offset) x (phase-synchronous | offset)
CASES = ((0.0, 0.0), (0.0, math.pi / 4), (0.5, 0.0), (0.5, math.pi / 4))


@dataclass
class TreeCheck:
    frames: int
    max_abs_error: float
    decision_mismatches: int


def tree_exactness(frames: int = 500, seed: int = 1) -> TreeCheck:
    """BP-UPNC pair posteriors against brute-force Bayes on small frames.

    Frames cycle through BPSK/QPSK, delta in {0.1, 0.5, 0.9} and
    phi in {0, pi/8, pi/4}; N is drawn from 1..6 (QPSK uses N = 6 on every
    25th frame only, as that enumeration alone takes about a second).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    mismatches = 0
    for i in range(frames):
        c = Constellation.of(("bpsk", "qpsk")[i % 2])
        delta = DELTAS[(i // 2) % 3]
        phi = PHIS[(i // 6) % 3]
        if c.size == 2:
            n = int(rng.integers(1, 7))
        else:
            n = 6 if i % 25 == 1 else int(rng.integers(1, 6))
        p = ChannelParams(delta, phi, float(rng.uniform(-2.0, 10.0)))
        f = transmit(rng.integers(0, c.size, n), rng.integers(0, c.size, n), p, rng, c)
        bp = bp_upnc.pair_posteriors(f, p, c)
        ref = exhaustive_pair_posteriors(f, p, c)
        worst = max(worst, float(np.max(np.abs(bp - ref))))
        mismatches += int(np.sum(bp_upnc.decide_xor(bp, c).xor_symbols
                                 != bp_upnc.decide_xor(ref, c).xor_symbols))
    return TreeCheck(frames, worst, mismatches)


@dataclass
class Agreement:
    trials: int
    symbols: int
    agreed: int

    @property
    def rate(self) -> float:
        return self.agreed / self.symbols


@dataclass
class MapAgreement:
    es_n0_db: float
    jt_cnc: Agreement
    xor_cd: Agreement


def map_agreement(trials: int = 1000, ebn0_db: float = 4.0, per_coded_bit: bool = True,
                  seed: int = 2, ra_seed: int = 1) -> MapAgreement:
    """M=2, q=3 QPSK: loopy-BP decisions against exhaustive symbol-wise MAP.

    Jt-CNC is compared with the joint MAP over all 256 source pairs, XOR-CD's
    second stage with the MAP over the 16 XOR sources given its stage-1
    tables. Trials cycle through the four asynchrony cases. With
    ``per_coded_bit`` the SNR is taken per coded bit (no rate shift).
    """
    c = Constellation.qpsk()
    cfg = RaConfig(2, 3, ra_seed)
    scheme = Scheme.BP_UPNC if per_coded_bit else Scheme.JT_CNC
    es = ebn0_to_esn0(ebn0_db, "qpsk", scheme)
    rng = np.random.default_rng(seed)
    jt = xc = 0
    for t in range(trials):
        delta, phi = CASES[t % 4]
        p = ChannelParams(delta, phi, es)
        sa, sb = rng.integers(0, 4, 2), rng.integers(0, 4, 2)
        f = transmit(encode(sa, cfg, c), encode(sb, cfg, c), p, rng, c)
        jt += int(np.sum(joint_xor_map(f, p, cfg, c)[0] == jt_cnc.decode(f, p, cfg, c).xor_sources))
        tables = xor_cd.stage1(f, p, c)
        xc += int(np.sum(ra_symbol_map(tables, cfg, c)[0]
                         == xor_cd.stage2(tables, cfg, c).xor_sources))
    n = 2 * trials
    return MapAgreement(es, Agreement(trials, n, jt), Agreement(trials, n, xc))


@dataclass
class SyncBerCheck:
    simulated: float
    analytic: float
    bit_errors: int

    @property
    def ratio(self) -> float:
        return self.simulated / self.analytic


def sync_ber(packets: int = 2000, ebn0_db: float = 7.0, seed: int = 0,
             threads: int | None = None) -> SyncBerCheck:
    """BP-UPNC at delta = phi = 0 against the integrated synchronous decision regions."""
    cfg = SweepConfig(Scheme.BP_UPNC, "bpsk", [0.0], [0.0], [ebn0_db], packets_per_point=packets,
                      bits_per_packet=2048, master_seed=seed)
    rec = run_point(cfg, 0.0, 0.0, ebn0_db, threads=threads)
    return SyncBerCheck(rec.ber, sync_bpsk_xor_ber(ebn0_db), rec.bit_errors)


@dataclass
class RoundTrips:
    frames: int
    errors: dict = field(default_factory=dict)  # (scheme, mod, delta, phi) -> bit errors

    @property
    def failures(self) -> dict:
        return {k: v for k, v in self.errors.items() if v}


NOISELESS_EBN0 = 250.0


def noiseless_round_trips(frames: int = 100, bits: int = 256, seed: int = 3,
                          modulations=("bpsk", "qpsk"), threads: int | None = 1) -> RoundTrips:
    """Every scheme over the (delta, phi) grid at an SNR where noise is below round-off."""
    out = RoundTrips(frames)
    for mod in modulations:
        for scheme in Scheme:
            grid = [(0.0, 0.0)] if scheme is Scheme.SYNC_BENCH else \
                [(d, p) for d in GRID_DELTAS for p in GRID_PHIS]
            cfg = SweepConfig(scheme, mod, [g[0] for g in grid], [g[1] for g in grid],
                              [NOISELESS_EBN0], packets_per_point=frames, bits_per_packet=bits,
                              master_seed=seed)
            for delta, phi in grid:
                rec = run_point(cfg, delta, phi, NOISELESS_EBN0, threads=threads)
                out.errors[(scheme.value, mod, delta, phi)] = rec.bit_errors
    return out


def xor_ambiguous_pairs(c: Constellation, delta: float, phi: float, tol: float = 1e-9):
    """Symbol pairs whose noiseless superpositions coincide but whose XORs differ.

    Only meaningful for aligned arrivals, where one sample carries all the
    information about a pair.
    """
    rot = complex(math.cos(phi), math.sin(phi))
    pairs = [(a, b) for a in range(c.size) for b in range(c.size)]
    clashes = []
    for i, (a, b) in enumerate(pairs):
        for a2, b2 in pairs[i + 1:]:
            y1 = c.alphabet[a] + c.alphabet[b] * rot
            y2 = c.alphabet[a2] + c.alphabet[b2] * rot
            if abs(y1 - y2) < tol and c.xor_table[a, b] != c.xor_table[a2, b2]:
                clashes.append(((a, b), (a2, b2)))
    return clashes
