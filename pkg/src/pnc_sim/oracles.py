"""Brute-force references used to check the message-passing decoders.

Nothing here goes through the evidence tables or the message-passing code:
likelihoods are rebuilt from the raw samples and every hypothesis is
enumerated explicitly. Sizes are therefore kept tiny.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate, optimize, stats

from .ra_code import RaConfig, encode
from .signal_model import ChannelParams, Constellation, ReceivedFrame, sample_means


def _loglik(y: complex, var: float, mean) -> np.ndarray:
    d = y - np.asarray(mean)
    return -(d.real**2 + d.imag**2) / (2.0 * var)


def exhaustive_pair_posteriors(frame: ReceivedFrame, p: ChannelParams,
                               c: Constellation) -> np.ndarray:
    """P(x_A[n], x_B[n] | Y) by summing over all S^N x S^N packet pairs.

    The joint log-likelihood lives in a dense array with one axis per symbol
    (A_1..A_N, B_1..B_N), built sample by sample.
    """
    N, S = frame.n_coded, c.size
    pts = c.alphabet
    rot = p.rotation
    ll = np.zeros((S,) * (2 * N))

    def axis_view(values, axes):
        shape = [1] * (2 * N)
        for ax in axes:
            shape[ax] = S
        return values.reshape(shape)

    for k in range(1, 2 * N + 2):
        var = frame.variances[k - 1]
        if not np.isfinite(var):
            continue
        y = frame.samples[k - 1]
        if k == 1:
            ll += axis_view(_loglik(y, var, pts), [0])
        elif k == 2 * N + 1:
            ll += axis_view(_loglik(y, var, pts * rot), [2 * N - 1])
        else:
            n = (k + 1) // 2  # x_A index, 1-based
            nb = k // 2  # x_B index, 1-based
            table = _loglik(y, var, pts[:, None] + pts[None, :] * rot)
            ll += axis_view(table, [n - 1, N + nb - 1])
    ll -= ll.max()
    w = np.exp(ll, out=ll)
    w /= w.sum()
    out = np.empty((N, S, S))
    for n in range(N):
        keep = {n, N + n}
        out[n] = w.sum(axis=tuple(ax for ax in range(2 * N) if ax not in keep))
    return out


def sync_bpsk_threshold(sigma2: float) -> float:
    """|y| above which the synchronous rule picks XOR = +1."""
    def g(y):
        lhs = np.logaddexp(-(y - 2) ** 2 / (2 * sigma2), -(y + 2) ** 2 / (2 * sigma2))
        return lhs - (math.log(2.0) - y * y / (2 * sigma2))

    return optimize.brentq(g, 1e-9, 2.0)


def sync_bpsk_xor_ber(es_n0_db: float) -> float:
    """Exact XOR bit error rate of the synchronous BPSK rule.

    Integrates the Gaussian density over the wrong decision region for the
    two equally likely superpositions (+-2 and 0).
    """
    sigma2 = 10 ** (-es_n0_db / 10) / 2
    sd = math.sqrt(sigma2)
    t = sync_bpsk_threshold(sigma2)
    same, _ = integrate.quad(lambda y: stats.norm.pdf(y, 2.0, sd), -t, t, points=[0.0])
    diff, _ = integrate.quad(lambda y: stats.norm.pdf(y, 0.0, sd), t, np.inf)
    return 0.5 * same + 0.5 * 2 * diff


def ra_symbol_map(tables: np.ndarray, cfg: RaConfig, c: Constellation):
    """Symbol-wise MAP of an RA source given independent per-codeword-symbol tables.

    Returns (decisions, marginals) after enumerating all S^M sources.
    """
    S, M = c.size, cfg.m
    logt = np.log(np.asarray(tables))
    marg = np.zeros((M, S))
    for src in itertools.product(range(S), repeat=M):
        src = np.array(src)
        x = encode(src, cfg, c)
        w = math.exp(logt[np.arange(cfg.n), x].sum())
        marg[np.arange(M), src] += w
    marg /= marg.sum(axis=1, keepdims=True)
    return np.argmax(marg, axis=1), marg


def joint_xor_map(frame: ReceivedFrame, p: ChannelParams, cfg: RaConfig, c: Constellation):
    """Symbol-wise MAP of s_A[m] xor s_B[m] over all S^M x S^M source pairs."""
    S, M = c.size, cfg.m
    sources = [np.array(s) for s in itertools.product(range(S), repeat=M)]
    codes = np.array([c.alphabet[encode(s, cfg, c)] for s in sources])  # (S^M, N)
    present = np.isfinite(frame.variances)
    y = frame.samples[present]
    var = frame.variances[present]

    logw = np.empty((len(sources), len(sources)))
    for i, xa in enumerate(codes):
        for j, xb in enumerate(codes):
            mu = sample_means(xa, xb, p.rotation)[present]
            logw[i, j] = _loglik(y, var, mu).sum()
    w = np.exp(logw - logw.max())
    marg = np.zeros((M, S))
    for i, sa in enumerate(sources):
        for j, sb in enumerate(sources):
            marg[np.arange(M), c.xor_table[sa, sb]] += w[i, j]
    marg /= marg.sum(axis=1, keepdims=True)
    return np.argmax(marg, axis=1), marg
