"""Exact sum-product on the asynchronous pair chain, plus the synchronous rule.

Chain node i (0-based, i = k - 1) holds the pair (x_A[ceil(k/2)], x_B[floor(k/2)]).
Nodes i and i+1 share x_A when i is even and x_B when i is odd. Messages that
cross a compatibility node only depend on the shared symbol, so the kernels
carry them as length-S vectors; :class:`ChainMessages` expands them back into
the replicated pair tables.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .evidence import TINY, evidence_tables, normalize, xor_posterior
from .signal_model import ChannelParams, Constellation, ReceivedFrame, modulate


@numba.njit(cache=True)
def _norm_floor(v):
    s = 0.0
    for j in range(v.shape[0]):
        s += v[j]
    if s > 0.0 and np.isfinite(s):
        s = 1.0 / s
        for j in range(v.shape[0]):
            v[j] = max(v[j] * s, TINY)
    else:
        for j in range(v.shape[0]):
            v[j] = 1.0 / v.shape[0]


@numba.njit(cache=True)
def chain_forward(ev, extra, fq):
    """Left-to-right pass. ``fq[i]`` is the message entering node i from the left.

    It indexes x_A for odd i and x_B for even i (node 0 gets a uniform one).
    """
    K, S, _ = ev.shape
    for s in range(S):
        fq[0, s] = 1.0 / S
    for i in range(K - 1):
        out = fq[i + 1]
        out[:] = 0.0
        odd = i % 2 == 1
        for a in range(S):
            for b in range(S):
                v = ev[i, a, b] * extra[i, a, b] * (fq[i, a] if odd else fq[i, b])
                if odd:
                    out[b] += v
                else:
                    out[a] += v
        _norm_floor(out)


@numba.njit(cache=True)
def chain_backward(ev, extra, bq):
    """Right-to-left pass. ``bq[i]`` enters node i from the right.

    It indexes x_A for even i and x_B for odd i (the last node gets a uniform one).
    """
    K, S, _ = ev.shape
    for s in range(S):
        bq[K - 1, s] = 1.0 / S
    for i in range(K - 1, 0, -1):
        out = bq[i - 1]
        out[:] = 0.0
        odd = i % 2 == 1
        for a in range(S):
            for b in range(S):
                v = ev[i, a, b] * extra[i, a, b] * (bq[i, b] if odd else bq[i, a])
                if odd:
                    out[a] += v
                else:
                    out[b] += v
        _norm_floor(out)


def expand_incoming(fq: np.ndarray, bq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Replicate the shared-symbol vectors into (K, S, S) tables summing to one."""
    K, S = fq.shape
    odd = (np.arange(K) % 2 == 1)[:, None, None]
    left = np.where(odd, fq[:, :, None], fq[:, None, :]) / S
    right = np.where(odd, bq[:, None, :], bq[:, :, None]) / S
    return np.broadcast_to(left, (K, S, S)).copy(), np.broadcast_to(right, (K, S, S)).copy()


@dataclass
class ChainMessages:
    """Messages of one forward and one backward pass, all shaped (2N+1, S, S).

    ``q_right[i]`` enters node i from its left compatibility node and
    ``r_right[i]`` leaves it to the right; ``q_left``/``r_left`` mirror them.
    """

    q_right: np.ndarray
    r_right: np.ndarray
    q_left: np.ndarray
    r_left: np.ndarray


@dataclass
class XorDecision:
    xor_symbols: np.ndarray
    posteriors: np.ndarray


def forward_backward(ev: np.ndarray) -> ChainMessages:
    ev = np.ascontiguousarray(ev, dtype=float)
    if not np.all(np.isfinite(ev)):
        raise ValueError("absent evidence in asynchronous mode")
    K, S, _ = ev.shape
    ones = np.ones_like(ev)
    fq = np.empty((K, S))
    bq = np.empty((K, S))
    chain_forward(ev, ones, fq)
    chain_backward(ev, ones, bq)
    q_right, q_left = expand_incoming(fq, bq)
    return ChainMessages(q_right, normalize(ev * q_right), q_left, normalize(ev * q_left))


def node_posteriors(ev: np.ndarray, msgs: ChainMessages) -> np.ndarray:
    """Belief at every chain node, including the mixed (odd-sample) ones."""
    return normalize(ev * msgs.q_right * msgs.q_left)


def joint_posterior(ev: np.ndarray, msgs: ChainMessages, n: int) -> np.ndarray:
    """P(x_A[n], x_B[n] | all samples) for 1-based symbol index n."""
    N = (len(ev) - 1) // 2
    if not 1 <= n <= N:
        raise IndexError(f"symbol index {n} outside 1..{N}")
    i = 2 * n - 1
    return normalize(ev[i] * msgs.q_right[i] * msgs.q_left[i])


def joint_posteriors(ev: np.ndarray, msgs: ChainMessages) -> np.ndarray:
    return normalize(ev[1::2] * msgs.q_right[1::2] * msgs.q_left[1::2])


def decide_xor(posteriors: np.ndarray, c: Constellation) -> XorDecision:
    """MAP XOR per symbol; ties go to the earliest alphabet point."""
    post = xor_posterior(posteriors, c)
    return XorDecision(np.argmax(post, axis=-1), post)


def pair_posteriors(frame: ReceivedFrame, p: ChannelParams, c: Constellation) -> np.ndarray:
    """Exact P(x_A[n], x_B[n] | Y) for n = 1..N, shape (N, S, S)."""
    ev = evidence_tables(frame, p, c)
    if frame.synchronous:
        return ev[1::2]
    return joint_posteriors(ev, forward_backward(ev))


def decode(frame: ReceivedFrame, p: ChannelParams, c: Constellation) -> XorDecision:
    return decide_xor(pair_posteriors(frame, p, c), c)


def _sync_rule(y: np.ndarray, s2: float) -> np.ndarray:
    # True (XOR bit 0) iff e^{-(y-2)^2/2s2} + e^{-(y+2)^2/2s2} >= 2 e^{-y^2/2s2}
    lhs = np.logaddexp(-(y - 2.0) ** 2 / (2 * s2), -(y + 2.0) ** 2 / (2 * s2))
    rhs = np.log(2.0) - y**2 / (2 * s2)
    return lhs >= rhs


def decide_sync(y, p: ChannelParams, c: Constellation):
    """Per-sample XOR decision for aligned, phase-synchronous arrivals.

    QPSK is handled as two BPSK problems on the rescaled real and imaginary
    parts. Returns XOR symbol indices (scalar in, scalar out).
    """
    y = np.asarray(y, dtype=complex)
    if c.size == 2:
        idx = np.where(_sync_rule(y.real, p.sigma2), 0, 1)
    else:
        scale = np.sqrt(2.0)
        re0 = _sync_rule(y.real * scale, 2 * p.sigma2)
        im0 = _sync_rule(y.imag * scale, 2 * p.sigma2)
        bits = np.stack([~re0, ~im0], axis=-1).astype(np.int64)
        idx = modulate(bits, c).reshape(re0.shape)
    return idx if idx.ndim else int(idx)
