"""Per-sample joint likelihood tables over the transmitted symbol pair."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np

from .signal_model import ChannelParams, Constellation, ReceivedFrame

# floor applied to every normalised table; keeps products of a handful of
# tables away from exact zero
TINY = 1e-60


class EdgeKind(enum.Enum):
    INNER = "inner"
    FIRST = "first"  # x_B absent
    LAST = "last"  # x_A absent
    ABSENT = "absent"


@dataclass
class JointTable:
    """Nonnegative table ``entries[a, b]`` over (x_A, x_B) symbol indices."""

    entries: np.ndarray
    kind: EdgeKind = EdgeKind.INNER


def normalize(t: np.ndarray, axes=(-2, -1)) -> np.ndarray:
    s = t.sum(axis=axes, keepdims=True)
    return np.maximum(t / s, TINY)


def kind_of(k: int, n_coded: int) -> EdgeKind:
    """Edge kind of 1-based sample index k."""
    if k == 1:
        return EdgeKind.FIRST
    if k == 2 * n_coded + 1:
        return EdgeKind.LAST
    return EdgeKind.INNER


def pair_means(p: ChannelParams, c: Constellation) -> np.ndarray:
    """Noiseless sample value for every (a, b) pair."""
    return c.alphabet[:, None] + c.alphabet[None, :] * p.rotation


def _sample_means(k: int, n_coded: int, p: ChannelParams, c: Constellation) -> np.ndarray:
    if k == 1:
        return np.broadcast_to(c.alphabet[:, None], (c.size, c.size))
    if k == 2 * n_coded + 1:
        return np.broadcast_to((c.alphabet * p.rotation)[None, :], (c.size, c.size))
    return pair_means(p, c)


def _gaussian_tables(y: np.ndarray, var: np.ndarray, means: np.ndarray) -> np.ndarray:
    d = y[:, None, None] - means
    logp = -(d.real**2 + d.imag**2) / (2.0 * var[:, None, None])
    logp -= logp.max(axis=(1, 2), keepdims=True)
    return normalize(np.exp(logp))


@numba.njit(cache=True)
def _fill_tables(y, var, inner, first, last, out):
    K, S, _ = out.shape
    for k in range(K):
        if not np.isfinite(var[k]):
            out[k] = np.nan
            continue
        means = first if k == 0 else (last if k == K - 1 else inner)
        top = -np.inf
        for a in range(S):
            for b in range(S):
                d = y[k] - means[a, b]
                v = -(d.real * d.real + d.imag * d.imag) / (2.0 * var[k])
                out[k, a, b] = v
                top = max(top, v)
        tot = 0.0
        for a in range(S):
            for b in range(S):
                v = np.exp(out[k, a, b] - top)
                out[k, a, b] = v
                tot += v
        for a in range(S):
            for b in range(S):
                out[k, a, b] = max(out[k, a, b] / tot, TINY)


def evidence_tables(frame: ReceivedFrame, p: ChannelParams, c: Constellation) -> np.ndarray:
    """All 2N+1 tables at once, shape (2N+1, S, S).

    Absent samples get an all-NaN table. Edge samples are uniform over the
    missing symbol.
    """
    n = frame.n_coded
    out = np.empty((2 * n + 1, c.size, c.size))
    _fill_tables(np.asarray(frame.samples, dtype=complex), np.asarray(frame.variances, dtype=float),
                 pair_means(p, c), np.ascontiguousarray(_sample_means(1, n, p, c)),
                 np.ascontiguousarray(_sample_means(2 * n + 1, n, p, c)), out)
    return out


def evidence(frame: ReceivedFrame, k: int, p: ChannelParams, c: Constellation) -> JointTable:
    """Joint table for the single 1-based sample index ``k``."""
    n = frame.n_coded
    if not 1 <= k <= 2 * n + 1:
        raise IndexError(f"sample index {k} outside 1..{2 * n + 1}")
    if not frame.present[k - 1]:
        return JointTable(np.full((c.size, c.size), np.nan), EdgeKind.ABSENT)
    t = _gaussian_tables(frame.samples[k - 1:k], frame.variances[k - 1:k],
                         _sample_means(k, n, p, c)[None])
    return JointTable(t[0], kind_of(k, n))


def xor_posterior(t, c: Constellation) -> np.ndarray:
    """Collapse a pair table onto the XOR alphabet.

    Accepts a :class:`JointTable` (must be INNER) or a raw array whose last
    two axes are (a, b); raw arrays are processed in bulk.
    """
    if isinstance(t, JointTable):
        if t.kind is not EdgeKind.INNER:
            raise ValueError(f"xor_posterior needs an INNER table, got {t.kind.value}")
        t = t.entries
    t = np.asarray(t)
    flat = t.reshape(t.shape[:-2] + (-1,))
    groups = c.xor_table.ravel()
    out = np.zeros(t.shape[:-2] + (c.size,))
    for s in range(c.size):
        out[..., s] = flat[..., groups == s].sum(axis=-1)
    return out / out.sum(axis=-1, keepdims=True)
