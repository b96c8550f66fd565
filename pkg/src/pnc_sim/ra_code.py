"""Repeat-accumulate code: interleaver, encoder and sum-product decoder.

The message-passing kernels work on tables indexed by *label*, i.e. the
integer whose bits are the Gray bits of the symbol (or of a symbol pair,
``label_a * S + label_b``). In that order the XOR of two symbols is the
bitwise XOR of their indices, so an accumulator check is a convolution over
(Z_2)^k and is evaluated with a Walsh-Hadamard transform.

Wiring, 0-based: code symbol n obeys ``x[n] = x[n-1] ^ rep[perm[n]]`` with
``x[-1]`` the identity and ``rep = repeat(source, q)``. Check n therefore
touches code nodes n-1 and n and source node ``perm[n] // q``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numba
import numpy as np

from .evidence import TINY
from .signal_model import Constellation

MASK64 = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** 1.0, seeded by four splitmix64 outputs of ``seed``."""

    def __init__(self, seed: int):
        x = seed & MASK64
        self.s = []
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & MASK64
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
            self.s.append(z ^ (z >> 31))

    def next(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def below(self, bound: int) -> int:
        """Index in [0, bound) by 64x64 multiply-high (no rejection step)."""
        return (self.next() * bound) >> 64


@functools.lru_cache(maxsize=64)
def _interleaver(m: int, q: int, seed: int) -> np.ndarray:
    n = m * q
    perm = list(range(n))
    if seed != 0:
        rng = Xoshiro256(seed)
        for i in range(n - 1, 0, -1):
            j = rng.below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
    out = np.array(perm, dtype=np.int64)
    out.setflags(write=False)
    return out


def make_interleaver(m: int, q: int, seed: int) -> np.ndarray:
    """Fisher-Yates permutation of 0..q*m-1; seed 0 gives the identity."""
    if m < 1 or q < 1:
        raise ValueError("m and q must be >= 1")
    return _interleaver(int(m), int(q), int(seed))


@dataclass(frozen=True)
class RaConfig:
    m: int
    q: int = 3
    seed: int = 1
    interleaver: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "interleaver", make_interleaver(self.m, self.q, self.seed))

    @property
    def n(self) -> int:
        return self.m * self.q

    @property
    def check_source(self) -> np.ndarray:
        """Source node feeding each check."""
        return self.interleaver // self.q

    @property
    def source_checks(self) -> np.ndarray:
        """(m, q) array: the checks each source node feeds."""
        return np.argsort(self.check_source, kind="stable").reshape(self.m, self.q)


def to_labels(t: np.ndarray, c: Constellation, pairs: bool = False) -> np.ndarray:
    """Reorder the trailing table axis (or two axes) from index to label order."""
    inv = np.argsort(c.label_order())
    t = t[..., inv]
    if pairs:
        t = t[..., inv, :]
    return t


def from_labels(t: np.ndarray, c: Constellation, pairs: bool = False) -> np.ndarray:
    lab = c.label_order()
    t = t[..., lab]
    if pairs:
        t = t[..., lab, :]
    return t


def encode(s, cfg: RaConfig, c: Constellation) -> np.ndarray:
    """Repeat, interleave, accumulate. QPSK runs two binary accumulators at once."""
    s = np.asarray(s, dtype=np.int64)
    if s.shape != (cfg.m,):
        raise ValueError(f"source length {s.shape} does not match m={cfg.m}")
    lab = c.label_order()
    rep = np.repeat(lab[s], cfg.q)[cfg.interleaver]
    acc = np.bitwise_xor.accumulate(rep)
    return np.argsort(lab)[acc]


# ----------------------------------------------------------------------------
# message-passing kernels
#
# Tables are stored column-wise, shape (L, n_nodes) with L = 2**k entries in
# label order, so every inner loop runs over nodes and vectorises.


@numba.njit(cache=True)
def _wht(v):
    """In-place unnormalised Walsh-Hadamard transform of every column."""
    L, N = v.shape
    h = 1
    while h < L:
        for i in range(0, L, 2 * h):
            for j in range(i, i + h):
                x = v[j]
                y = v[j + h]
                for n in range(N):
                    a = x[n]
                    b = y[n]
                    x[n] = a + b
                    y[n] = a - b
        h *= 2


@numba.njit(cache=True)
def _norm_clip(v, s):
    """Clip negatives (WHT round-off), normalise columns, floor at TINY.

    ``s`` is scratch of length n_nodes. Dead columns fall back to uniform.
    """
    L, N = v.shape
    s[:] = 0.0
    for j in range(L):
        row = v[j]
        for n in range(N):
            if row[n] < 0.0:
                row[n] = 0.0
            s[n] += row[n]
    for n in range(N):
        s[n] = 1.0 / s[n] if s[n] > 0.0 and np.isfinite(s[n]) else -1.0
    u = 1.0 / L
    for j in range(L):
        row = v[j]
        for n in range(N):
            row[n] = max(row[n] * s[n], TINY) if s[n] > 0.0 else u


@numba.njit(cache=True)
def code_up(local, from_self, from_next, to_self, to_next, s):
    """Code node -> its two checks: local evidence times the other check's message."""
    L, N = local.shape
    for j in range(L):
        for n in range(N):
            to_self[j, n] = local[j, n] * from_next[j, n]
            to_next[j, n] = local[j, n] * from_self[j, n]
    _norm_clip(to_self, s)
    _norm_clip(to_next, s)


@numba.njit(cache=True)
def check_up(to_self, to_next, h_self, h_next, chk_to_src, s):
    """Check -> source. Also leaves the transformed code-side inputs in h_*."""
    L, N = to_self.shape
    h_self[:] = to_self
    _wht(h_self)
    h_next[:] = to_next
    _wht(h_next)
    for j in range(L):
        chk_to_src[j, 0] = h_self[j, 0]
        for n in range(1, N):
            chk_to_src[j, n] = h_self[j, n] * h_next[j, n - 1]
    _wht(chk_to_src)
    _norm_clip(chk_to_src, s)


@numba.njit(cache=True)
def check_down(src_to_chk, h_self, h_next, from_self, from_next, hs, s):
    """Check -> code nodes n (from_self) and n-1 (from_next).

    The last code node touches one check only, so its ``from_next`` stays uniform.
    """
    L, N = src_to_chk.shape
    hs[:] = src_to_chk
    _wht(hs)
    for j in range(L):
        from_self[j, 0] = hs[j, 0]
        for n in range(1, N):
            from_self[j, n] = hs[j, n] * h_next[j, n - 1]
            from_next[j, n - 1] = hs[j, n] * h_self[j, n]
    _wht(from_self)
    _norm_clip(from_self, s)
    if N > 1:
        fn = from_next[:, : N - 1]
        _wht(fn)
        _norm_clip(fn, s[: N - 1])


@numba.njit(cache=True)
def source_update(chk_to_src, source_checks, src_to_chk, post, tmp, s):
    """Extrinsic products at the repetition nodes; returns max posterior change."""
    M, q = source_checks.shape
    L = chk_to_src.shape[0]
    for j in range(L):
        for m in range(M):
            tmp[j, m] = 1.0
        for r in range(q):
            for m in range(M):
                tmp[j, m] *= chk_to_src[j, source_checks[m, r]]
    sm = s[:M]
    _norm_clip(tmp, sm)
    change = 0.0
    for j in range(L):
        for m in range(M):
            change = max(change, abs(tmp[j, m] - post[j, m]))
            post[j, m] = tmp[j, m]
    for r in range(q):
        for j in range(L):
            for m in range(M):
                v = 1.0
                for r2 in range(q):
                    if r2 != r:
                        v *= chk_to_src[j, source_checks[m, r2]]
                tmp[j, m] = v
        _norm_clip(tmp, sm)
        for j in range(L):
            for m in range(M):
                src_to_chk[j, source_checks[m, r]] = tmp[j, m]
    return change


class RaMessages:
    """Message store of the RA part of a graph, columns in label order."""

    def __init__(self, cfg: RaConfig, L: int):
        N, M = cfg.n, cfg.m
        u = 1.0 / L
        self.source_checks = np.ascontiguousarray(cfg.source_checks)
        self.from_self = np.full((L, N), u)
        self.from_next = np.full((L, N), u)
        self.to_self = np.full((L, N), u)
        self.to_next = np.full((L, N), u)
        self.h_self = np.empty((L, N))
        self.h_next = np.empty((L, N))
        self.hs = np.empty((L, N))
        self.chk_to_src = np.full((L, N), u)
        self.src_to_chk = np.full((L, N), u)
        self.post = np.full((L, M), u)
        self._tmp = np.empty((L, M))
        self._s = np.empty(N)

    def downward_product(self) -> np.ndarray:
        """Product of both check messages arriving at each code node, (L, N)."""
        return self.from_self * self.from_next

    def up(self, local: np.ndarray):
        """``local`` is the (L, N) channel-side message into every code node."""
        code_up(local, self.from_self, self.from_next, self.to_self, self.to_next, self._s)
        check_up(self.to_self, self.to_next, self.h_self, self.h_next, self.chk_to_src, self._s)

    def down(self) -> float:
        change = source_update(self.chk_to_src, self.source_checks, self.src_to_chk, self.post,
                               self._tmp, self._s)
        check_down(self.src_to_chk, self.h_self, self.h_next, self.from_self, self.from_next,
                   self.hs, self._s)
        return change


@dataclass
class RaDecodeResult:
    source: np.ndarray
    posteriors: np.ndarray
    iterations: int
    converged: bool


def decode_xor(channel_tables, cfg: RaConfig, c: Constellation, iters: int = 50,
               tol: float = 1e-6) -> RaDecodeResult:
    """Flooding sum-product RA decode of symbol tables over the alphabet of ``c``.

    ``channel_tables`` is (N, S) in alphabet order; returned posteriors are
    (M, S) in alphabet order too.
    """
    t = np.asarray(channel_tables, dtype=float)
    if t.shape != (cfg.n, c.size):
        raise ValueError(f"expected tables of shape {(cfg.n, c.size)}, got {t.shape}")
    local = np.ascontiguousarray(to_labels(t / t.sum(axis=1, keepdims=True), c).T)
    msgs = RaMessages(cfg, c.size)
    converged = False
    it = 0
    for it in range(1, iters + 1):
        msgs.up(local)
        if msgs.down() < tol:
            converged = True
            break
    post = from_labels(msgs.post.T, c)
    return RaDecodeResult(np.argmax(post, axis=1), post, it, converged)
