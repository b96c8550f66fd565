"""Joint channel decoding and network coding over symbol-pair tables.

The graph is the pair chain of :mod:`bp_upnc` stacked under an RA decoding
graph whose variable nodes carry (x_A, x_B) and (s_A, s_B) pairs. Every
iteration runs four phases: chain messages rightwards, chain messages
leftwards, upward through the accumulator checks to the sources, and back
down. In synchronous mode the chain is absent and the even-sample tables
attach straight to the code-pair nodes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .bp_upnc import chain_backward, chain_forward
from .evidence import evidence_tables, xor_posterior
from .ra_code import RaConfig, RaMessages, encode, from_labels, to_labels
from .signal_model import ChannelParams, Constellation, ReceivedFrame


@dataclass
class JointGraph:
    cfg: RaConfig
    c: Constellation
    synchronous: bool
    evidence: np.ndarray | None = None  # label order, (2N+1|N, S, S)

    @property
    def n_code(self) -> int:
        return self.cfg.n

    @property
    def n_evidence(self) -> int:
        return self.cfg.n if self.synchronous else 2 * self.cfg.n + 1

    @property
    def n_compat(self) -> int:
        return 0 if self.synchronous else 2 * self.cfg.n

    @property
    def n_checks(self) -> int:
        return self.cfg.n

    def check_code_edges(self) -> list[tuple[int, int]]:
        """(check, code node) pairs; check n ties x[n-1] and x[n]."""
        edges = []
        for n in range(self.cfg.n):
            if n > 0:
                edges.append((n, n - 1))
            edges.append((n, n))
        return edges

    def check_source_edges(self) -> list[tuple[int, int]]:
        return [(n, int(m)) for n, m in enumerate(self.cfg.check_source)]

    def load_evidence(self, ev: np.ndarray):
        """Take (2N+1, S, S) tables from :func:`evidence_tables`."""
        N = self.cfg.n
        if ev.shape[0] != 2 * N + 1:
            raise ValueError(f"expected {2 * N + 1} evidence tables, got {ev.shape[0]}")
        if self.synchronous:
            ev = ev[1::2]
        elif not np.all(np.isfinite(ev)):
            raise ValueError("absent evidence in asynchronous mode")
        self.evidence = np.ascontiguousarray(to_labels(ev, self.c, pairs=True))


@dataclass
class JointDecision:
    xor_sources: np.ndarray
    posteriors: np.ndarray  # (M, S) over the XOR alphabet
    pair_posteriors: np.ndarray  # (M, S, S) over (s_A, s_B)
    iterations_used: int
    converged: bool


@numba.njit(cache=True)
def _couple(from_self, from_next, extra):
    """Check-side product at each code node into the odd chain positions."""
    L, N = from_self.shape
    S = extra.shape[1]
    for n in range(N):
        for a in range(S):
            for b in range(S):
                j = a * S + b
                extra[2 * n + 1, a, b] = from_self[j, n] * from_next[j, n]


@numba.njit(cache=True)
def _local(ev, fq, bq, local):
    """Chain-side message into each code node: evidence times both chain inputs."""
    L, N = local.shape
    S = ev.shape[1]
    for a in range(S):
        for b in range(S):
            row = local[a * S + b]
            for n in range(N):
                i = 2 * n + 1
                row[n] = ev[i, a, b] * fq[i, a] * bq[i, b]


def build_graph(cfg: RaConfig, n_coded: int, c: Constellation,
                synchronous: bool = False) -> JointGraph:
    if n_coded != cfg.n:
        raise ValueError(f"frame carries {n_coded} symbols but the code has N={cfg.n}")
    return JointGraph(cfg, c, synchronous)


def iterate(g: JointGraph, max_iters: int = 50, tol: float = 1e-6) -> JointDecision:
    if g.evidence is None:
        raise ValueError("load evidence before iterating")
    S = g.c.size
    N = g.cfg.n
    L = S * S
    msgs = RaMessages(g.cfg, L)
    ev = g.evidence
    if g.synchronous:
        local = np.ascontiguousarray(ev.reshape(N, L).T)
    else:
        extra = np.ones_like(ev)
        fq = np.empty((ev.shape[0], S))
        bq = np.empty((ev.shape[0], S))
        local = np.empty((L, N))
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        if not g.synchronous:
            _couple(msgs.from_self, msgs.from_next, extra)
            chain_forward(ev, extra, fq)
            chain_backward(ev, extra, bq)
            _local(ev, fq, bq, local)
        msgs.up(local)
        if msgs.down() < tol:
            converged = True
            break
    pairs = from_labels(msgs.post.T.reshape(-1, S, S), g.c, pairs=True)
    post = xor_posterior(pairs, g.c)
    return JointDecision(np.argmax(post, axis=1), post, pairs, it, converged)


def relay_output(d: JointDecision, cfg: RaConfig, c: Constellation) -> np.ndarray:
    """Re-encode the decided XOR source packet for the downlink."""
    return encode(d.xor_sources, cfg, c)


def decode(frame: ReceivedFrame, p: ChannelParams, cfg: RaConfig, c: Constellation,
           max_iters: int = 50, tol: float = 1e-6) -> JointDecision:
    g = build_graph(cfg, frame.n_coded, c, frame.synchronous)
    g.load_evidence(evidence_tables(frame, p, c))
    return iterate(g, max_iters, tol)
