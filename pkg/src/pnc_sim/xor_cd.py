"""Disjoint decoding: per-symbol XOR posteriors first, RA decoding second."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bp_upnc, ra_code
from .evidence import xor_posterior
from .ra_code import RaConfig
from .signal_model import ChannelParams, Constellation, ReceivedFrame


@dataclass
class XorCdResult:
    xor_sources: np.ndarray
    posteriors: np.ndarray
    stage1_tables: np.ndarray
    iterations_used: int
    converged: bool


def stage1(frame: ReceivedFrame, p: ChannelParams, c: Constellation) -> np.ndarray:
    """(N, S) tables P(x_A[n] xor x_B[n] | Y); the pair detail is dropped here."""
    return xor_posterior(bp_upnc.pair_posteriors(frame, p, c), c)


def stage2(tables: np.ndarray, cfg: RaConfig, c: Constellation, iters: int = 50,
           tol: float = 1e-6) -> XorCdResult:
    r = ra_code.decode_xor(tables, cfg, c, iters, tol)
    return XorCdResult(r.source, r.posteriors, np.asarray(tables), r.iterations, r.converged)


def decode(frame: ReceivedFrame, p: ChannelParams, cfg: RaConfig, c: Constellation,
           iters: int = 50, tol: float = 1e-6) -> XorCdResult:
    return stage2(stage1(frame, p, c), cfg, c, iters, tol)
