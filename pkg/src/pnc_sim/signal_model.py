"""Alphabets, the PNC-XOR algebra and the oversampled two-way-relay uplink.

Symbols are carried around as integer indices into ``Constellation.alphabet``.
Index 0 is always the all-positive point, i.e. the identity of the XOR.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

SQRT1_2 = 1.0 / math.sqrt(2.0)


class Modulation(str, enum.Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"


@dataclass(frozen=True)
class Constellation:
    kind: Modulation
    alphabet: np.ndarray = field(repr=False)
    # per-symbol Gray labels, bit 0 <-> positive component
    labels: np.ndarray = field(repr=False)
    xor_table: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.alphabet)

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    @classmethod
    def bpsk(cls) -> "Constellation":
        return _BPSK

    @classmethod
    def qpsk(cls) -> "Constellation":
        return _QPSK

    @classmethod
    def of(cls, kind) -> "Constellation":
        return _BPSK if Modulation(kind) is Modulation.BPSK else _QPSK

    def label_order(self) -> np.ndarray:
        """Integer label of each index, bits packed MSB first.

        XOR of symbols is bitwise XOR of these labels.
        """
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        return (self.labels * weights).sum(axis=1)


def _make(kind: Modulation) -> Constellation:
    if kind is Modulation.BPSK:
        alphabet = np.array([1.0 + 0j, -1.0 + 0j])
        labels = np.array([[0], [1]])
    else:
        alphabet = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) * SQRT1_2
        labels = (np.stack([alphabet.real, alphabet.imag], axis=1) < 0).astype(int)
    size = len(alphabet)
    xor_table = np.empty((size, size), dtype=np.int64)
    for i in range(size):
        for j in range(size):
            lab = labels[i] ^ labels[j]
            xor_table[i, j] = int(np.flatnonzero((labels == lab).all(axis=1))[0])
    for arr in (alphabet, labels, xor_table):
        arr.setflags(write=False)
    return Constellation(kind, alphabet, labels, xor_table)


_BPSK = _make(Modulation.BPSK)
_QPSK = _make(Modulation.QPSK)


def modulate(bits, c: Constellation) -> np.ndarray:
    """Map a bit sequence to symbol indices (Gray: bit 0 -> positive component).

    For QPSK the first bit of each pair sets the sign of the real part.
    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = c.bits_per_symbol
    if bits.size % k:
        raise ValueError(f"{c.kind.value} needs a multiple of {k} bits, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0/1")
    if k == 1:
        return bits.copy()
    pairs = bits.reshape(-1, 2)
    # inverse of the label table: label (re, im) -> index
    lut = np.empty(4, dtype=np.int64)
    lut[c.labels[:, 0] * 2 + c.labels[:, 1]] = np.arange(4)
    return lut[pairs[:, 0] * 2 + pairs[:, 1]]


def demodulate(symbols, c: Constellation) -> np.ndarray:
    """Inverse of :func:`modulate`: indices back to the bit sequence."""
    return c.labels[np.asarray(symbols, dtype=np.int64)].ravel()


def points(symbols, c: Constellation) -> np.ndarray:
    return c.alphabet[np.asarray(symbols, dtype=np.int64)]


def pnc_xor(a, b, c: Constellation):
    """PNC-XOR of symbol indices: componentwise sign product of the points."""
    return c.xor_table[a, b]


def pnc_xor_points(a: complex, b: complex, c: Constellation) -> complex:
    """Same as :func:`pnc_xor` but on complex alphabet points."""
    ia = int(np.argmin(np.abs(c.alphabet - a)))
    ib = int(np.argmin(np.abs(c.alphabet - b)))
    return complex(c.alphabet[c.xor_table[ia, ib]])


@dataclass(frozen=True)
class ChannelParams:
    """Uplink asynchrony and noise level.

    ``delta`` is in symbol durations, ``phi`` in radians. Transmit power is
    normalised to one so ``es_n0_db`` alone fixes the noise.
    """

    delta: float
    phi: float
    es_n0_db: float
    sync_epsilon: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")
        if self.sync_epsilon <= 0:
            raise ValueError("sync_epsilon must be positive")

    @property
    def n0(self) -> float:
        return 10.0 ** (-self.es_n0_db / 10.0)

    @property
    def sigma2(self) -> float:
        """Per-component noise variance of a full-symbol matched filter."""
        return self.n0 / 2.0

    @property
    def synchronous(self) -> bool:
        return self.delta < self.sync_epsilon

    @property
    def rotation(self) -> complex:
        return complex(math.cos(self.phi), math.sin(self.phi))


@dataclass(frozen=True)
class ReceivedFrame:
    """The 2N+1 relay samples, y[0] .. y[2N] (sample k is stored at k-1).

    In synchronous mode the odd samples (even array positions) are absent:
    their value is NaN and their variance infinite.
    """

    samples: np.ndarray
    variances: np.ndarray
    n_coded: int

    def __post_init__(self):
        expected = 2 * self.n_coded + 1
        if len(self.samples) != expected or len(self.variances) != expected:
            raise ValueError(f"frame arrays must have length 2N+1 = {expected}")

    @property
    def present(self) -> np.ndarray:
        return np.isfinite(self.variances)

    @property
    def synchronous(self) -> bool:
        return not self.present[0]


def sample_means(xa: np.ndarray, xb: np.ndarray, rotation: complex) -> np.ndarray:
    """Noiseless y[1..2N+1] for complex symbol sequences xa, xb."""
    n = len(xa)
    out = np.zeros(2 * n + 1, dtype=complex)
    rb = xb * rotation
    out[1::2] = xa + rb
    out[0:-1:2] = xa
    out[2::2] += rb
    return out


def transmit(xa, xb, p: ChannelParams, rng: np.random.Generator | None,
             c: Constellation) -> ReceivedFrame:
    """Superimpose two packets with offsets (delta, phi) and add AWGN.

    ``rng=None`` gives the noiseless frame.
    """
    xa = np.asarray(xa, dtype=np.int64)
    xb = np.asarray(xb, dtype=np.int64)
    if xa.shape != xb.shape or xa.ndim != 1:
        raise ValueError(f"packet length mismatch: {xa.shape} vs {xb.shape}")
    n = len(xa)
    y = sample_means(c.alphabet[xa], c.alphabet[xb], p.rotation)
    var = np.empty(2 * n + 1)
    if p.synchronous:
        var[0::2] = np.inf
        var[1::2] = p.sigma2
        y[0::2] = np.nan
    else:
        var[0::2] = p.sigma2 / p.delta
        var[1::2] = p.sigma2 / (1.0 - p.delta)
    if rng is not None:
        present = np.isfinite(var)
        std = np.sqrt(var[present])
        noise = rng.standard_normal((2, int(present.sum())))
        y[present] += std * noise[0] + 1j * std * noise[1]
    return ReceivedFrame(y, var, n)
