"""Monte Carlo BER engine: seeded trials, sweeps, CSV output.

Every trial draws from its own generator, seeded by
``SeedSequence([master_seed, *point_words, trial])`` where ``point_words``
are the first four little-endian 32-bit words of
``sha256("<modulation>|<delta!r>|<phi!r>|<ebn0_db!r>")``. The point key leaves
the scheme out on purpose: all schemes at one point see identical source
bits and noise, so scheme comparisons are paired.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import bp_upnc, jt_cnc, ra_code, xor_cd
from .ra_code import RaConfig
from .signal_model import ChannelParams, Constellation, Modulation, modulate, transmit

log = logging.getLogger(__name__)

CSV_COLUMNS = ("scheme", "modulation", "delta", "phi", "ebn0_db", "packets", "bit_errors",
               "total_bits", "ber", "ci_lo", "ci_hi", "nonconverged")
Z95 = statistics.NormalDist().inv_cdf(0.975)


class Scheme(str, enum.Enum):
    SYNC_BENCH = "sync"
    BP_UPNC = "upnc"
    JT_CNC = "jtcnc"
    XOR_CD = "xorcd"

    @property
    def coded(self) -> bool:
        return self in (Scheme.JT_CNC, Scheme.XOR_CD)


@dataclass
class SweepConfig:
    scheme: Scheme
    modulation: Modulation
    delta_list: Sequence[float]
    phi_list: Sequence[float]
    ebn0_db_list: Sequence[float]
    packets_per_point: int = 2000
    bits_per_packet: int = 2048
    master_seed: int = 0
    q: int = 3
    interleaver_seed: int = 1
    iters: int = 50
    tol: float = 1e-6
    rate_shift: bool = True

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        self.modulation = Modulation(self.modulation)
        for name in ("delta_list", "phi_list", "ebn0_db_list"):
            vals = [float(v) for v in getattr(self, name)]
            if not vals:
                raise ValueError(f"{name} must not be empty")
            setattr(self, name, vals)
        bps = self.constellation.bits_per_symbol
        if self.bits_per_packet <= 0 or self.bits_per_packet % bps:
            raise ValueError(f"bits_per_packet must be a positive multiple of {bps}")
        if self.packets_per_point <= 0:
            raise ValueError("packets_per_point must be positive")
        if self.scheme is Scheme.SYNC_BENCH and (any(self.delta_list) or any(self.phi_list)):
            raise ValueError("the synchronous benchmark only runs at delta = phi = 0")

    @property
    def constellation(self) -> Constellation:
        return Constellation.of(self.modulation)

    @property
    def symbols_per_packet(self) -> int:
        return self.bits_per_packet // self.constellation.bits_per_symbol

    @property
    def ra(self) -> RaConfig:
        return RaConfig(self.symbols_per_packet, self.q, self.interleaver_seed)


@dataclass
class BerRecord:
    scheme: Scheme
    modulation: Modulation
    delta: float
    phi: float
    ebn0_db: float
    packets: int
    bit_errors: int
    total_bits: int
    ber: float = field(init=False)
    ci_lo: float = field(init=False)
    ci_hi: float = field(init=False)
    nonconverged: int = 0

    def __post_init__(self):
        self.ber = self.bit_errors / self.total_bits
        self.ci_lo, self.ci_hi = wilson_ci(self.bit_errors, self.total_bits)

    @property
    def key(self) -> tuple:
        return (Scheme(self.scheme).value, Modulation(self.modulation).value,
                _fmt(self.delta), _fmt(self.phi), _fmt(self.ebn0_db))

    def row(self) -> list[str]:
        return [Scheme(self.scheme).value, Modulation(self.modulation).value, _fmt(self.delta),
                _fmt(self.phi), _fmt(self.ebn0_db), str(self.packets), str(self.bit_errors),
                str(self.total_bits), _fmt(self.ber), _fmt(self.ci_lo), _fmt(self.ci_hi),
                str(self.nonconverged)]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def wilson_ci(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


def ebn0_to_esn0(ebn0_db: float, modulation, scheme, cfg: SweepConfig | None = None) -> float:
    """Per-symbol SNR for a per-source-bit SNR.

    Coded schemes subtract the rate penalty 10 log10(q) unless
    ``cfg.rate_shift`` is off, in which case Eb is taken per coded bit.
    """
    c = Constellation.of(modulation)
    es = ebn0_db + 10 * math.log10(c.bits_per_symbol)
    if Scheme(scheme).coded:
        q = cfg.q if cfg is not None else 3
        if cfg is None or cfg.rate_shift:
            es -= 10 * math.log10(q)
    return es


def point_words(modulation, delta: float, phi: float, ebn0_db: float) -> list[int]:
    key = f"{Modulation(modulation).value}|{float(delta)!r}|{float(phi)!r}|{float(ebn0_db)!r}"
    digest = hashlib.sha256(key.encode()).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def trial_rng(master_seed: int, words: Sequence[int], trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *words, int(trial)]))


# ----------------------------------------------------------------------------
# decoders: (frame, params, constellation, cfg) -> (xor symbols, converged)

def _decode_sync(frame, p, c, cfg):
    return bp_upnc.decide_sync(frame.samples[1::2], p, c), True


def _decode_upnc(frame, p, c, cfg):
    return bp_upnc.decode(frame, p, c).xor_symbols, True


def _decode_jtcnc(frame, p, c, cfg):
    d = jt_cnc.decode(frame, p, cfg.ra, c, cfg.iters, cfg.tol)
    return d.xor_sources, d.converged


def _decode_xorcd(frame, p, c, cfg):
    r = xor_cd.decode(frame, p, cfg.ra, c, cfg.iters, cfg.tol)
    return r.xor_sources, r.converged


DECODERS: dict[Scheme, Callable] = {
    Scheme.SYNC_BENCH: _decode_sync,
    Scheme.BP_UPNC: _decode_upnc,
    Scheme.JT_CNC: _decode_jtcnc,
    Scheme.XOR_CD: _decode_xorcd,
}


def simulate_trial(cfg: SweepConfig, p: ChannelParams, rng: np.random.Generator,
                   decoder: Callable) -> tuple[int, int, bool]:
    """One packet pair through the uplink; returns (bit errors, bits, converged)."""
    c = cfg.constellation
    bits = rng.integers(0, 2, size=(2, cfg.bits_per_packet))
    sa = modulate(bits[0], c)
    sb = modulate(bits[1], c)
    if cfg.scheme.coded:
        ra = cfg.ra
        xa, xb = ra_code.encode(sa, ra, c), ra_code.encode(sb, ra, c)
    else:
        xa, xb = sa, sb
    frame = transmit(xa, xb, p, rng, c)
    decided, converged = decoder(frame, p, c, cfg)
    truth = c.xor_table[sa, sb]
    errors = int(np.count_nonzero(c.labels[truth] != c.labels[decided]))
    return errors, cfg.bits_per_packet, bool(converged)


def _run_trials(args) -> tuple[int, int, int]:
    cfg, p, words, trials, decoder = args
    errors = bits = nonconv = 0
    for t in trials:
        e, b, ok = simulate_trial(cfg, p, trial_rng(cfg.master_seed, words, t), decoder)
        errors += e
        bits += b
        nonconv += not ok
    return errors, bits, nonconv


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("PNC_SIM_THREADS", "0") or 0)
    return threads if threads > 0 else (os.cpu_count() or 1)


def run_point(cfg: SweepConfig, delta: float, phi: float, ebn0_db: float,
              decoder: Callable | None = None, threads: int | None = None,
              packets: int | None = None) -> BerRecord:
    """Estimate the BER of the uplink XOR at one (delta, phi, Eb/N0) point."""
    packets = cfg.packets_per_point if packets is None else packets
    es = ebn0_to_esn0(ebn0_db, cfg.modulation, cfg.scheme, cfg)
    p = ChannelParams(delta, phi, es)
    if cfg.scheme is Scheme.SYNC_BENCH and not (p.synchronous and phi == 0):
        raise ValueError("the synchronous benchmark only runs at delta = phi = 0")
    decoder = decoder or DECODERS[cfg.scheme]
    words = point_words(cfg.modulation, delta, phi, ebn0_db)
    workers = min(worker_count(threads), packets)
    if workers <= 1:
        totals = [_run_trials((cfg, p, words, range(packets), decoder))]
    else:
        chunks = [range(i, packets, workers) for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            totals = list(pool.map(_run_trials, [(cfg, p, words, ch, decoder) for ch in chunks]))
    errors, bits, nonconv = (sum(col) for col in zip(*totals))
    rec = BerRecord(cfg.scheme, cfg.modulation, delta, phi, ebn0_db, packets, errors, bits,
                    nonconverged=nonconv)
    log.info("%s %s delta=%g phi=%.4f ebn0=%.2f ber=%.3e (%d/%d) nonconv=%d",
             rec.scheme.value, rec.modulation.value, delta, phi, ebn0_db, rec.ber, errors,
             bits, nonconv)
    return rec


def sweep_points(cfg: SweepConfig):
    for delta in cfg.delta_list:
        for phi in cfg.phi_list:
            for ebn0 in cfg.ebn0_db_list:
                yield delta, phi, ebn0


def run_sweep(cfg: SweepConfig, out: str | Path | None = None,
              threads: int | None = None) -> list[BerRecord]:
    """Run the whole (delta, phi, Eb/N0) grid in a fixed order.

    With ``out`` set, rows already present in that CSV (same point and packet
    count) are reused, so an interrupted sweep resumes where it stopped.
    """
    done: dict[tuple, BerRecord] = {}
    if out is not None and Path(out).exists():
        done = {r.key: r for r in read_csv(out) if r.packets == cfg.packets_per_point}
    records = []
    for delta, phi, ebn0 in sweep_points(cfg):
        key = (cfg.scheme.value, cfg.modulation.value, _fmt(delta), _fmt(phi), _fmt(ebn0))
        rec = done.get(key) or run_point(cfg, delta, phi, ebn0, threads=threads)
        records.append(rec)
        if out is not None:
            write_csv(records, out)
    return records


def to_csv(records: Sequence[BerRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def write_csv(records: Sequence[BerRecord], path: str | Path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(to_csv(records).encode())
        tmp.replace(path)
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc


def read_csv(path: str | Path) -> list[BerRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append(BerRecord(Scheme(r["scheme"]), Modulation(r["modulation"]), float(r["delta"]),
                             float(r["phi"]), float(r["ebn0_db"]), int(r["packets"]),
                             int(r["bit_errors"]), int(r["total_bits"]),
                             nonconverged=int(r["nonconverged"])))
    return out


# ----------------------------------------------------------------------------
# locating the Eb/N0 that reaches a target BER


def interpolate_ebn0(ebn0: Sequence[float], ber: Sequence[float], target: float,
                     floor: float | None = None) -> float:
    """Eb/N0 where log10(BER) crosses ``target``, linear between grid points.

    Zero-error points are clamped to ``floor`` before taking logs.
    """
    x = np.asarray(ebn0, dtype=float)
    y = np.asarray(ber, dtype=float)
    if floor is not None:
        y = np.maximum(y, floor)
    ly = np.log10(y)
    lt = math.log10(target)
    for i in range(len(x) - 1):
        if ly[i] >= lt > ly[i + 1]:
            return float(x[i] + (lt - ly[i]) * (x[i + 1] - x[i]) / (ly[i + 1] - ly[i]))
    raise ValueError(f"BER curve does not cross {target}")


@dataclass
class Crossing:
    ebn0_db: float
    records: list[BerRecord]


def locate_ebn0(cfg: SweepConfig, delta: float, phi: float, target: float, start: float,
                step: float = 0.5, scout_packets: int = 50, max_points: int = 60,
                threads: int | None = None) -> Crossing:
    """Find the Eb/N0 at which the BER curve crosses ``target``.

    A short scout run walks the ``start + k*step`` grid to the first point
    under the target; full-size runs then settle the two grid points that
    bracket the crossing, and the result is interpolated between them.
    """
    def grid(k):
        return round(start + k * step, 10)

    k = 0
    scout = run_point(cfg, delta, phi, grid(k), packets=scout_packets, threads=threads)
    direction = 1 if scout.ber >= target else -1
    for _ in range(max_points):
        nxt = run_point(cfg, delta, phi, grid(k + direction), packets=scout_packets,
                        threads=threads)
        if (nxt.ber < target) == (direction == 1):
            if direction == -1:
                k -= 1
            break
        k += direction
    else:
        raise RuntimeError("scout did not find the crossing")
    # now grid(k) is scouted >= target and grid(k+1) < target
    full: dict[int, BerRecord] = {}

    def at(i):
        if i not in full:
            full[i] = run_point(cfg, delta, phi, grid(i), threads=threads)
        return full[i]

    for _ in range(max_points):
        if at(k).ber < target:
            k -= 1
        elif at(k + 1).ber >= target:
            k += 1
        else:
            break
    lo, hi = full[k], full[k + 1]
    floor = 0.5 / hi.total_bits
    ebn0 = interpolate_ebn0([lo.ebn0_db, hi.ebn0_db], [lo.ber, hi.ber], target, floor)
    return Crossing(ebn0, [full[i] for i in sorted(full)])
