"""BER sweeps behind the uncoded and coded comparison figures.

    python3 scripts/figure_sweeps.py --out-dir results            # everything
    python3 scripts/figure_sweeps.py --only qpsk_jtcnc --packets 200

Each set writes one CSV per scheme; reruns resume from whatever is there.
Full-size runs take hours on one core; use --packets for a quick look.
"""
import argparse
import logging
import math
from pathlib import Path

from pnc_sim.harness import SweepConfig, run_sweep

PHIS = [k * math.pi / 8 for k in range(5)]


def arange(lo, hi, step):
    return [round(lo + i * step, 10) for i in range(int(round((hi - lo) / step)) + 1)]


# name -> list of (scheme, modulation, deltas, phis, ebn0 grid, packets, bits)
SETS = {
    "bpsk_uncoded": [
        ("sync", "bpsk", [0.0], [0.0], arange(0, 10, 1), 2000, 2048),
        ("upnc", "bpsk", [0.0, 0.5], [0.0, math.pi / 4, math.pi / 2], arange(0, 10, 1), 2000, 2048),
    ],
    "qpsk_uncoded": [
        ("sync", "qpsk", [0.0], [0.0], arange(0, 14, 1), 2000, 2048),
        ("upnc", "qpsk", [0.0, 0.5], PHIS, arange(0, 14, 1), 2000, 2048),
    ],
    "bpsk_jtcnc": [
        ("jtcnc", "bpsk", [0.0, 0.5], [0.0, math.pi / 4, math.pi / 2], arange(-1, 4, 0.5), 1000, 2048),
    ],
    "qpsk_jtcnc": [
        ("jtcnc", "qpsk", [0.0, 0.5], PHIS, arange(0, 4, 0.5), 1000, 4096),
    ],
    "qpsk_xorcd": [
        ("xorcd", "qpsk", [0.0, 0.5], PHIS, arange(1, 8, 0.5), 1000, 4096),
    ],
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--only", nargs="*", choices=sorted(SETS), help="subset of sweep sets")
    ap.add_argument("--packets", type=int, help="override packets per point")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in args.only or sorted(SETS):
        for scheme, mod, deltas, phis, grid, packets, bits in SETS[name]:
            cfg = SweepConfig(scheme, mod, deltas, phis, grid, packets_per_point=args.packets or packets,
                              bits_per_packet=bits, master_seed=args.seed)
            out = out_dir / f"{name}_{scheme}.csv"
            recs = run_sweep(cfg, out, threads=args.threads)
            print(f"{out}: {len(recs)} points")


if __name__ == "__main__":
    main()
