"""Plot BER curves from sweep CSVs, one panel per (modulation, delta).

    python3 scripts/plot_curves.py results/qpsk_uncoded_*.csv -o qpsk_uncoded.png

Needs matplotlib (``pip install -e .[plots]``).
"""
import argparse
import math
from collections import defaultdict
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from pnc_sim.harness import read_csv  # noqa: E402


def phi_label(phi):
    k = phi / (math.pi / 8)
    if abs(k - round(k)) > 1e-9:
        return f"{phi:.3f}"
    f = Fraction(round(k), 8)
    if f == 0:
        return "0"
    num = "π" if f.numerator == 1 else f"{f.numerator}π"
    return num if f.denominator == 1 else f"{num}/{f.denominator}"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv", nargs="+")
    ap.add_argument("-o", "--out", default="ber.png")
    ap.add_argument("--ymin", type=float, default=1e-6)
    args = ap.parse_args(argv)

    curves = defaultdict(list)
    for path in args.csv:
        for r in read_csv(path):
            curves[(r.modulation.value, r.delta, r.scheme.value, r.phi)].append(r)
    panels = sorted({(m, d) for m, d, s, _ in curves if s != "sync"})

    fig, axes = plt.subplots(1, len(panels), figsize=(5.5 * len(panels), 4.5), squeeze=False)
    for ax, (mod, delta) in zip(axes[0], panels):
        for (m, d, scheme, phi), recs in sorted(curves.items()):
            # the synchronous reference goes on every panel of its modulation
            if m != mod or (scheme != "sync" and d != delta):
                continue
            recs = sorted(recs, key=lambda r: r.ebn0_db)
            x = [r.ebn0_db for r in recs if r.bit_errors]
            y = [r.ber for r in recs if r.bit_errors]
            style = dict(ls="--", color="k") if scheme == "sync" else dict(marker="o", ms=3)
            label = "synchronous" if scheme == "sync" else f"{scheme} φ={phi_label(phi)}"
            ax.semilogy(x, y, label=label, **style)
        ax.set_title(f"{mod.upper()}, Δ={delta:g}")
        ax.set_xlabel("Eb/N0 (dB)")
        ax.set_ylabel("XOR BER")
        ax.set_ylim(bottom=args.ymin)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(args.out)


if __name__ == "__main__":
    main()
