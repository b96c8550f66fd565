"""Command line: ``pnc-sim sweep | verify | plotdata``."""
from __future__ import annotations

import argparse
import ast
import configparser
import csv
import logging
import math
import operator
import sys
from collections import defaultdict
from pathlib import Path

from .harness import CSV_COLUMNS, Scheme, SweepConfig, read_csv, run_sweep

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text: str) -> float:
    """Float literal or small arithmetic expression in ``pi`` (e.g. ``3*pi/8``)."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"cannot parse number {text!r}")

    try:
        return float(text)
    except ValueError:
        return ev(ast.parse(text.strip(), mode="eval"))


def parse_list(text: str) -> list[float]:
    return [parse_number(t) for t in str(text).split(",") if t.strip()]


def parse_range(text: str) -> list[float]:
    """``start:step:stop`` (stop included) or a comma list."""
    text = str(text)
    if ":" not in text:
        return parse_list(text)
    start, step, stop = (parse_number(t) for t in text.split(":"))
    if step <= 0:
        raise ValueError("Eb/N0 step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(n)]


def _bool(text) -> bool:
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# flag name -> (config key, converter)
SWEEP_KEYS = {
    "scheme": str, "mod": str, "delta": parse_list, "phi": parse_list, "ebn0": parse_range,
    "packets": int, "bits": int, "seed": int, "q": int, "iters": int, "tol": float,
    "interleaver_seed": int, "rate_shift": _bool, "threads": int, "out": str,
}
DEFAULTS = {"packets": 2000, "bits": 2048, "seed": 0, "q": 3, "iters": 50, "tol": 1e-6,
            "interleaver_seed": 1, "rate_shift": True, "threads": None}


def read_config(path: str | Path) -> dict:
    """Flat ``key = value`` file; '#' and ';' start comments."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string("[sweep]\n" + Path(path).read_text())
    out = {}
    for key, value in parser["sweep"].items():
        key = key.strip().replace("-", "_")
        if key not in SWEEP_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        out[key] = value
    return out


def resolve_sweep_args(ns: argparse.Namespace) -> dict:
    merged = dict(DEFAULTS)
    if ns.config:
        merged.update(read_config(ns.config))
    for key in SWEEP_KEYS:
        value = getattr(ns, key, None)
        if value is not None:
            merged[key] = value
    missing = [k for k in ("scheme", "mod", "ebn0", "out") if merged.get(k) is None]
    if missing:
        raise ValueError(f"missing required setting(s): {', '.join(missing)}")
    out = {}
    for key, value in merged.items():
        conv = SWEEP_KEYS[key]
        out[key] = value if value is None or not isinstance(value, str) else conv(value)
    if out.get("delta") is None:
        out["delta"] = [0.0]
    if out.get("phi") is None:
        out["phi"] = [0.0]
    return out


def sweep_config(args: dict) -> SweepConfig:
    return SweepConfig(Scheme(args["scheme"]), args["mod"], args["delta"], args["phi"],
                       args["ebn0"], packets_per_point=args["packets"],
                       bits_per_packet=args["bits"], master_seed=args["seed"], q=args["q"],
                       interleaver_seed=args["interleaver_seed"], iters=args["iters"],
                       tol=args["tol"], rate_shift=args["rate_shift"])


def cmd_sweep(ns) -> int:
    args = resolve_sweep_args(ns)
    cfg = sweep_config(args)
    records = run_sweep(cfg, args["out"], threads=args["threads"])
    print(f"wrote {len(records)} rows to {args['out']}")
    return 0


def cmd_verify(ns) -> int:
    from . import verify

    quick = ns.quick
    ok = True

    def report(name, passed, detail):
        nonlocal ok
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    t = verify.tree_exactness(100 if quick else 500)
    report("tree exactness", t.max_abs_error < 1e-9 and t.decision_mismatches == 0,
           f"{t.frames} frames, max |BP - Bayes| = {t.max_abs_error:.2e}")
    s = verify.sync_ber(500 if quick else 2000)
    report("synchronous BER vs integral", 1 / 3 <= s.ratio <= 3,
           f"simulated {s.simulated:.3e}, analytic {s.analytic:.3e}")
    a = verify.map_agreement(100 if quick else 1000)
    report("Jt-CNC vs joint MAP", a.jt_cnc.rate >= 0.98, f"{a.jt_cnc.rate:.4f} agreement")
    report("XOR-CD stage 2 vs MAP", a.xor_cd.rate >= 0.97, f"{a.xor_cd.rate:.4f} agreement")
    r = verify.noiseless_round_trips(20 if quick else 100)
    bad = r.failures
    report("noiseless round trips", not bad,
           "all zero" if not bad else ", ".join(f"{k}: {v}" for k, v in bad.items()))
    return 0 if ok else 1


def series_name(scheme: str, mod: str, delta: float, phi: float) -> str:
    return f"{scheme}_{mod}_delta{delta:.4g}_phi{phi:.4g}.csv"


def cmd_plotdata(ns) -> int:
    """One file per (scheme, modulation, delta, phi) with ebn0_db, ber, ci_lo, ci_hi."""
    out_dir = Path(ns.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups = defaultdict(list)
    for path in ns.csv:
        for r in read_csv(path):
            groups[(Scheme(r.scheme).value, r.modulation.value, r.delta, r.phi)].append(r)
    for (scheme, mod, delta, phi), recs in sorted(groups.items()):
        target = out_dir / series_name(scheme, mod, delta, phi)
        with open(target, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["ebn0_db", "ber", "ci_lo", "ci_hi"])
            for r in sorted(recs, key=lambda r: r.ebn0_db):
                row = dict(zip(CSV_COLUMNS, r.row()))
                w.writerow([row["ebn0_db"], row["ber"], row["ci_lo"], row["ci_hi"]])
        print(target)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pnc-sim", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sw = sub.add_parser("sweep", help="run a BER sweep and write CSV")
    sw.add_argument("--config", help="key = value file; flags override it")
    sw.add_argument("--scheme", choices=[s.value for s in Scheme])
    sw.add_argument("--mod", choices=["bpsk", "qpsk"])
    sw.add_argument("--delta", help="comma list, e.g. 0,0.5")
    sw.add_argument("--phi", help="comma list, expressions in pi allowed, e.g. 0,pi/4")
    sw.add_argument("--ebn0", help="start:step:stop (inclusive) or comma list, dB")
    sw.add_argument("--packets", type=int)
    sw.add_argument("--bits", type=int, help="source bits per packet")
    sw.add_argument("--seed", type=int, help="master seed")
    sw.add_argument("--q", type=int, help="repeat factor")
    sw.add_argument("--iters", type=int)
    sw.add_argument("--tol", type=float)
    sw.add_argument("--interleaver-seed", dest="interleaver_seed", type=int)
    sw.add_argument("--no-rate-shift", dest="rate_shift", action="store_const", const=False,
                    help="take Eb per coded bit for the coded schemes")
    sw.add_argument("--threads", type=int, help="worker processes (default: PNC_SIM_THREADS)")
    sw.add_argument("--out")
    sw.set_defaults(func=cmd_sweep)

    ve = sub.add_parser("verify", help="decoders against brute-force oracles")
    ve.add_argument("--quick", action="store_true", help="smaller trial counts")
    ve.set_defaults(func=cmd_verify)

    pd = sub.add_parser("plotdata", help="split sweep CSVs into per-curve series")
    pd.add_argument("csv", nargs="+")
    pd.add_argument("--out-dir", default="series")
    pd.set_defaults(func=cmd_plotdata)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")
    try:
        return ns.func(ns)
    except (ValueError, OSError) as exc:
        print(f"pnc-sim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
