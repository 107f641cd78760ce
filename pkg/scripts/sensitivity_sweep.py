"""Sweep filter length, order resolution and band width on a synthetic scenario.

    python3 scripts/sensitivity_sweep.py --scenario narrowband --out results/sweep --jobs 4

Wraps the library sweep (the same code as ``ges2n sweep``) and prints the
summary table.  Resolution values are multiples of the default resolution
of the record, so ``--resolution-factors 1,0.5`` halves the bin spacing.
"""

import argparse
import csv
from pathlib import Path

from ges2n import RunConfig, generate, integrate_angle
from ges2n.pipeline import run_sweep
from ges2n.signal_model import filtered_length
from ges2n.synth import SCENARIOS, scenario
from ges2n.vs_spectrum import default_resolution


def floats(text):
    return [float(v) for v in text.split(",")]


def short(text):
    try:
        return text if float(text).is_integer() else f"{float(text):.4g}"
    except ValueError:
        return text


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="narrowband", choices=list(SCENARIOS))
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--variant", default="GES2N-Max-Np")
    ap.add_argument("--filter-lengths", default="32,64,128,256")
    ap.add_argument("--resolution-factors", default="1")
    ap.add_argument("--band-widths", default="0.1,0.62")
    ap.add_argument("--max-iter", type=int, default=1500)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    record = generate(scenario(args.scenario, args.seed)).record
    lengths = [int(v) for v in floats(args.filter_lengths)]
    theta = integrate_angle(record).theta
    # resolution is taken at the longest filter so every cell resolves the same orders
    base_delta = default_resolution(theta, filtered_length(len(record.x), max(lengths)))
    axes = {
        "filter_length": lengths,
        "delta_alpha": [f * base_delta for f in floats(args.resolution_factors)],
        "band_width": floats(args.band_widths),
    }
    base = RunConfig(variant=args.variant, alpha_c=1.0, max_iter=args.max_iter)
    run_sweep(base, axes, record, args.out, args.jobs)

    with open(Path(args.out) / "summary.csv") as fh:
        rows = list(csv.reader(fh))
    keep = [rows[0].index(c) for c in ("filter_length", "delta_alpha", "band_width", "status", "psi",
                                       "m1_filtered", "m2_filtered", "n_iter", "wall_time_s")]
    table = [[short(r[i]) for i in keep] for r in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(keep))]
    for r in table:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)))


if __name__ == "__main__":
    main()
