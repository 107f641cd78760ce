"""Run every objective variant on the synthetic scenarios and tabulate M1-M4.

    python3 scripts/run_benchmark.py --scenarios weak-fault extraneous --out results/benchmark

Each (scenario, variant) pair is one full design with the default settings
(D = 256, tol = 1e-12, max_iter = 1500).  Artifacts for every pair go under
``--out`` and a summary table is printed and written to ``summary.csv``.
"""

import argparse
import csv
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ges2n import VARIANT_NAMES, RunConfig, generate, run_pipeline
from ges2n.pipeline import write_outputs
from ges2n.synth import SCENARIOS, scenario

COLUMNS = ("scenario", "variant", "status", "n_iter", "psi", "m1_raw", "m1_filtered", "m2_filtered",
           "m3_filtered", "m4_filtered", "seconds")


def one(name, variant, seed, filter_length, out):
    record = generate(scenario(name, seed)).record
    start = time.perf_counter()
    result = run_pipeline(RunConfig(variant=variant, alpha_c=1.0, filter_length=filter_length), record)
    seconds = time.perf_counter() - start
    if out:
        write_outputs(Path(out) / name / variant, result)
    s = result.summary()
    return {"scenario": name, "variant": variant, "seconds": round(seconds, 1),
            **{k: s[k] for k in COLUMNS if k in s}}


def fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return "" if v is None else str(v)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenarios", nargs="+", default=list(SCENARIOS), choices=list(SCENARIOS))
    ap.add_argument("--variants", nargs="+", default=list(VARIANT_NAMES), choices=list(VARIANT_NAMES))
    ap.add_argument("--seed", type=int, default=None, help="scenario seed (default: the scenario's own)")
    ap.add_argument("--filter-length", type=int, default=256)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default=None, help="directory for artifacts and summary.csv")
    args = ap.parse_args()

    tasks = [(s, v, args.seed, args.filter_length, args.out) for s in args.scenarios for v in args.variants]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(one, *zip(*tasks)))
    else:
        rows = [one(*t) for t in tasks]

    widths = [max(len(c), *(len(fmt(r.get(c))) for r in rows)) for c in COLUMNS]
    print("  ".join(c.ljust(w) for c, w in zip(COLUMNS, widths)))
    for r in rows:
        print("  ".join(fmt(r.get(c)).ljust(w) for c, w in zip(COLUMNS, widths)))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        with open(Path(args.out) / "summary.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, COLUMNS, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)


if __name__ == "__main__":
    main()
