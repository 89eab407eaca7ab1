"""Run the default comparison grid and print a per-case summary.

    python scripts/run_acceptance_grid.py [--out report.jsonl] [--jobs N]
"""
import argparse
import sys
import time

from endorbit.harness import GridConfig, default_grid, emit_report, exit_code, run_grid, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None, help="optional json-lines report path")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes")
    ap.add_argument("--seeds", type=int, default=5, help="seeds per cell")
    args = ap.parse_args()

    t0 = time.perf_counter()
    records = run_grid(default_grid(GridConfig(seeds=args.seeds)), jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(emit_report(records))
    s = summarize(records)
    print(f"{s['cells']} cells in {elapsed:.1f}s")
    print(f"stated forms match: {s['match']}  (values {s['values_match']}, kappa {s['kappa_match']})")
    print(f"amended forms match: {s['amended_match']}  unstable: {s['unstable']}  errors: {s['errors']}")
    print(f"{'case':<16}{'cells':>6}{'stated':>8}{'amended':>9}")
    for case, c in s["cases"].items():
        print(f"{case:<16}{c['cells']:>6}{c['match']:>8}{c['amended_match']:>9}")
    return exit_code(records)


if __name__ == "__main__":
    sys.exit(main())
