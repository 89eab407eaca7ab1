"""Command line: eval, compare, selftest."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .closed_form import dispatch_case, eval_orbital, kappa_corollary, kappa_sum
from .errors import EndorbitError, NegativeInvariant, NotApplicable
from .harness import GridConfig, default_grid, emit_report, exit_code, run_grid, summarize
from .oracle import OracleConfig, raw_orbital_oracle, reduced_orbital_oracle
from .orbits import EndoscopicGroup, SymmetricPoint, invariants, rational_representatives
from .padic import format_rational, parse_rational
from .sampler import SampleSpec, sample_gamma

OUT_DIR_ENV = "ENDORBIT_OUT_DIR"
EXT = {"json-lines": "jsonl", "csv": "csv"}


def _csv_list(conv):
    def parse(text):
        return tuple(conv(t) for t in text.split(",") if t)
    return parse


def _rat(text):
    return None if text is None else parse_rational(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="endorbit",
        description="Relative orbital integrals on U(3)/SO(3): closed forms against lattice oracles.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate one point at every rational representative",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    ev.add_argument("--gamma-json", type=Path, default=None,
                    help="point as written by SymmetricPoint.to_json; overrides the sampler flags")
    ev.add_argument("--type", default="II", choices=["I", "II", "III"], help="torus type")
    ev.add_argument("--p", type=int, default=3, help="odd residue characteristic")
    ev.add_argument("--M12", default=None, help="target M12 (n or n/2)")
    ev.add_argument("--M13", default=None, help="target M13 (n or n/2)")
    ev.add_argument("--M23", default=None, help="target M23 (n or n/2)")
    ev.add_argument("--seed", type=int, default=0, help="sampler seed")
    ev.add_argument("--precision", type=int, default=64, help="p-adic digits")
    ev.add_argument("--x-zero", action="store_true", help="sample a point with x = 0")
    ev.add_argument("--scale", type=int, default=0,
                    help="type I only: multiply lambda_1 by p^scale (non-integral eigenvalues)")
    ev.add_argument("--nu", default=None, help="type III only: pi or xi^2*pi")
    ev.add_argument("--no-oracle", action="store_true", help="closed forms only")
    _oracle_flags(ev)

    cp = sub.add_parser("compare", help="run the comparison grid and write a report",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    cp.add_argument("--types", type=_csv_list(str), default=("I", "II", "III"),
                    help="comma separated torus types")
    cp.add_argument("--primes", type=_csv_list(int), default=(3, 5, 7), help="comma separated odd primes")
    cp.add_argument("--max-m", type=int, default=4,
                    help="largest targeted M (type III uses M13 <= max-m - 1/2)")
    cp.add_argument("--seeds", type=int, default=5, help="seeds per grid cell")
    cp.add_argument("--precision", type=int, default=64,
                    help="p-adic digits; doubled once on exhaustion")
    cp.add_argument("--no-x-zero", action="store_true", help="skip the x = 0 cells")
    cp.add_argument("--negative", type=int, default=0,
                    help="extra type I cells per (p, seed) with non-integral eigenvalues")
    cp.add_argument("--format", choices=sorted(EXT), default="json-lines", help="report format")
    cp.add_argument("--out", default=None,
                    help=f"report path, '-' for stdout; default ${OUT_DIR_ENV}/compare.<ext> "
                         f"when {OUT_DIR_ENV} is set, else stdout")
    cp.add_argument("--jobs", type=int, default=1, help="worker processes")
    cp.add_argument("--timings", action="store_true",
                    help="include wall-clock timings (the report is then not reproducible)")
    _oracle_flags(cp)

    st = sub.add_parser("selftest", help="randomized property checks of every module",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    st.add_argument("--seed", type=int, default=0, help="rng seed")
    st.add_argument("--scale", type=float, default=1.0, help="multiplier on the number of cases")
    return ap


def _oracle_flags(ap):
    ap.add_argument("--m-max-override", type=int, default=None,
                    help="cap on v(t); default derived from the invariants")
    ap.add_argument("--u-depth-override", type=int, default=None,
                    help="u refinement depth; default derived from the invariants")


def _oracle_cfg(args) -> OracleConfig:
    return OracleConfig(m_max=args.m_max_override, u_depth=args.u_depth_override)


def _r(v):
    return None if v is None else format_rational(v)


def cmd_eval(args) -> int:
    if args.gamma_json is not None:
        gamma = SymmetricPoint.from_json(json.loads(args.gamma_json.read_text()))
    else:
        spec = SampleSpec(args.type, args.p, _rat(args.M12), _rat(args.M13), args.seed,
                          args.precision, _rat(args.M23), args.x_zero, args.scale, args.nu)
        gamma = sample_gamma(spec)
    inv = invariants(gamma)
    try:
        case = dispatch_case(inv).case_id
    except NegativeInvariant:
        case = "negative"
    ocfg = _oracle_cfg(args)
    out = {"type": inv.gamma_type.value, "p": inv.q, "nu": inv.nu.label, "case": case,
           "M12": _r(inv.M12), "M13": _r(inv.M13), "M23": _r(inv.M23), "values": {}}
    raws, closed = {}, {}
    for g in rational_representatives(gamma):
        closed[g.mu] = eval_orbital(inv, g.mu)
        row = {"closed": _r(closed[g.mu]),
               "amended": _r(eval_orbital(inv, g.mu, amended=True))}
        if not args.no_oracle:
            raws[g.mu] = raw_orbital_oracle(g, ocfg, inv)
            row["raw"] = _r(raws[g.mu])
            try:
                row["reduced"] = _r(reduced_orbital_oracle(g, ocfg, inv))
            except NotApplicable:
                row["reduced"] = None
        out["values"][g.mu.label] = row
    out["kappa"] = {}
    for k in EndoscopicGroup(inv.gamma_type).characters():
        entry = {"closed_sum": _r(kappa_sum(closed, k)), "corollary": _r(kappa_corollary(inv, k)),
                 "amended": _r(kappa_corollary(inv, k, amended=True))}
        if raws:
            entry["oracle_sum"] = _r(kappa_sum(raws, k))
        out["kappa"][k.name] = entry
    print(json.dumps(out, indent=2))
    return 0


def _out_path(args):
    if args.out == "-":
        return None
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env) / f"compare.{EXT[args.format]}"
    return None


def cmd_compare(args) -> int:
    cfg = GridConfig(types=args.types, primes=args.primes, max_m=args.max_m, seeds=args.seeds,
                     precision=args.precision, x_zero=not args.no_x_zero, negative=args.negative)
    records = run_grid(default_grid(cfg), _oracle_cfg(args), jobs=args.jobs)
    data = emit_report(records, args.format, timings=args.timings)
    path = _out_path(args)
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    s = summarize(records)
    print(f"cells {s['cells']}  match {s['match']}  amended_match {s['amended_match']}  "
          f"unstable {s['unstable']}  errors {s['errors']}", file=sys.stderr)
    for case, c in s["cases"].items():
        if c["match"] != c["cells"]:
            print(f"  {case}: {c['match']}/{c['cells']} match", file=sys.stderr)
    return exit_code(records)


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return 0 if run_selftest(args.seed, args.scale) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"eval": cmd_eval, "compare": cmd_compare, "selftest": cmd_selftest}[args.command](args)
    except EndorbitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
