"""Comparison runner: closed forms against both lattice oracles over a grid of
sampled points, and a deterministic report writer."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .closed_form import dispatch_case, eval_orbital, kappa_corollary, kappa_sum
from .errors import (
    EndorbitError,
    NegativeInvariant,
    NotApplicable,
    PrecisionExhausted,
    Unstable,
)
from .oracle import OracleConfig, raw_orbital_oracle, reduced_orbital_oracle
from .orbits import EndoscopicGroup, TorusType, invariants, rational_representatives
from .padic import Twist, format_rational, parse_rational
from .sampler import SampleSpec, sample_gamma

SCHEMA = 1
REPORT_KEYS = ("id", "p", "nu", "mu", "M12", "M13", "closed", "raw", "reduced", "kappa", "match")
EXTRA_KEYS = ("schema", "type", "M23", "case", "precision", "stable", "amended", "amended_match",
              "cfg", "error")
CSV_HEADER = ("id", "type", "p", "nu", "mu", "M12", "M13", "M23", "case",
              "closed", "raw", "reduced", "amended", "match", "stable", "kappa")


@dataclass(frozen=True)
class GridConfig:
    types: tuple = ("I", "II", "III")
    primes: tuple = (3, 5, 7)
    max_m: int = 4
    seeds: int = 5
    precision: int = 64
    x_zero: bool = True
    negative: int = 0


def type1_targets(max_m: int):
    return [(a, b) for b in range(max_m + 1) for a in range(b + 1)]


def type2_targets(max_m: int):
    out = [(l, l, l) for l in range(max_m + 1)]
    for l in range(max_m + 1):
        for h in range(l + 1, max_m + 1):
            out += [(h, l, l), (l, h, l), (l, l, h)]
    return out


def type3_targets(max_m: int):
    """(M12, M13) with M13 <= max_m - 1/2."""
    out = []
    for j in range(max_m):
        M13 = Fraction(2 * j + 1, 2)
        out += [(Fraction(m), M13) for m in range(j + 1)]
        if j:
            out.append((M13, M13))
    return out


def default_grid(cfg: GridConfig = GridConfig()) -> list:
    """Every cell of the acceptance grid as (id, SampleSpec), ordered by id."""
    specs = []
    types = {TorusType(str(t)).value for t in cfg.types}
    for p in cfg.primes:
        for s in range(cfg.seeds):
            def add(sid, spec):
                specs.append((f"{sid}-p{p}-s{s}", spec))

            if "I" in types:
                for a, b in type1_targets(cfg.max_m):
                    add(f"I-{a}-{b}", SampleSpec("I", p, a, b, s, cfg.precision))
                if cfg.x_zero:
                    add("I-x0", SampleSpec("I", p, seed=s, precision=cfg.precision, x_zero=True))
                for n in range(cfg.negative):
                    add(f"I-neg{n}", SampleSpec("I", p, seed=s * 1000 + n, precision=cfg.precision,
                                                scale=1 + n % 3))
            if "II" in types:
                for a, b, c in type2_targets(cfg.max_m):
                    add(f"II-{a}-{b}-{c}", SampleSpec("II", p, a, b, s, cfg.precision, target_M23=c))
                if cfg.x_zero:
                    for m in range(cfg.max_m):
                        add(f"II-x0-12.{m}", SampleSpec("II", p, m, None, s, cfg.precision, x_zero=True))
                    for m in range(1, cfg.max_m):
                        add(f"II-x0-23.{m}", SampleSpec("II", p, None, None, s, cfg.precision,
                                                        target_M23=m, x_zero=True))
            if "III" in types:
                for nu in (Twist.PI, Twist.XI2PI):
                    for a, b in type3_targets(cfg.max_m):
                        add(f"III{nu.label}-{format_rational(a)}-{format_rational(b)}",
                            SampleSpec("III", p, a, b, s, cfg.precision, nu=nu))
    return specs


@dataclass
class ComparisonRecord:
    id: str
    gamma_type: str
    p: int
    nu: str
    M12: Optional[Fraction] = None
    M13: Optional[Fraction] = None
    M23: Optional[Fraction] = None
    case: Optional[str] = None
    precision: int = 0
    mu: list = field(default_factory=list)
    closed: list = field(default_factory=list)
    raw: list = field(default_factory=list)
    reduced: list = field(default_factory=list)
    amended: list = field(default_factory=list)
    kappa: dict = field(default_factory=dict)
    stable: bool = True
    cfg: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def values_match(self) -> bool:
        if self.error or not self.stable:
            return False
        return all(c == r and (d is None or d == r)
                   for c, r, d in zip(self.closed, self.raw, self.reduced))

    @property
    def kappa_match(self) -> bool:
        return all(k["summed"] == k["corollary"] for k in self.kappa.values())

    @property
    def match(self) -> bool:
        return self.values_match and self.kappa_match

    @property
    def amended_match(self) -> bool:
        if self.error or not self.stable:
            return False
        return (all(a == r for a, r in zip(self.amended, self.raw))
                and all(k["summed"] == k["amended"] for k in self.kappa.values()))


def _oracle_values(gamma, inv, ocfg: OracleConfig):
    raw = raw_orbital_oracle(gamma, ocfg, inv)
    try:
        red = reduced_orbital_oracle(gamma, ocfg, inv)
    except NotApplicable:
        red = None
    return raw, red


def _fill(rec: ComparisonRecord, spec: SampleSpec, ocfg: OracleConfig):
    gamma = sample_gamma(spec)
    inv = invariants(gamma)
    rec.precision = gamma.ctx.precision
    rec.M12, rec.M13, rec.M23 = inv.Ms
    try:
        rec.case = dispatch_case(inv).case_id
    except NegativeInvariant:
        rec.case = "negative"
    t_closed = t_oracle = 0.0
    values = {}
    for g in rational_representatives(gamma):
        t0 = time.perf_counter()
        closed = eval_orbital(inv, g.mu)
        amended = eval_orbital(inv, g.mu, amended=True)
        t1 = time.perf_counter()
        try:
            raw, red = _oracle_values(g, inv, ocfg)
        except Unstable:
            rec.stable = False
            raw = red = None
        t_oracle += time.perf_counter() - t1
        t_closed += t1 - t0
        rec.mu.append(g.mu.label)
        rec.closed.append(closed)
        rec.amended.append(amended)
        rec.raw.append(raw)
        rec.reduced.append(red)
        values[g.mu] = raw
    if rec.stable:
        for k in EndoscopicGroup(inv.gamma_type).characters():
            rec.kappa[k.name] = {
                "summed": kappa_sum(values, k),
                "corollary": kappa_corollary(inv, k),
                "amended": kappa_corollary(inv, k, amended=True),
            }
    rec.timings = {"closed_s": t_closed, "oracle_s": t_oracle}


def run_comparison(sid: str, spec: SampleSpec, ocfg: Optional[OracleConfig] = None) -> ComparisonRecord:
    """Evaluate one sampled point at every rational representative mu.

    Precision is doubled once (resampling the same seed) when any stage runs
    out of p-adic digits.
    """
    ocfg = ocfg or OracleConfig()
    rec = None
    for attempt in range(2):
        rec = ComparisonRecord(sid, spec.gamma_type.value, spec.p, spec.torus_nu.label,
                               cfg={"m_max": ocfg.m_max, "u_depth": ocfg.u_depth,
                                    "stability_factor": ocfg.stability_factor})
        try:
            _fill(rec, spec, ocfg)
            return rec
        except PrecisionExhausted as exc:
            rec.error = f"PrecisionExhausted: {exc}"
            spec = replace(spec, precision=2 * spec.precision)
        except EndorbitError as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
            return rec
    return rec


def _run_one(args):
    sid, spec, ocfg = args
    return run_comparison(sid, spec, ocfg)


def run_grid(cells: Sequence, ocfg: Optional[OracleConfig] = None, jobs: int = 1) -> list:
    """Records in id order; cells are independent so jobs > 1 only changes speed."""
    ocfg = ocfg or OracleConfig()
    work = [(sid, spec, ocfg) for sid, spec in sorted(cells, key=lambda c: c[0])]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run_one, work, chunksize=4))
    return [_run_one(w) for w in work]


# ---------------------------------------------------------------- reports

def _r(v):
    return None if v is None else format_rational(v)


def record_to_row(rec: ComparisonRecord, timings: bool = False) -> dict:
    row = {
        "id": rec.id,
        "p": rec.p,
        "nu": rec.nu,
        "mu": list(rec.mu),
        "M12": _r(rec.M12),
        "M13": _r(rec.M13),
        "closed": [_r(v) for v in rec.closed],
        "raw": [_r(v) for v in rec.raw],
        "reduced": [_r(v) for v in rec.reduced],
        "kappa": {name: {"summed": _r(k["summed"]), "corollary": _r(k["corollary"]),
                         "amended": _r(k["amended"]), "match": k["summed"] == k["corollary"]}
                  for name, k in rec.kappa.items()},
        "match": rec.match,
        "schema": SCHEMA,
        "type": rec.gamma_type,
        "M23": _r(rec.M23),
        "case": rec.case,
        "precision": rec.precision,
        "stable": rec.stable,
        "amended": [_r(v) for v in rec.amended],
        "amended_match": rec.amended_match,
        "cfg": dict(rec.cfg),
        "error": rec.error,
    }
    if timings:
        row["timings"] = {k: round(v, 6) for k, v in rec.timings.items()}
    return row


def row_to_record(row: dict) -> ComparisonRecord:
    def f(v):
        return None if v is None else parse_rational(v)

    rec = ComparisonRecord(
        id=row["id"], gamma_type=row["type"], p=row["p"], nu=row["nu"],
        M12=f(row["M12"]), M13=f(row["M13"]), M23=f(row["M23"]), case=row["case"],
        precision=row["precision"], mu=list(row["mu"]),
        closed=[f(v) for v in row["closed"]], raw=[f(v) for v in row["raw"]],
        reduced=[f(v) for v in row["reduced"]], amended=[f(v) for v in row["amended"]],
        kappa={name: {"summed": f(k["summed"]), "corollary": f(k["corollary"]),
                      "amended": f(k["amended"])} for name, k in row["kappa"].items()},
        stable=row["stable"], cfg=dict(row["cfg"]), error=row["error"],
        timings=dict(row.get("timings", {})),
    )
    return rec


def emit_report(records: Iterable[ComparisonRecord], fmt: str = "json-lines",
                timings: bool = False) -> bytes:
    """json-lines: one object per record; csv: one row per (record, mu)."""
    if fmt == "json-lines":
        lines = [json.dumps(record_to_row(r, timings), separators=(",", ":")) for r in records]
        return "".join(line + "\n" for line in lines).encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            kap = ";".join(f"{n}:{_r(k['summed'])}/{_r(k['corollary'])}" for n, k in r.kappa.items())
            for i, mu in enumerate(r.mu or [None]):
                def at(xs):
                    return _r(xs[i]) if i < len(xs) else None
                w.writerow([r.id, r.gamma_type, r.p, r.nu, mu, _r(r.M12), _r(r.M13), _r(r.M23),
                            r.case, at(r.closed), at(r.raw), at(r.reduced), at(r.amended),
                            int(r.match), int(r.stable), kap])
        return buf.getvalue().encode()
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report(data: bytes) -> list:
    return [row_to_record(json.loads(line)) for line in data.decode().splitlines() if line]


def exit_code(records: Sequence[ComparisonRecord]) -> int:
    return 0 if all(r.match and r.stable for r in records) else 1


def summarize(records: Sequence[ComparisonRecord]) -> dict:
    cases = {}
    for r in records:
        c = cases.setdefault(r.case or "error", {"cells": 0, "match": 0, "amended_match": 0})
        c["cells"] += 1
        c["match"] += r.match
        c["amended_match"] += r.amended_match
    return {
        "cells": len(records),
        "match": sum(r.match for r in records),
        "values_match": sum(r.values_match for r in records),
        "kappa_match": sum(r.kappa_match for r in records),
        "amended_match": sum(r.amended_match for r in records),
        "unstable": sum(not r.stable for r in records),
        "errors": sum(r.error is not None for r in records),
        "cases": dict(sorted(cases.items())),
    }
