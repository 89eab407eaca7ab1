"""One PASS/FAIL line per acceptance criterion.

Criteria 1 and 2 compare the stated closed forms with the lattice oracles.
Several stated forms miss the oracle values by an exact, structured amount
(see README, "Known disagreements"), so those two criteria fail; they are
marked xfail(strict) so that a fix would surface as XPASS.
"""
import random
import time
from fractions import Fraction

import pytest

from conftest import report_line
from endorbit.cli import main
from endorbit.closed_form import eval_orbital, kappa_corollary, kappa_sum
from endorbit.harness import parse_report
from endorbit.oracle import OracleConfig, raw_orbital_oracle, reduced_orbital_oracle, support_bound
from endorbit.orbits import EndoscopicGroup, invariants, rational_representatives
from endorbit.padic import (
    FieldContext,
    count_congruence,
    count_congruence_closed,
    hensel_sqrt,
    quad_symbol,
    random_unit_int,
)
from endorbit.sampler import SampleSpec, sample_gamma

TEN_MINUTES = 600.0


@pytest.fixture(scope="module")
def grid_runs(tmp_path_factory):
    """Two runs of `compare` with the default flags."""
    d = tmp_path_factory.mktemp("acc")
    runs = []
    for i in range(2):
        out = d / f"run{i}.jsonl"
        t0 = time.perf_counter()
        code = main(["compare", "--out", str(out)])
        runs.append((out.read_bytes(), code, time.perf_counter() - t0))
    return runs


def _records(grid_runs):
    return parse_report(grid_runs[0][0])


def _failing_cases(recs, attr):
    out = {}
    for r in recs:
        if not getattr(r, attr):
            out[r.case] = out.get(r.case, 0) + 1
    return dict(sorted(out.items()))


@pytest.mark.xfail(strict=True, reason="stated forms of I.3, I.4, II.3, II.4, II.5, III.4 "
                                       "disagree with the oracles")
def test_criterion_1_oracle_formula_equivalence(grid_runs):
    recs = _records(grid_runs)
    seconds = grid_runs[0][2]
    values = sum(len(r.mu) for r in recs)
    good = sum(r.values_match for r in recs)
    oracle_pair = all(d is None or d == w for r in recs for w, d in zip(r.raw, r.reduced))
    ok = good == len(recs) and seconds < TEN_MINUTES
    report_line(f"{'PASS' if ok else 'FAIL'} criterion 1: closed = raw = reduced in {good}/{len(recs)} "
                f"cells ({values} mu-values), raw = reduced everywhere: {oracle_pair}, "
                f"{seconds:.0f}s; failing cells by case {_failing_cases(recs, 'values_match')}")
    assert oracle_pair and seconds < TEN_MINUTES
    assert good == len(recs)


@pytest.mark.xfail(strict=True, reason="stated corollaries inherit the defects and the type III "
                                       "form lacks the sign kappa_nu(-z_y)")
def test_criterion_2_kappa_corollaries(grid_runs):
    recs = _records(grid_runs)
    good = sum(r.kappa_match for r in recs)
    off_nu = [k for r in recs if r.gamma_type == "III"
              for name, k in r.kappa.items() if name != f"kappa_{r.nu}"]
    vanish = all(k["summed"] == 0 and k["corollary"] == 0 for k in off_nu)
    ok = good == len(recs) and vanish
    report_line(f"{'PASS' if ok else 'FAIL'} criterion 2: kappa sums equal corollaries in "
                f"{good}/{len(recs)} cells; type III off-kappa_nu sums vanish: {vanish} "
                f"({len(off_nu)} checks); failing cells by case {_failing_cases(recs, 'kappa_match')}")
    assert vanish
    assert good == len(recs)


def test_amended_forms_cover_the_grid(grid_runs):
    """Not a numbered criterion: the amended forms agree with both oracles everywhere."""
    recs = _records(grid_runs)
    good = sum(r.amended_match for r in recs)
    report_line(f"{'INFO' if good == len(recs) else 'FAIL'} amended closed forms and kappa sums "
                f"match the oracles in {good}/{len(recs)} cells")
    assert good == len(recs)


def test_criterion_3_spot_values():
    checks = []
    for p in (3, 5, 7):
        g = sample_gamma(SampleSpec("I", p, 0, 0, seed=0, precision=128))
        inv = invariants(g)
        for r, want in zip(rational_representatives(g), (Fraction(1, 2), Fraction(0))):
            checks.append(eval_orbital(inv, r.mu) == raw_orbital_oracle(r, inv=inv)
                          == reduced_orbital_oracle(r, inv=inv) == want)
        g = sample_gamma(SampleSpec("I", p, 0, 3, seed=0, precision=128))
        inv = invariants(g)
        vals = {}
        for r, want in zip(rational_representatives(g), (Fraction(3, 2), Fraction(2))):
            vals[r.mu] = raw_orbital_oracle(r, inv=inv)
            checks.append(eval_orbital(inv, r.mu) == vals[r.mu]
                          == reduced_orbital_oracle(r, inv=inv) == want)
        k = EndoscopicGroup(inv.gamma_type).characters()[0]
        checks.append(kappa_sum(vals, k) == kappa_corollary(inv, k) == Fraction(-1, 2))
        for nu in ("pi", "xi^2*pi"):
            g = sample_gamma(SampleSpec("III", p, 0, Fraction(1, 2), seed=0, precision=128, nu=nu))
            inv = invariants(g)
            for r in rational_representatives(g):
                checks.append(eval_orbital(inv, r.mu) == raw_orbital_oracle(r, inv=inv)
                              == reduced_orbital_oracle(r, inv=inv) == Fraction(1, 4))
    ok = all(checks)
    report_line(f"{'PASS' if ok else 'FAIL'} criterion 3: spot values {sum(checks)}/{len(checks)}")
    assert ok


def test_criterion_4_vanishing():
    n = good = 0
    for i in range(50):
        spec = SampleSpec("I", (3, 5, 7)[i % 3], seed=i, scale=1 + i % 3)
        g = sample_gamma(spec)
        inv = invariants(g)
        assert inv.has_negative()
        n += 1
        good += all(raw_orbital_oracle(r, inv=inv) == 0 == eval_orbital(inv, r.mu)
                    for r in rational_representatives(g))
    ok = good == n == 50
    report_line(f"{'PASS' if ok else 'FAIL'} criterion 4: {good}/{n} samples with a negative "
                f"invariant give 0 from the raw oracle and the formula")
    assert ok


def _symbols(rng):
    p = rng.choice((3, 5, 7))
    ctx = FieldContext(p, 16)
    a, b = ctx.F(random_unit_int(rng, p, 6)), ctx.F(random_unit_int(rng, p, 6))
    return quad_symbol(a * b) == quad_symbol(a) * quad_symbol(b)


def _sqrt(rng):
    p = rng.choice((3, 5, 7))
    ctx = FieldContext(p, 32)
    x = ctx.F(Fraction(random_unit_int(rng, p, 8)) * Fraction(p) ** rng.randrange(-4, 5))
    r = hensel_sqrt(x * x)
    return (r * r).agrees(x * x)


def _count(rng):
    p = rng.choice((3, 5))
    ctx = FieldContext(p, 16)
    va = rng.randrange(2)
    a = ctx.F(random_unit_int(rng, p, 4) * p ** va)
    l = rng.randrange(2 * va + 1, 2 * va + 4)
    depth = l + rng.randrange(2)
    return count_congruence(a, l, depth) == count_congruence_closed(a, l, depth)


def _point(rng, types=("I", "II", "III"), precision=64):
    t = rng.choice(types)
    p = rng.choice((3, 5, 7))
    seed = rng.randrange(2 ** 32)
    if t == "III":
        j = rng.randrange(2)
        return sample_gamma(SampleSpec(t, p, rng.randrange(j + 1), Fraction(2 * j + 1, 2), seed,
                                       precision, nu=rng.choice(("pi", "xi^2*pi"))))
    if t == "I":
        b = rng.randrange(3)
        return sample_gamma(SampleSpec(t, p, rng.randrange(b + 1), b, seed, precision))
    return sample_gamma(SampleSpec(t, p, None, rng.randrange(3), seed, precision))


def _identities(rng):
    g = _point(rng)
    inv = invariants(g)
    s, h = g.ctx.sqrt_nu(), Fraction(inv.nu.valuation, 2)
    return ((inv.z_x - 1).valuation() == inv.M12 + inv.M23 - inv.N13
            and (inv.z_y + s).valuation() == inv.M23 + inv.N12 - inv.M13 + h
            and (inv.z_y - s).valuation() == inv.M12 + inv.N23 - inv.M13 + h)


def _m12_m23(rng):
    inv = invariants(_point(rng, ("I", "III")))
    return inv.M12 == inv.M23


def _stability(rng):
    g = _point(rng, precision=128)
    r = rng.choice(rational_representatives(g))
    inv = invariants(g)
    base = raw_orbital_oracle(r, inv=inv)
    m = support_bound(inv, r.mu)
    wide = OracleConfig(m_max=2 * m, u_depth=2 * (2 * m + abs(int(inv.v_y)) + 2),
                        check_stability=False)
    return (base == reduced_orbital_oracle(r, inv=inv) == raw_orbital_oracle(r, wide, inv)
            == reduced_orbital_oracle(r, wide, inv))


def test_criterion_5_property_suites():
    suites = [("quad_symbol multiplicative", _symbols), ("hensel_sqrt squares back", _sqrt),
              ("count_congruence closed count", _count), ("valuation identities", _identities),
              ("M12 = M23 for types I, III", _m12_m23), ("oracle stability", _stability)]
    results = []
    for name, fn in suites:
        rng = random.Random(name)
        passed = sum(bool(fn(rng)) for _ in range(200))
        results.append((name, passed))
    ok = all(n == 200 for _, n in results)
    detail = ", ".join(f"{name} {n}/200" for name, n in results)
    report_line(f"{'PASS' if ok else 'FAIL'} criterion 5: {detail}")
    assert ok


def test_criterion_6_determinism(grid_runs):
    (a, _, _), (b, _, _) = grid_runs
    ok = a == b and len(a) > 0
    report_line(f"{'PASS' if ok else 'FAIL'} criterion 6: two default compare runs byte-identical "
                f"({len(a)} bytes)")
    assert ok
