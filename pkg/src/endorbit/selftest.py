"""Quick randomized property checks, runnable without the test extras."""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

from .oracle import OracleConfig, raw_orbital_oracle, reduced_orbital_oracle, support_bound
from .orbits import TorusType, invariants, rational_representatives
from .padic import (
    FieldContext,
    count_congruence,
    count_congruence_closed,
    hensel_sqrt,
    quad_symbol,
    random_unit_int,
)
from .sampler import SampleSpec, sample_gamma

PRIMES = (3, 5, 7)


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable[[random.Random], None]
    cases: int


def _symbol_multiplicative(rng):
    p = rng.choice(PRIMES)
    ctx = FieldContext(p, 16)
    a = ctx.F(random_unit_int(rng, p, 6))
    b = ctx.F(random_unit_int(rng, p, 6))
    assert quad_symbol(a * b) == quad_symbol(a) * quad_symbol(b)


def _sqrt_squares_back(rng):
    p = rng.choice(PRIMES)
    ctx = FieldContext(p, 24)
    x = ctx.F(Fraction(random_unit_int(rng, p, 8)) * Fraction(p) ** rng.randrange(-3, 4))
    a = x * x
    r = hensel_sqrt(a)
    assert (r * r).agrees(a), (a, r)


def _congruence_count(rng):
    p = rng.choice(PRIMES)
    ctx = FieldContext(p, 16)
    va = rng.randrange(0, 2)
    a = ctx.F(random_unit_int(rng, p, 4) * p ** va)
    l = rng.randrange(2 * va + 1, 2 * va + 4)
    depth = l + rng.randrange(0, 2)
    assert count_congruence(a, l, depth) == count_congruence_closed(a, l, depth)


def _random_spec(rng) -> SampleSpec:
    t = rng.choice(["I", "II", "III"])
    p = rng.choice(PRIMES)
    seed = rng.randrange(2 ** 32)
    if t == "I":
        b = rng.randrange(0, 3)
        return SampleSpec(t, p, rng.randrange(0, b + 1), b, seed)
    if t == "II":
        return SampleSpec(t, p, None, rng.randrange(0, 3), seed)
    j = rng.randrange(0, 3)
    return SampleSpec(t, p, rng.randrange(0, j + 1), Fraction(2 * j + 1, 2), seed,
                      nu=rng.choice(["pi", "xi^2*pi"]))


def _m12_equals_m23(rng):
    spec = _random_spec(rng)
    if spec.gamma_type is TorusType.II:
        spec = SampleSpec("I", spec.p, None, None, spec.seed)
    inv = invariants(sample_gamma(spec))
    assert inv.M12 == inv.M23, inv


def _oracles_agree_and_stable(rng):
    spec = replace(_random_spec(rng), precision=128)
    gamma = sample_gamma(spec)
    inv = invariants(gamma)
    g = rng.choice(rational_representatives(gamma))
    raw = raw_orbital_oracle(g, inv=inv)
    assert raw == reduced_orbital_oracle(g, inv=inv)
    m = support_bound(inv, g.mu)
    wide = OracleConfig(m_max=2 * m, u_depth=2 * (2 * m + abs(int(inv.v_y)) + 2),
                        check_stability=False)
    assert raw == raw_orbital_oracle(g, wide, inv)


CHECKS = (
    Check("quad_symbol multiplicative on units", _symbol_multiplicative, 200),
    Check("hensel_sqrt squares back", _sqrt_squares_back, 200),
    Check("count_congruence two-coset count", _congruence_count, 200),
    Check("M12 = M23 for types I and III", _m12_equals_m23, 50),
    Check("raw = reduced, stable under doubled caps", _oracles_agree_and_stable, 10),
)


def run_selftest(seed: int = 0, scale: float = 1.0, out=print) -> bool:
    ok = True
    for check in CHECKS:
        rng = random.Random(f"{seed}|{check.name}")
        n = max(1, int(check.cases * scale))
        try:
            for _ in range(n):
                check.run(rng)
            out(f"PASS  {check.name} ({n} cases)")
        except Exception as exc:  # a crash is a failed check, not a selftest crash
            ok = False
            out(f"FAIL  {check.name}: {exc}")
    return ok
