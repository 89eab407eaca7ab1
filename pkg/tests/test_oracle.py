from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from endorbit.errors import NotApplicable, Unstable
from endorbit.oracle import (
    ENTRY_POSITIONS,
    OracleConfig,
    _RawSetup,
    brute_force_measure,
    closed_term,
    conjugated_matrix,
    integral_measure,
    raw_entries,
    raw_orbital_oracle,
    reduced_orbital_oracle,
    support_bound,
)
from endorbit.orbits import TorusType, invariants, rational_representatives
from endorbit.padic import Twist
from endorbit.sampler import SampleSpec, sample_gamma

primes = st.sampled_from([3, 5, 7])


@st.composite
def small_points(draw, x_zero=False, precision=64):
    """A sampled point with M13 <= 2 at one of its rational representatives."""
    t = draw(st.sampled_from(["I", "II"] if x_zero else ["I", "II", "III"]))
    p = draw(primes)
    seed = draw(st.integers(0, 2 ** 32))
    if t == "I" and x_zero:
        spec = SampleSpec(t, p, seed=seed, precision=precision, x_zero=True)
    elif t == "I":
        b = draw(st.integers(0, 2))
        spec = SampleSpec(t, p, draw(st.integers(0, b)), b, seed, precision, x_zero=x_zero)
    elif t == "II":
        if x_zero:
            spec = SampleSpec(t, p, draw(st.integers(0, 2)), None, seed, precision, x_zero=True)
        else:
            spec = SampleSpec(t, p, None, draw(st.integers(0, 2)), seed, precision)
    else:
        j = draw(st.integers(0, 1))
        spec = SampleSpec(t, p, draw(st.integers(0, j)), Fraction(2 * j + 1, 2), seed, precision,
                          nu=draw(st.sampled_from(["pi", "xi^2*pi"])))
    g = sample_gamma(spec)
    return draw(st.sampled_from(rational_representatives(g)))


def test_unconstrained_measure(p):
    assert integral_measure(p, []) == 1
    assert integral_measure(p, [], units_only=True) == 1 - Fraction(1, p)
    # {v(u) = k} inside p^k Z_p scales by q^{-k}
    for k in range(-2, 3):
        assert Fraction(p) ** -k * integral_measure(p, [], units_only=True) == \
            Fraction(p) ** -k * (1 - Fraction(1, p))


@settings(max_examples=200)
@given(st.sampled_from([3, 5]), st.lists(
    st.tuples(st.lists(st.integers(-50, 50), min_size=1, max_size=4), st.integers(0, 3)),
    min_size=1, max_size=2), st.booleans())
def test_measure_matches_enumeration(p, constraints, units_only):
    depth = max(a for _, a in constraints) or 1
    assert integral_measure(p, constraints, units_only) == \
        brute_force_measure(p, constraints, depth, units_only)


def test_measure_depth_cap_raises():
    # v(w^2) >= 40 needs refinement below w = 0 at every level
    with pytest.raises(Unstable):
        integral_measure(3, [([0, 0, 1], 40)], max_depth=5)


@settings(max_examples=40)
@given(small_points(), st.integers(-3, 3), st.fractions(max_denominator=30).filter(bool))
def test_raw_entries_match_matrix_product(g, m, u):
    A = conjugated_matrix(g, m, g.ctx.F(u))
    E = raw_entries(g, m, g.ctx.F(u))
    for (i, j), e in zip(ENTRY_POSITIONS, E):
        assert A[i][j].agrees(e)
    # the remaining three entries mirror (0,0), (0,1), (1,0)
    assert A[2][2].agrees(A[0][0])
    assert A[1][2].agrees(A[0][1])
    assert A[2][1].agrees(A[1][0])


@settings(max_examples=200)
@given(small_points())
def test_raw_equals_reduced(g):
    inv = invariants(g)
    assert raw_orbital_oracle(g, inv=inv) == reduced_orbital_oracle(g, inv=inv)


@settings(max_examples=200)
@given(small_points(precision=128))
def test_oracles_stable_under_doubled_caps(g):
    inv = invariants(g)
    base = raw_orbital_oracle(g, inv=inv)
    m = support_bound(inv, g.mu)
    u = 2 * m + abs(int(inv.v_y)) + 2
    wide = OracleConfig(m_max=2 * m, u_depth=2 * u, check_stability=False)
    assert raw_orbital_oracle(g, wide, inv) == base
    if not g.x_is_zero:
        assert reduced_orbital_oracle(g, wide, inv) == base


@settings(max_examples=30)
@given(small_points())
def test_tail_cell_is_indicator(g):
    """For v(u) >= m the integrand at v(t) = m is 1 iff 2m <= v(y) + v(mu) and
    the corner entry is integral, so each such cell contributes q^m q^-m = 1."""
    setup = _RawSetup(g)
    v_y = int(g.y.valuation())
    lo = Fraction(g.mu.valuation - g.nu.valuation - v_y, 2)
    hi = Fraction(v_y + g.mu.valuation, 2)
    for m in range(setup.m_lo - 2, setup.m_lo + v_y + 4):
        setup.k0 = m
        assert setup.term(m, 60) == (1 if lo <= m <= hi else 0)
    assert closed_term(v_y, g.mu, g.nu) == sum(
        1 for m in range(setup.m_lo - 2, setup.m_lo + v_y + 4) if lo <= m <= hi)


@settings(max_examples=20)
@given(small_points(x_zero=True))
def test_x_zero_has_no_reduced_oracle(g):
    with pytest.raises(NotApplicable):
        reduced_orbital_oracle(g)
    assert raw_orbital_oracle(g) >= 0


def test_truncation_below_support_is_reported():
    # type I with M13 = 4 has unit terms at m = -2..2
    g = sample_gamma(SampleSpec("I", 3, 0, 4, seed=0))
    inv = invariants(g)
    with pytest.raises(Unstable):
        raw_orbital_oracle(g, OracleConfig(m_max=0), inv)
    assert raw_orbital_oracle(g, OracleConfig(m_max=2), inv) == Fraction(5, 2)


def test_config_echo_and_doubling():
    cfg = OracleConfig(m_max=5, u_depth=7)
    assert cfg.doubled().m_max == 10 and cfg.doubled().u_depth == 14
    g = sample_gamma(SampleSpec("I", 5, 1, 2, seed=0))
    r = cfg.resolve(invariants(g), Twist.ONE, -3)
    assert r.prefactor == Fraction(1, 2) and r.m_max == 5


def test_negative_invariants_vanish():
    for seed in range(5):
        g = sample_gamma(SampleSpec("I", 3, seed=seed, scale=1 + seed % 2))
        inv = invariants(g)
        assert inv.has_negative()
        for r in rational_representatives(g):
            assert raw_orbital_oracle(r, inv=inv) == 0


def test_raw_entries_at_origin():
    g = sample_gamma(SampleSpec("II", 5, 0, 1, seed=0))
    E = raw_entries(g, 0, g.ctx.zero())
    want = (g.x, g.ctx.zero(), g.z, g.ctx.nu_scalar() * g.y, g.ctx.zero(), g.y)
    assert all(a.agrees(b) for a, b in zip(E, want))


def test_reduced_oracle_closed_term_only():
    # M12 = M23 = 0 leaves no k below m; the value is (M13 + delta) / 2 for type I
    for seed in range(3):
        g = sample_gamma(SampleSpec("I", 5, 0, 3, seed=seed))
        inv = invariants(g)
        for r in rational_representatives(g):
            want = Fraction(1, 2) * (3 + (1 if (3 + r.mu.pi_bit) % 2 == 0 else 0))
            assert reduced_orbital_oracle(r, inv=inv) == want


def test_support_bound_examples():
    inv = invariants(sample_gamma(SampleSpec("II", 5, 0, 0, seed=0, target_M23=0)))
    assert support_bound(inv, Twist.ONE) <= 3
    # v(y) = M13 here, so the cap is 4 + 4 + 4 + 4 + 2
    inv = invariants(sample_gamma(SampleSpec("II", 5, 4, 4, seed=0, precision=128, target_M23=4)))
    assert inv.v_y == 4 and support_bound(inv, Twist.ONE) == 18


def test_non_integral_x_gives_zero():
    for seed in range(3):
        g = sample_gamma(SampleSpec("I", 5, seed=seed, scale=-1))
        inv = invariants(g)
        assert inv.v_x < 0
        assert all(raw_orbital_oracle(r, inv=inv) == 0 for r in rational_representatives(g))
