from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from endorbit.errors import DivisionByZero, NotASquare, PrecisionExhausted
from endorbit.padic import (
    FieldContext,
    Level,
    PadicScalar,
    Twist,
    count_congruence,
    count_congruence_closed,
    format_rational,
    hensel_sqrt,
    legendre,
    least_nonresidue,
    parse_rational,
    quad_symbol,
    sqrt_mod_prime,
    square_class,
    vp_fraction,
)

primes = st.sampled_from([3, 5, 7, 11])
units = st.integers(1, 10 ** 6)


def unit_of(p, n):
    return n if n % p else n + 1


def test_rational_text_round_trip():
    for v in (Fraction(0), Fraction(-3, 4), Fraction(7), Fraction(1, 2)):
        assert parse_rational(format_rational(v)) == v
    assert format_rational(Fraction(5, 2)) == "5/2"


def test_least_nonresidue():
    assert [least_nonresidue(p) for p in (3, 5, 7, 11, 13)] == [2, 2, 3, 2, 2]


@given(primes, st.integers(1, 10 ** 4))
def test_sqrt_mod_prime(p, a):
    a %= p
    if a == 0 or legendre(a, p) != 1:
        return
    r = sqrt_mod_prime(a, p)
    assert r * r % p == a


@given(primes, st.integers(-5, 5), units)
def test_from_rational_round_trip(p, e, n):
    ctx = FieldContext(p, 20)
    x = Fraction(unit_of(p, n), 7 if p != 7 else 11) * Fraction(p) ** e
    s = ctx.F(x)
    assert s.valuation() == vp_fraction(x, p)
    assert s.agrees(ctx.F(s.to_fraction()))


def test_field_ops_exact_for_small_rationals():
    ctx = FieldContext(5, 30)
    a, b = ctx.F(Fraction(3, 7)), ctx.F(Fraction(-10, 3))
    assert (a * b).agrees(ctx.F(Fraction(-10, 7)))
    assert (a / b).agrees(ctx.F(Fraction(-9, 70)))
    assert (a - a).is_zero()
    with pytest.raises((DivisionByZero, PrecisionExhausted)):
        a / (b - b)


def test_xi_squares_to_epsilon(p):
    ctx = FieldContext(p, 20)
    xi = ctx.xi()
    assert (xi * xi).agrees(ctx.F(ctx.epsilon))
    assert xi.conj_theta().agrees(-xi)


@settings(max_examples=200)
@given(primes, units, units, units, units)
def test_norm_multiplicative_on_E(p, a, b, c, d):
    ctx = FieldContext(p, 24)
    x, y = ctx.E(unit_of(p, a), b), ctx.E(c, unit_of(p, d))
    assert (x * y).norm().agrees(x.norm() * y.norm())
    assert (x * x.conj_theta()).agrees(x.norm())


@given(primes, units, units, st.sampled_from(["pi", "xi^2*pi"]))
def test_tower_conjugation(p, a, b, nu):
    ctx = FieldContext(p, 24, Twist.parse(nu))
    s = ctx.sqrt_nu()
    assert (s * s).agrees(ctx.nu_scalar())
    assert s.valuation() == Fraction(1, 2)
    w = ctx.one() + ctx.E(a, b) * s
    assert (w * w.conj_tower()).agrees(ctx.one() - ctx.E(a, b) ** 2 * ctx.nu_scalar())


@settings(max_examples=200)
@given(primes, units, units)
def test_quad_symbol_multiplicative_on_units(p, a, b):
    ctx = FieldContext(p, 16)
    x, y = ctx.F(unit_of(p, a)), ctx.F(unit_of(p, b))
    assert quad_symbol(x * y) == quad_symbol(x) * quad_symbol(y)


def test_quad_symbol_odd_valuation_is_nonsquare(p):
    ctx = FieldContext(p, 16)
    assert quad_symbol(ctx.F(p)) == -1
    assert square_class(ctx.F(p * ctx.epsilon)) is Twist.XI2PI
    assert square_class(ctx.F(4 * p * p)) is Twist.ONE


@settings(max_examples=200)
@given(primes, units, st.integers(-4, 4))
def test_hensel_sqrt_squares_back(p, n, e):
    ctx = FieldContext(p, 32)
    x = ctx.F(Fraction(unit_of(p, n)) * Fraction(p) ** e)
    a = x * x
    r = hensel_sqrt(a)
    assert (r * r).agrees(a)
    assert 1 <= r.coords[0] % p <= (p - 1) // 2


def test_hensel_sqrt_rejects_nonsquares(p):
    ctx = FieldContext(p, 16)
    with pytest.raises(NotASquare):
        hensel_sqrt(ctx.F(ctx.epsilon))
    with pytest.raises(NotASquare):
        hensel_sqrt(ctx.F(p))


@settings(max_examples=200)
@given(st.sampled_from([3, 5]), st.integers(1, 10 ** 4), st.integers(0, 1), st.data())
def test_count_congruence_matches_two_cosets(p, n, va, data):
    ctx = FieldContext(p, 16)
    a = ctx.F(unit_of(p, n) * p ** va)
    l = data.draw(st.integers(2 * va + 1, 2 * va + 3))
    depth = data.draw(st.integers(l, l + 1))
    assert count_congruence(a, l, depth) == count_congruence_closed(a, l, depth)


def test_json_round_trip():
    ctx = FieldContext(7, 20, Twist.PI)
    s = ctx.E(3, 5) * ctx.sqrt_nu() + ctx.F(Fraction(2, 7))
    back = PadicScalar.from_json(ctx, s.to_json())
    assert back.agrees(s) and back.level is Level.L


def test_twist_parse_aliases():
    assert Twist.parse("xi^2*pi") is Twist.parse("xi2pi") is Twist.XI2PI
    assert Twist.parse("1").times(Twist.PI) is Twist.PI
    with pytest.raises(ValueError):
        Twist.parse("zeta")


def test_small_examples_p5():
    from endorbit.padic import arith, leading_coeff

    ctx = FieldContext(5, 8)
    s = ctx.F(2) + ctx.F(3)
    assert s.to_fraction() == 5 and s.valuation() == 1 and s.val2 == 2
    assert ctx.F(50).valuation() == 2
    assert (leading_coeff(ctx.F(50)), leading_coeff(ctx.F(-5)), leading_coeff(ctx.F(Fraction(7, 5)))) \
        == (2, 4, 2)
    with pytest.raises(PrecisionExhausted):
        arith(ctx.F(1 + 5 ** 12), ctx.F(1), "sub")
    with pytest.raises(PrecisionExhausted):
        (ctx.F(1 + 5 ** 12) - 1).valuation()


def test_conjugations_examples():
    ctx = FieldContext(5, 20, Twist.PI)
    one_xi = ctx.one() + ctx.xi()
    assert one_xi.conj_theta().agrees(ctx.one() - ctx.xi())
    assert one_xi.norm().agrees(ctx.F(1 - ctx.epsilon))
    assert ctx.F(3).conj_theta().agrees(ctx.F(3))
    assert ctx.xi().valuation() == 0
    s = ctx.sqrt_nu()
    w = ctx.E(2, 1) + s * ctx.E(1, 3)
    assert w.conj_tower().agrees(ctx.E(2, 1) - s * ctx.E(1, 3))
    assert w.conj_tower().conj_tower().agrees(w)
    assert ctx.E(2, 1).conj_tower().agrees(ctx.E(2, 1))


def test_symbol_and_sqrt_examples_p5():
    ctx = FieldContext(5, 20)
    assert [quad_symbol(ctx.F(a)) for a in (4, 10, 2)] == [1, -1, -1]
    assert hensel_sqrt(ctx.F(4)).agrees(ctx.F(2))
    assert hensel_sqrt(ctx.F(6)).coords[0] % 125 == 16
    with pytest.raises(NotASquare):
        hensel_sqrt(ctx.F(2))
    assert count_congruence(ctx.F(1), 2, 2) == 2
    assert count_congruence(ctx.F(1), 0, 1) == 5
