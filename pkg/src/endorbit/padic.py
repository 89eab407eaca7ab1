"""Truncated arithmetic in Q_p, its unramified quadratic extension E = Q_p(xi)
and the ramified tower L = E(sqrt(nu)).

Every scalar is stored as ``p**exp * (c0 + c1*xi + c2*s + c3*xi*s)`` with
``s = sqrt(nu)`` and integer coordinates known modulo ``p**prec``.  After
normalisation at least one coordinate is a unit, so the valuation is ``exp``
when ``c0`` or ``c1`` is a unit and ``exp + 1/2`` otherwise.  Valuations are
handled internally in doubled units (``val2``) so the half-integers of the
ramified tower stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DivisionByZero,
    LevelError,
    NotASquare,
    PrecisionExhausted,
    ZeroValuation,
)

ExactRational = Fraction


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text)


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ZeroValuation("valuation of 0")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_fraction(x: Fraction, p: int) -> int:
    x = Fraction(x)
    return vp(x.numerator, p) - vp(x.denominator, p)


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def least_nonresidue(p: int) -> int:
    for a in range(2, p):
        if legendre(a, p) == -1:
            return a
    raise ValueError(f"no quadratic non-residue mod {p}")


def sqrt_mod_prime(a: int, p: int) -> int:
    """Tonelli-Shanks square root of a nonzero residue modulo an odd prime."""
    a %= p
    if legendre(a, p) != 1:
        raise NotASquare(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = least_nonresidue(p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


class Level(IntEnum):
    F = 0
    E = 1
    L = 2


class Twist(Enum):
    """The four square classes 1, xi^2, pi, xi^2*pi of F^x.

    They label both the torus parameter nu and the rational-orbit parameter mu.
    """

    ONE = (0, 0)
    XI2 = (1, 0)
    PI = (0, 1)
    XI2PI = (1, 1)

    @property
    def xi_bit(self) -> int:
        return self.value[0]

    @property
    def pi_bit(self) -> int:
        return self.value[1]

    @property
    def valuation(self) -> int:
        return self.pi_bit

    @property
    def label(self) -> str:
        return {(0, 0): "1", (1, 0): "xi^2", (0, 1): "pi", (1, 1): "xi^2*pi"}[self.value]

    @classmethod
    def parse(cls, text: str | "Twist") -> "Twist":
        if isinstance(text, Twist):
            return text
        key = str(text).replace(" ", "").replace("ϖ", "pi").replace("ξ", "xi").replace("²", "^2")
        aliases = {
            "1": cls.ONE, "one": cls.ONE,
            "xi^2": cls.XI2, "xi2": cls.XI2, "eps": cls.XI2,
            "pi": cls.PI, "varpi": cls.PI,
            "xi^2*pi": cls.XI2PI, "xi2*pi": cls.XI2PI, "xi^2pi": cls.XI2PI, "xi2pi": cls.XI2PI,
        }
        try:
            return aliases[key.lower()]
        except KeyError:
            raise ValueError(f"unknown square class {text!r}") from None

    def times(self, other: "Twist") -> "Twist":
        return Twist((self.xi_bit ^ other.xi_bit, self.pi_bit ^ other.pi_bit))

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class FieldContext:
    p: int
    precision: int = 64
    nu: Twist = Twist.ONE
    epsilon: int = field(init=False, compare=False)

    def __post_init__(self):
        if not is_odd_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.precision < 8:
            raise ValueError("precision must be at least 8")
        object.__setattr__(self, "nu", Twist.parse(self.nu))
        object.__setattr__(self, "epsilon", least_nonresidue(self.p))

    @property
    def ramified(self) -> bool:
        return self.nu.pi_bit == 1

    @property
    def top_level(self) -> Level:
        return Level.L if self.ramified else Level.E

    def twist_int(self, t: Twist) -> int:
        return self.epsilon ** t.xi_bit * self.p ** t.pi_bit

    def with_nu(self, nu) -> "FieldContext":
        return FieldContext(self.p, self.precision, Twist.parse(nu))

    def with_precision(self, precision: int) -> "FieldContext":
        return FieldContext(self.p, precision, self.nu)

    # constructors
    def F(self, value) -> "PadicScalar":
        return PadicScalar.from_rational(self, value)

    def E(self, a, b=0) -> "PadicScalar":
        return PadicScalar.from_coords(self, Level.E, (a, b))

    def zero(self, level: Level = Level.F) -> "PadicScalar":
        return PadicScalar(self, level, 0, (0, 0, 0, 0), 0, exact_zero=True)

    def one(self) -> "PadicScalar":
        return self.F(1)

    def xi(self) -> "PadicScalar":
        return self.E(0, 1)

    def twist(self, t) -> "PadicScalar":
        return self.F(self.twist_int(Twist.parse(t)))

    def nu_scalar(self) -> "PadicScalar":
        return self.twist(self.nu)

    def sqrt_nu(self) -> "PadicScalar":
        """sqrt(nu): 1 or xi when nu is unramified, the tower generator otherwise."""
        if self.nu is Twist.ONE:
            return self.F(1)
        if self.nu is Twist.XI2:
            return self.xi()
        return PadicScalar.from_coords(self, Level.L, (0, 0, 1, 0))


def _to_padic_int(x: Fraction, p: int, shift: int, mod: int) -> int:
    """Residue of x * p**(-shift) modulo ``mod``; x * p**(-shift) must be integral."""
    x = Fraction(x)
    if x == 0:
        return 0
    num, den = x.numerator, x.denominator
    dv = vp(den, p)
    den //= p ** dv
    e = vp(num, p) - dv - shift
    if e < 0:
        raise ValueError("value is not integral after shift")
    num //= p ** vp(num, p)
    return num * p ** e * pow(den, -1, mod) % mod


@dataclass(frozen=True)
class PadicScalar:
    ctx: FieldContext
    level: Level
    exp: int
    coords: tuple
    prec: int
    exact_zero: bool = False

    # ------------------------------------------------------------ construction
    @classmethod
    def make(cls, ctx: FieldContext, level: Level, exp: int, coords: Sequence[int], prec: int) -> "PadicScalar":
        """Normalise so that some coordinate is a unit (or mark an inexact zero)."""
        p = ctx.p
        coords = tuple(coords) + (0,) * (4 - len(coords))
        if prec <= 0:
            return cls(ctx, level, exp + prec, (0, 0, 0, 0), 0)
        mod = p ** prec
        coords = tuple(c % mod for c in coords)
        nonzero = [c for c in coords if c]
        if not nonzero:
            return cls(ctx, level, exp + prec, (0, 0, 0, 0), 0)
        t = min(vp(c, p) for c in nonzero)
        if t:
            pt = p ** t
            coords = tuple(c // pt for c in coords)
            exp += t
            prec -= t
            mod = p ** prec
            coords = tuple(c % mod for c in coords)
        return cls(ctx, level, exp, coords, prec)

    @classmethod
    def from_rational(cls, ctx: FieldContext, value, precision: int | None = None) -> "PadicScalar":
        value = Fraction(value)
        if value == 0:
            return ctx.zero(Level.F)
        prec = ctx.precision if precision is None else precision
        e = vp_fraction(value, ctx.p)
        c = _to_padic_int(value, ctx.p, e, ctx.p ** prec)
        return cls.make(ctx, Level.F, e, (c,), prec)

    @classmethod
    def from_coords(cls, ctx: FieldContext, level: Level, values: Sequence, precision: int | None = None) -> "PadicScalar":
        """Build ``sum values[i] * basis[i]`` from rational coordinates."""
        values = [Fraction(v) for v in values] + [Fraction(0)] * (4 - len(values))
        if level is Level.L and not ctx.ramified:
            raise LevelError("tower level requires a ramified nu")
        if not any(values):
            return ctx.zero(level)
        prec = ctx.precision if precision is None else precision
        e = min(vp_fraction(v, ctx.p) for v in values if v)
        mod = ctx.p ** prec
        coords = tuple(_to_padic_int(v, ctx.p, e, mod) for v in values)
        return cls.make(ctx, level, e, coords, prec)

    # ------------------------------------------------------------ inspection
    @property
    def p(self) -> int:
        return self.ctx.p

    def is_zero(self) -> bool:
        """True for exact zero and for values with no certified digit."""
        return self.exact_zero or self.prec == 0

    @property
    def abs_prec(self) -> float:
        return float("inf") if self.exact_zero else self.exp + self.prec

    @property
    def known_digits(self) -> int:
        return 0 if self.exact_zero else self.prec

    @property
    def val2(self) -> int:
        if self.exact_zero:
            raise ZeroValuation("valuation of exact zero")
        if self.prec == 0:
            raise PrecisionExhausted(f"no certified digits below p^{self.exp}")
        c0, c1 = self.coords[0], self.coords[1]
        half = 1 if (c0 % self.p == 0 and c1 % self.p == 0) else 0
        return 2 * self.exp + half

    def valuation(self) -> Fraction:
        return Fraction(self.val2, 2)

    def _check(self, other: "PadicScalar"):
        if self.ctx.p != other.ctx.p:
            raise LevelError("scalars over different primes")
        if max(self.level, other.level) is Level.L and self.ctx.nu != other.ctx.nu:
            raise LevelError("tower scalars over different nu")

    # ------------------------------------------------------------ arithmetic
    def _addsub(self, other: "PadicScalar", sign: int) -> "PadicScalar":
        other = _coerce(self.ctx, other)
        self._check(other)
        level = max(self.level, other.level)
        ctx = self.ctx if self.level >= other.level else other.ctx
        if other.exact_zero:
            return replace(self, level=level, ctx=ctx)
        if self.exact_zero:
            return replace(other if sign > 0 else -other, level=level, ctx=ctx)
        e = min(self.exp, other.exp)
        a_abs = min(self.exp + self.prec, other.exp + other.prec)
        p = self.p
        sa, sb = p ** (self.exp - e), p ** (other.exp - e)
        coords = [x * sa + sign * y * sb for x, y in zip(self.coords, other.coords)]
        return PadicScalar.make(ctx, level, e, coords, a_abs - e)

    def __add__(self, other):
        return self._addsub(other, 1)

    def __radd__(self, other):
        return _coerce(self.ctx, other)._addsub(self, 1)

    def __sub__(self, other):
        return self._addsub(other, -1)

    def __rsub__(self, other):
        return _coerce(self.ctx, other)._addsub(self, -1)

    def __neg__(self):
        if self.exact_zero:
            return self
        mod = self.p ** self.prec if self.prec else 1
        return replace(self, coords=tuple((-c) % mod for c in self.coords))

    def __mul__(self, other):
        other = _coerce(self.ctx, other)
        self._check(other)
        level = max(self.level, other.level)
        ctx = self.ctx if self.level >= other.level else other.ctx
        if self.exact_zero or other.exact_zero:
            return ctx.zero(level)
        prec = min(self.prec, other.prec)
        eps = ctx.epsilon
        n = ctx.twist_int(ctx.nu) if level is Level.L else 0
        a0, a1, a2, a3 = self.coords
        b0, b1, b2, b3 = other.coords

        def emul(x0, x1, y0, y1):
            return x0 * y0 + eps * x1 * y1, x0 * y1 + x1 * y0

        r0, r1 = emul(a0, a1, b0, b1)
        if level is Level.L:
            t0, t1 = emul(a2, a3, b2, b3)
            u0, u1 = emul(a0, a1, b2, b3)
            w0, w1 = emul(a2, a3, b0, b1)
            coords = (r0 + n * t0, r1 + n * t1, u0 + w0, u1 + w1)
        else:
            coords = (r0, r1, 0, 0)
        return PadicScalar.make(ctx, level, self.exp + other.exp, coords, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicScalar":
        if self.exact_zero:
            raise DivisionByZero("inverse of exact zero")
        if self.prec == 0:
            raise PrecisionExhausted("inverse of a value with no certified digits")
        ctx, p = self.ctx, self.p
        mod = p ** self.prec
        c0, c1, c2, c3 = self.coords
        eps = ctx.epsilon
        if self.level is Level.F:
            return PadicScalar.make(ctx, Level.F, -self.exp, (pow(c0, -1, mod),), self.prec)
        if self.level is Level.E:
            nrm = (c0 * c0 - eps * c1 * c1) % mod
            ninv = pow(nrm, -1, mod)
            return PadicScalar.make(ctx, Level.E, -self.exp, (c0 * ninv, -c1 * ninv), self.prec)
        if c0 % p or c1 % p:
            # (alpha + beta s)^{-1} = (alpha - beta s) / (alpha^2 - nu beta^2)
            n = ctx.twist_int(ctx.nu)
            d0 = c0 * c0 + eps * c1 * c1 - n * (c2 * c2 + eps * c3 * c3)
            d1 = 2 * c0 * c1 - n * 2 * c2 * c3
            nrm = (d0 * d0 - eps * d1 * d1) % mod
            ninv = pow(nrm, -1, mod)
            i0, i1 = d0 * ninv, -d1 * ninv
            coords = (
                c0 * i0 + eps * c1 * i1,
                c0 * i1 + c1 * i0,
                -(c2 * i0 + eps * c3 * i1),
                -(c2 * i1 + c3 * i0),
            )
            return PadicScalar.make(ctx, Level.L, -self.exp, coords, self.prec)
        s = ctx.sqrt_nu()
        return (self * s).inverse() * s

    def __truediv__(self, other):
        other = _coerce(self.ctx, other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(self.ctx, other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ctx.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # ------------------------------------------------------------ conjugations
    def conj_theta(self) -> "PadicScalar":
        if self.exact_zero or self.level is Level.F:
            return self
        mod = self.p ** self.prec if self.prec else 1
        c0, c1, c2, c3 = self.coords
        return replace(self, coords=(c0, (-c1) % mod, c2, (-c3) % mod))

    def conj_tower(self) -> "PadicScalar":
        if self.exact_zero or self.level is not Level.L:
            return self
        mod = self.p ** self.prec if self.prec else 1
        c0, c1, c2, c3 = self.coords
        return replace(self, coords=(c0, c1, (-c2) % mod, (-c3) % mod))

    def norm(self) -> "PadicScalar":
        """N_{E/F}; for tower scalars the result stays in E(sqrt nu) fixed by theta."""
        result = self * self.conj_theta()
        return result.to_level(Level.F) if self.level <= Level.E else result

    def trace(self) -> "PadicScalar":
        result = self + self.conj_theta()
        return result.to_level(Level.F) if self.level <= Level.E else result

    # ------------------------------------------------------------ levels
    def to_level(self, level: Level) -> "PadicScalar":
        """Demote (after certifying the dropped coordinates vanish) or promote."""
        if level >= self.level:
            if level is Level.L and not self.ctx.ramified:
                raise LevelError("tower level requires a ramified nu")
            return replace(self, level=level)
        if self.exact_zero:
            return replace(self, level=level)
        keep = {Level.F: 1, Level.E: 2}[level]
        if any(c for c in self.coords[keep:]):
            raise LevelError(f"value does not lie in {level.name}")
        return replace(self, level=level)

    def coordinate(self, i: int) -> "PadicScalar":
        """The i-th F-coordinate (basis 1, xi, s, xi*s) as an F scalar."""
        if self.exact_zero:
            return self.ctx.zero()
        return PadicScalar.make(self.ctx, Level.F, self.exp, (self.coords[i],), self.prec)

    def coordinate_residue(self, i: int, shift: int) -> int:
        """Coordinate i times p**shift reduced mod p**(abs_prec+shift); an integer representative."""
        if self.exact_zero:
            return 0
        return self.coords[i] * self.p ** (self.exp + shift)

    # ------------------------------------------------------------ predicates
    def agrees(self, other) -> bool:
        """Certified equality: the difference has no nonzero certified digit."""
        return (self - other).is_zero()

    def leading_coeff(self):
        return leading_coeff(self)

    def to_fraction(self) -> Fraction:
        """A rational representative (F level only)."""
        if self.level is not Level.F:
            raise LevelError("rational representative only defined on F")
        if self.exact_zero:
            return Fraction(0)
        return Fraction(self.coords[0]) * Fraction(self.p) ** self.exp

    def __repr__(self) -> str:
        if self.exact_zero:
            return "PadicScalar(0)"
        if self.prec == 0:
            return f"PadicScalar({self.level.name}, O({self.p}^{self.exp}))"
        names = ("", "xi", "s", "xi*s")
        n = {Level.F: 1, Level.E: 2, Level.L: 4}[self.level]
        terms = [f"{c}{'*' + nm if nm else ''}" for c, nm in zip(self.coords[:n], names) if c]
        return (f"PadicScalar({self.level.name}, {self.p}^{self.exp}*({' + '.join(terms)})"
                f" + O({self.p}^{self.exp + self.prec}))")

    # ------------------------------------------------------------ serialisation
    def to_json(self) -> dict:
        """Little-endian base-p digits of each unit coordinate, doubled valuation, level."""
        n = {Level.F: 1, Level.E: 2, Level.L: 4}[self.level]
        if self.exact_zero:
            return {"level": self.level.name, "zero": "exact"}
        digits = []
        for c in self.coords[:n]:
            ds = []
            for _ in range(self.prec):
                c, d = divmod(c, self.p)
                ds.append(d)
            digits.append(ds)
        out = {"level": self.level.name, "exp": self.exp, "prec": self.prec, "digits": digits}
        if self.prec:
            out["val2"] = self.val2
        else:
            out["zero"] = "inexact"
        return out

    @classmethod
    def from_json(cls, ctx: FieldContext, data: dict) -> "PadicScalar":
        level = Level[data["level"]]
        if data.get("zero") == "exact":
            return ctx.zero(level)
        coords = []
        for ds in data["digits"]:
            coords.append(sum(d * ctx.p ** i for i, d in enumerate(ds)))
        return cls.make(ctx, level, data["exp"], coords, data["prec"])


def _coerce(ctx: FieldContext, value) -> PadicScalar:
    if isinstance(value, PadicScalar):
        return value
    if isinstance(value, (int, Fraction)):
        return ctx.F(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to PadicScalar")


# ---------------------------------------------------------------- operations

def arith(a: PadicScalar, b: PadicScalar, op: str) -> PadicScalar:
    """Checked field operation: raises instead of returning an uncertified zero."""
    if op == "div":
        if b.exact_zero:
            raise DivisionByZero("division by exact zero")
        result = a / b
    elif op == "add":
        result = a + b
    elif op == "sub":
        result = a - b
    elif op == "mul":
        result = a * b
    else:
        raise ValueError(f"unknown op {op!r}")
    if result.prec == 0 and not result.exact_zero:
        raise PrecisionExhausted(f"{op} cancelled every certified digit")
    return result


def valuation(a: PadicScalar) -> Fraction:
    return a.valuation()


def leading_coeff(a: PadicScalar):
    """Residue-field image of pi^{-v(a)} a: an int mod p on F, a pair on E."""
    if a.level is Level.L:
        raise LevelError("leading coefficient is defined on F and E")
    a.val2  # raises on zero
    if a.level is Level.F:
        return a.coords[0] % a.p
    return (a.coords[0] % a.p, a.coords[1] % a.p)


def conj_theta(a: PadicScalar) -> PadicScalar:
    return a.conj_theta()


def conj_tower(a: PadicScalar) -> PadicScalar:
    return a.conj_tower()


def _as_f(a: PadicScalar) -> PadicScalar:
    return a if a.level is Level.F else a.to_level(Level.F)


def quad_symbol(a: PadicScalar) -> int:
    """+1 iff a is a nonzero square of F, -1 otherwise (p odd, Hensel)."""
    a = _as_f(a)
    v2 = a.val2
    if v2 % 4:
        return -1
    return legendre(a.coords[0], a.p)


def square_class(a: PadicScalar) -> Twist:
    """Image of a in F^x / (F^x)^2 = {1, xi^2, pi, xi^2 pi}."""
    a = _as_f(a)
    v = a.val2 // 2
    return Twist((0 if legendre(a.coords[0], a.p) == 1 else 1, v % 2))


def hensel_sqrt(a: PadicScalar) -> PadicScalar:
    """Square root with leading coefficient in 1..(p-1)/2, lifted by Newton steps."""
    a = _as_f(a)
    if quad_symbol(a) != 1:
        raise NotASquare(f"{a!r} is not a square in F")
    p, prec = a.p, a.prec
    u = a.coords[0]
    r = sqrt_mod_prime(u, p)
    if r > (p - 1) // 2:
        r = p - r
    k = 1
    while k < prec:
        k = min(2 * k, prec)
        mod = p ** k
        r = (r - (r * r - u) * pow(2 * r, -1, mod)) % mod
    return PadicScalar.make(a.ctx, Level.F, a.exp // 2, (r,), prec)


def count_congruence(a: PadicScalar, l: int, depth: int) -> int:
    """Number of residues x mod p^depth with v(x^2 - a^2) >= l, by enumeration."""
    if depth < l or l < 0:
        raise ValueError("need 0 <= l <= depth")
    p = a.p
    if l == 0:
        return p ** depth
    a = _as_f(a)
    if a.exact_zero:
        a_int = 0
    else:
        if a.exp < 0:
            return 0  # v(x^2 - a^2) = 2 v(a) < 0
        if a.abs_prec < l:
            raise PrecisionExhausted("a is not known modulo p^l")
        a_int = a.coords[0] * p ** a.exp
    mod = p ** l
    target = a_int * a_int % mod
    return sum(1 for x in range(p ** depth) if (x * x - target) % mod == 0)


def count_congruence_closed(a: PadicScalar, l: int, depth: int) -> int:
    """The same count from the two-coset description, valid for a != 0 and
    2 v(a) < l <= depth: x = +-a mod p^(l - v(a))."""
    va = _as_f(a).valuation()
    if a.exact_zero or not 2 * va < l <= depth:
        raise ValueError("needs a != 0 and 2 v(a) < l <= depth")
    return 2 * a.p ** (depth - (l - int(va)))


def random_unit_int(rng, p: int, digits: int) -> int:
    """A random integer of ``digits`` base-p digits that is a p-adic unit."""
    while True:
        n = rng.randrange(p ** digits)
        if n % p:
            return n


def ints_to_scalars(ctx: FieldContext, values: Iterable) -> list:
    return [ctx.F(v) for v in values]
