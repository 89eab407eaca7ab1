"""Seeded construction of regular points with prescribed stable-orbit invariants.

Norm-one elements are produced through U(a, b) = (a + b xi) / (a - b xi), so that
U(a, b1) - U(a, b3) has valuation v(b1 - b3) whenever a is a unit.  Every
target is reached constructively; rejection is only used to avoid accidental
coincidences (for instance a congruence that pushes a valuation up).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import NotASquare, NotRegular, PrecisionExhausted, TargetUnreachable
from .orbits import SymmetricPoint, TorusType, invariants
from .padic import FieldContext, Level, PadicScalar, Twist, hensel_sqrt, quad_symbol

MAX_TRIES = 200


@dataclass(frozen=True)
class SampleSpec:
    """What to sample.

    ``target_M12``/``target_M13``/``target_M23`` are optional; ``x_zero`` asks
    for a point with x = 0; ``scale`` multiplies lambda_1 by p^scale (type I
    only), which makes eigenvalues non-integral.  For type III ``nu`` picks
    between pi and xi^2*pi.
    """

    gamma_type: TorusType
    p: int
    target_M12: Optional[Fraction] = None
    target_M13: Optional[Fraction] = None
    seed: int = 0
    precision: int = 64
    target_M23: Optional[Fraction] = None
    x_zero: bool = False
    scale: int = 0
    nu: Optional[Twist] = None

    def __post_init__(self):
        object.__setattr__(self, "gamma_type", TorusType(str(self.gamma_type)))
        for name in ("target_M12", "target_M13", "target_M23"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, Fraction(v))
        if self.gamma_type is TorusType.III:
            if self.target_M13 is not None and self.target_M13.denominator != 2:
                raise ValueError("type III needs M13 in Z + 1/2")
            if self.x_zero:
                raise ValueError("x = 0 does not occur for ramified nu")
        if self.gamma_type in (TorusType.I, TorusType.III):
            if self.target_M23 is not None and self.target_M12 is not None \
                    and self.target_M23 != self.target_M12:
                raise ValueError("types I and III force M12 = M23")
        if self.scale and self.gamma_type is not TorusType.I:
            raise ValueError("non-integral eigenvalues only occur in type I")

    @property
    def torus_nu(self) -> Twist:
        if self.gamma_type is TorusType.I:
            return Twist.XI2
        if self.gamma_type is TorusType.II:
            return Twist.ONE
        return Twist.parse(self.nu) if self.nu is not None else Twist.PI

    def rng(self) -> random.Random:
        key = (f"{self.gamma_type.value}|{self.p}|{self.target_M12}|{self.target_M13}|"
               f"{self.target_M23}|{self.x_zero}|{self.scale}|{self.torus_nu.label}|{self.seed}")
        return random.Random(key)


def _unit(rng, p, digits=12) -> int:
    while True:
        n = rng.randrange(1, p ** digits)
        if n % p:
            return n


def _U(ctx: FieldContext, a, b) -> PadicScalar:
    num = ctx.E(a, b)
    return num / num.conj_theta()


def _int(v) -> int:
    v = Fraction(v)
    if v.denominator != 1:
        raise ValueError(f"expected an integer target, got {v}")
    return int(v)


def _type2(spec: SampleSpec, ctx: FieldContext, rng):
    p = ctx.p
    z = _U(ctx, _unit(rng, p), rng.randrange(p ** 8))
    if spec.x_zero:
        y = z * _U(ctx, _unit(rng, p), rng.randrange(p ** 8))
        M12 = spec.target_M12
        M23 = spec.target_M23
        if M12 is not None and M12 > 0:
            y = z * _U(ctx, _unit(rng, p), p ** _int(M12) * _unit(rng, p))
        elif M23 is not None and M23 > 0:
            y = -z * _U(ctx, _unit(rng, p), p ** _int(M23) * _unit(rng, p))
        else:
            # keep y away from +-z
            while (y - z).valuation() > 0 or (y + z).valuation() > 0:
                y = z * _U(ctx, _unit(rng, p), _unit(rng, p))
        return ctx.zero(Level.E), y, z
    M13 = spec.target_M13
    M12 = spec.target_M12
    M23 = spec.target_M23
    if M13 is None:
        M13 = Fraction(rng.randrange(0, 4))
    if M12 is None and M23 is None:
        M12 = Fraction(rng.randrange(0, int(M13) + 1))
    if M12 is None:
        M12 = M13 if M23 > M13 else (M23 if M23 < M13 else Fraction(rng.randrange(int(M13), int(M13) + 3)))
    if M23 is None:
        M23 = M13 if M12 > M13 else (M12 if M12 < M13 else Fraction(rng.randrange(int(M13), int(M13) + 3)))
    vals = sorted([M12, M13, M23])
    if vals[0] != vals[1]:
        raise TargetUnreachable("the two smallest of M12, M13, M23 must agree")
    M12, M13, M23 = _int(M12), _int(M13), _int(M23)
    a = _unit(rng, p)
    b1 = p ** M12 * _unit(rng, p)
    if M12 == M23:
        while True:
            b3 = b1 - p ** M13 * _unit(rng, p)
            if b3 and _vp(b3, p) == M23:
                break
    else:
        b3 = p ** M23 * _unit(rng, p)
    l1 = z * _U(ctx, a, b1)
    l3 = z * _U(ctx, a, b3)
    return (l1 + l3) / 2, (l1 - l3) / 2, z


def _vp(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _type1(spec: SampleSpec, ctx: FieldContext, rng):
    p, eps = ctx.p, ctx.epsilon
    z = _U(ctx, _unit(rng, p), rng.randrange(p ** 8))
    if spec.x_zero:
        # lambda_1 = xi*y with eps*N(y) = 1
        while True:
            y2 = rng.randrange(p ** 12)
            rhs = ctx.F(Fraction(1, eps) + eps * y2 * y2)
            if quad_symbol(rhs) == 1:
                break
        y = ctx.E(0, y2) + hensel_sqrt(rhs)
        return ctx.zero(Level.E), y, z
    M13 = spec.target_M13
    M12 = spec.target_M12
    if M12 is None and spec.target_M23 is not None:
        M12 = spec.target_M23
    if M13 is None:
        M13 = Fraction(rng.randrange(0, 4)) if M12 is None else M12 + rng.randrange(0, 3)
    if M12 is None:
        M12 = Fraction(rng.randrange(0, int(M13) + 1))
    M12, M13 = _int(M12), _int(M13)
    if M12 > M13:
        raise TargetUnreachable("type I forces M13 >= M12")
    if M12 == 0 and M13 == 0:
        pass
    for _ in range(MAX_TRIES):
        if M13 == 0:
            n = _unit(rng, p)
            if (n - 1) % p == 0:
                continue
        else:
            n = 1 + p ** M13 * _unit(rng, p)
        b = p ** M12 * _unit(rng, p) if M12 > 0 else _unit(rng, p)
        rhs = ctx.F(n + eps * b * b)
        if quad_symbol(rhs) != 1:
            continue
        a = hensel_sqrt(rhs)
        if M12 == 0:
            # with b a unit, pick the sign of a at random; M12 = 0 needs omega - 1 a unit
            if rng.randrange(2):
                a = -a
        else:
            if not (a - 1).valuation() > 0:
                a = -a
        omega = a + ctx.E(0, b)
        if M12 == 0 and (omega - 1).valuation() != 0:
            continue
        l1 = z * omega
        if spec.scale:
            l1 = l1 * Fraction(p) ** spec.scale
        l3 = l1.conj_theta().inverse()
        xi = ctx.xi()
        return (l1 + l3) / 2, (l1 - l3) / (2 * xi), z
    raise TargetUnreachable(f"no type I sample for M12={M12}, M13={M13}")


def _type3(spec: SampleSpec, ctx: FieldContext, rng):
    p = ctx.p
    M13 = spec.target_M13
    M12 = spec.target_M12
    if M13 is None:
        M13 = Fraction(2 * rng.randrange(0, 4) + 1, 2)
    j = int(M13 - Fraction(1, 2))
    if M12 is None:
        M12 = Fraction(rng.randrange(0, j + 1))
    if M12 != M13 and (M12.denominator != 1 or M12 > j):
        raise TargetUnreachable("type III needs M12 <= M13 - 1/2 or M12 = M13")
    s = ctx.sqrt_nu()
    for _ in range(MAX_TRIES):
        beta = ctx.E(rng.randrange(p ** 8), _unit(rng, p)) * p ** j
        w = 1 + beta * s
        l1 = w / w.conj_theta()
        l3 = l1.conj_tower()
        x = ((l1 + l3) / 2).to_level(Level.E)
        y = ((l1 - l3) / (2 * s)).to_level(Level.E)
        nx = x.norm()
        if quad_symbol(nx) != 1:
            continue
        z0 = x / hensel_sqrt(nx)
        if M12 == M13:
            vb = j + 1 + rng.randrange(0, 2)
        else:
            vb = int(M12)
        b = p ** vb * _unit(rng, p)
        z = z0 * _U(ctx, _unit(rng, p), b)
        return x, y, z
    raise TargetUnreachable("no type III sample")


def sample_gamma(spec: SampleSpec) -> SymmetricPoint:
    rng = spec.rng()
    nu = spec.torus_nu
    precision = spec.precision
    for attempt in range(2):
        ctx = FieldContext(spec.p, precision, nu)
        try:
            for _ in range(MAX_TRIES):
                if spec.gamma_type is TorusType.I:
                    x, y, z = _type1(spec, ctx, rng)
                elif spec.gamma_type is TorusType.II:
                    x, y, z = _type2(spec, ctx, rng)
                else:
                    x, y, z = _type3(spec, ctx, rng)
                gamma = SymmetricPoint(x, y, z, nu)
                try:
                    inv = invariants(gamma)
                except NotRegular:
                    continue
                if _hits(spec, inv):
                    return gamma
            raise TargetUnreachable(f"could not reach targets of {spec}")
        except PrecisionExhausted:
            precision *= 2
            rng = spec.rng()
    raise PrecisionExhausted(f"sampling {spec} exhausted precision twice")


def _hits(spec: SampleSpec, inv) -> bool:
    if spec.scale:
        return True
    if spec.target_M12 is not None and inv.M12 != spec.target_M12:
        return False
    if spec.target_M13 is not None and not spec.x_zero and inv.M13 != spec.target_M13:
        return False
    if spec.target_M23 is not None and inv.M23 != spec.target_M23:
        return False
    return True
