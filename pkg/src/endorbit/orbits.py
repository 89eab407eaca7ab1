"""Points of the split tori T_nu inside the symmetric space, their stable-orbit
invariants, and the rational orbits inside a stable orbit."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

from .errors import InvalidNu, NotRegular, PrecisionExhausted, ZeroValuation
from .padic import FieldContext, Level, PadicScalar, Twist, quad_symbol, square_class, hensel_sqrt


class TorusType(Enum):
    I = "I"
    II = "II"
    III = "III"

    def __str__(self):
        return self.value


def classify_torus(nu) -> TorusType:
    try:
        nu = Twist.parse(nu)
    except ValueError:
        raise InvalidNu(f"unknown torus parameter {nu!r}") from None
    if nu is Twist.XI2:
        return TorusType.I
    if nu is Twist.ONE:
        return TorusType.II
    return TorusType.III


def prefactor(gamma_type: TorusType) -> Fraction:
    """1/#G_{1gamma}(F), shared by the closed forms and both oracles."""
    return Fraction(1, 2) if gamma_type is TorusType.I else Fraction(1, 4)


@dataclass(frozen=True)
class SymmetricPoint:
    """gamma_mu = [[x, 0, mu*y], [0, z, 0], [nu*y/mu, 0, x]] with x, y, z in E."""

    x: PadicScalar
    y: PadicScalar
    z: PadicScalar
    nu: Twist
    mu: Twist = Twist.ONE

    def __post_init__(self):
        object.__setattr__(self, "nu", Twist.parse(self.nu))
        object.__setattr__(self, "mu", Twist.parse(self.mu))
        ctx = self.x.ctx
        if ctx.nu is not self.nu:
            raise InvalidNu(f"scalars built for nu={ctx.nu}, point has nu={self.nu}")
        for c in (self.x, self.y, self.z):
            if c.level is Level.L:
                raise ValueError("coordinates of a point must lie in E")

    @property
    def ctx(self) -> FieldContext:
        return self.x.ctx

    @property
    def gamma_type(self) -> TorusType:
        return classify_torus(self.nu)

    @property
    def x_is_zero(self) -> bool:
        return self.x.exact_zero

    def matrix(self):
        ctx = self.ctx
        zero = ctx.zero(Level.E)
        mu = ctx.twist(self.mu)
        nu = ctx.nu_scalar()
        return [
            [self.x, zero, mu * self.y],
            [zero, self.z, zero],
            [nu * self.y / mu, zero, self.x],
        ]

    def unitarity_defects(self):
        """N(x) + nu N(y) - 1, Tr(x conj(y)) and N(z) - 1; all vanish on T_nu(F)."""
        nu = self.ctx.nu_scalar()
        x, y, z = self.x, self.y, self.z
        return (
            x.norm() + nu * y.norm() - 1,
            (x * y.conj_theta()).trace(),
            z.norm() - 1,
        )

    def is_unitary(self) -> bool:
        return all(d.is_zero() for d in self.unitarity_defects())

    def with_mu(self, mu) -> "SymmetricPoint":
        return replace(self, mu=Twist.parse(mu))

    def to_json(self) -> dict:
        return {
            "p": self.ctx.p,
            "precision": self.ctx.precision,
            "nu": self.nu.label,
            "mu": self.mu.label,
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "z": self.z.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SymmetricPoint":
        ctx = FieldContext(data["p"], data.get("precision", 64), Twist.parse(data["nu"]))
        x, y, z = (PadicScalar.from_json(ctx, data[k]) for k in ("x", "y", "z"))
        return cls(x, y, z, ctx.nu, Twist.parse(data.get("mu", "1")))


def eigenvalues(gamma: SymmetricPoint):
    """(x + sqrt(nu) y, z, x - sqrt(nu) y), in the tower for ramified nu."""
    s = gamma.ctx.sqrt_nu()
    sy = s * gamma.y
    return gamma.x + sy, gamma.z, gamma.x - sy


def _val(a: PadicScalar, what: str) -> Fraction:
    if a.exact_zero:
        raise NotRegular(f"{what} vanishes")
    if a.prec == 0:
        raise NotRegular(f"{what} vanishes at certified precision")
    return a.valuation()


def _symbol_or_none(a: PadicScalar) -> Optional[int]:
    try:
        return quad_symbol(a)
    except ZeroValuation:
        return None


def _class_or_none(a: PadicScalar) -> Optional[Twist]:
    try:
        return square_class(a)
    except ZeroValuation:
        return None


@dataclass(frozen=True)
class OrbitInvariants:
    gamma_type: TorusType
    q: int
    nu: Twist
    M12: Fraction
    M13: Fraction
    M23: Fraction
    N12: Fraction
    N13: Optional[Fraction]
    N23: Fraction
    v_x: Optional[Fraction]
    v_y: Fraction
    z_x: Optional[PadicScalar]
    z_y: Optional[PadicScalar]
    x_is_zero: bool
    symbol_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def Ms(self):
        return self.M12, self.M13, self.M23

    @property
    def Ns(self):
        return tuple(n for n in (self.N12, self.N13, self.N23) if n is not None)

    def has_negative(self) -> bool:
        return any(v < 0 for v in self.Ms + self.Ns)

    def symbol(self, *key):
        from .errors import MissingSymbol
        try:
            value = self.symbol_cache[key]
        except KeyError:
            raise MissingSymbol(key) from None
        if value is None:
            raise MissingSymbol(key)
        return value

    def to_json(self) -> dict:
        def d(v):
            return None if v is None else int(2 * v)

        return {
            "type": self.gamma_type.value,
            "q": self.q,
            "nu": self.nu.label,
            "M12_2": d(self.M12), "M13_2": d(self.M13), "M23_2": d(self.M23),
            "N12_2": d(self.N12), "N13_2": d(self.N13), "N23_2": d(self.N23),
            "vx_2": d(self.v_x), "vy_2": d(self.v_y),
            "x_is_zero": self.x_is_zero,
            "symbols": {"|".join(str(k) for k in key): (str(v) if isinstance(v, Twist) else v)
                        for key, v in sorted(self.symbol_cache.items(), key=lambda kv: str(kv[0]))},
        }


MU_CLASSES = (Twist.ONE, Twist.XI2, Twist.PI, Twist.XI2PI)


def _build_symbols(ctx: FieldContext, nu: Twist, z_y: Optional[PadicScalar]) -> dict:
    cache = {("2",): quad_symbol(ctx.F(2)), ("-2",): quad_symbol(ctx.F(-2))}
    nu_s = ctx.nu_scalar()
    for mu in MU_CLASSES:
        m = ctx.twist(mu)
        cache[("2mu", mu)] = quad_symbol(2 * m)
        cache[("-2mu", mu)] = quad_symbol(-2 * m)
    if z_y is None:
        return cache
    d = z_y * z_y - nu_s.to_level(Level.F)
    cache[("zy^2-nu",)] = _symbol_or_none(d)
    cache[("class", "-zy")] = _class_or_none(-z_y)
    for mu in MU_CLASSES:
        m = ctx.twist(mu)
        cache[("-mu*zy", mu)] = _symbol_or_none(-m * z_y)
        cache[("-mu*nu*zy", mu)] = _symbol_or_none(-m * nu_s * z_y)
    if nu is Twist.ONE:
        # -2(z_y + sqrt(z_y^2 - 1)) only makes sense when z_y^2 - 1 is a square
        if cache[("zy^2-nu",)] == 1:
            r = hensel_sqrt(d)
            w = -2 * (z_y + r)
            cache[("class", "-2(zy+r)")] = _class_or_none(w)
            for mu in MU_CLASSES:
                cache[("-2mu*(zy+r)", mu)] = _symbol_or_none(ctx.twist(mu) * w)
        else:
            cache[("class", "-2(zy+r)")] = None
            for mu in MU_CLASSES:
                cache[("-2mu*(zy+r)", mu)] = None
    return cache


def invariants(gamma: SymmetricPoint) -> OrbitInvariants:
    ctx = gamma.ctx
    if gamma.y.exact_zero or gamma.y.prec == 0:
        raise NotRegular("y = 0")
    l1, l2, l3 = eigenvalues(gamma)
    M12 = _val(l1 - l2, "lambda1 - lambda2")
    M13 = _val(l1 - l3, "lambda1 - lambda3")
    M23 = _val(l2 - l3, "lambda2 - lambda3")
    N12 = _val(l1 + l2, "lambda1 + lambda2")
    N23 = _val(l2 + l3, "lambda2 + lambda3")
    v_y = gamma.y.valuation()
    nu_s = ctx.nu_scalar()
    if gamma.x_is_zero:
        N13 = v_x = z_x = z_y = None
    else:
        if gamma.x.prec == 0:
            raise PrecisionExhausted("x is not certified nonzero")
        N13 = gamma.x.valuation()
        v_x = N13
        x, y, z = gamma.x, gamma.y, gamma.z
        x2, ny2, z2 = x * x, nu_s * y * y, z * z
        z_x = ((x2 - ny2 + z2) / (2 * x * z)).to_level(Level.F)
        z_y = ((ny2 - x2 + z2) / (2 * y * z)).to_level(Level.F)
    return OrbitInvariants(
        gamma_type=gamma.gamma_type,
        q=ctx.p,
        nu=gamma.nu,
        M12=M12, M13=M13, M23=M23,
        N12=N12, N13=N13, N23=N23,
        v_x=v_x, v_y=v_y,
        z_x=z_x, z_y=z_y,
        x_is_zero=gamma.x_is_zero,
        symbol_cache=_build_symbols(ctx, gamma.nu, z_y),
    )


def z_decomposition_linear(gamma: SymmetricPoint):
    """z_x, z_y from the 2x2 system z = z_x x + z_y y in F-coordinates (test oracle)."""
    x, y, z = gamma.x, gamma.y, gamma.z
    x1, x2 = x.coordinate(0), x.coordinate(1)
    y1, y2 = y.coordinate(0), y.coordinate(1)
    z1, z2 = z.coordinate(0), z.coordinate(1)
    det = x1 * y2 - x2 * y1
    return (z1 * y2 - z2 * y1) / det, (z2 * x1 - z1 * x2) / det


# ---------------------------------------------------------------- endoscopy

@dataclass(frozen=True)
class EndoscopicGroup:
    gamma_type: TorusType

    @property
    def elements(self):
        if self.gamma_type is TorusType.I:
            return (Twist.ONE, Twist.PI)
        return MU_CLASSES

    @property
    def order(self) -> int:
        return len(self.elements)

    def multiply(self, a: Twist, b: Twist) -> Twist:
        c = a.times(b)
        if c not in self.elements:
            raise ValueError(f"{c} is not an element of D_gamma")
        return c

    def table(self):
        return {(a, b): self.multiply(a, b) for a in self.elements for b in self.elements}

    def class_of(self, a: PadicScalar) -> Twist:
        """[a]: parity of v(a), plus the square class of the unit part for |D| = 4."""
        cls = square_class(a)
        if self.gamma_type is TorusType.I:
            return Twist((0, cls.pi_bit))
        return cls

    def characters(self, include_trivial: bool = False):
        chars = [KappaCharacter(self, None)] if include_trivial else []
        if self.gamma_type is TorusType.I:
            chars.append(KappaCharacter(self, Twist.ONE))
        else:
            chars.extend(KappaCharacter(self, s) for s in (Twist.XI2, Twist.PI, Twist.XI2PI))
        return chars


@dataclass(frozen=True)
class KappaCharacter:
    """kappa_s: the nontrivial character with kappa_s(s) = 1 (label None is trivial).

    For the order-2 group of type I the only nontrivial character is labelled by 1.
    """

    group: EndoscopicGroup
    label: Optional[Twist]

    @property
    def trivial(self) -> bool:
        return self.label is None

    @property
    def name(self) -> str:
        if self.label is None:
            return "1"
        if self.group.gamma_type is TorusType.I:
            return "kappa1"
        return f"kappa_{self.label.label}"

    def __call__(self, a) -> int:
        return kappa_value(self, a)

    def table(self):
        return {a: self(a) for a in self.group.elements}


def kappa_value(kappa: KappaCharacter, a) -> int:
    if isinstance(a, PadicScalar):
        a = kappa.group.class_of(a)
    a = Twist.parse(a)
    if a not in kappa.group.elements:
        raise ValueError(f"{a} is not an element of D_gamma")
    if kappa.label is None:
        return 1
    return 1 if a in (Twist.ONE, kappa.label) else -1


def delta_N(N, a) -> int:
    """1 iff N + v(a) is even."""
    N = Fraction(N)
    if N.denominator != 1:
        raise ValueError(f"delta_N needs an integer N, got {N}")
    return 1 if (int(N) + Twist.parse(a).pi_bit) % 2 == 0 else 0


def rational_representatives(gamma: SymmetricPoint):
    group = EndoscopicGroup(gamma.gamma_type)
    return [gamma.with_mu(mu) for mu in group.elements]
