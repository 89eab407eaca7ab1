"""Closed-form values of O_{gamma_mu}(1_{S(O_F)}) and of the kappa-orbital sums,
dispatched on the stable-orbit invariants."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from .errors import CorollaryMismatch, InvalidNu, NegativeInvariant
from .orbits import (
    EndoscopicGroup,
    KappaCharacter,
    OrbitInvariants,
    TorusType,
    delta_N,
    prefactor,
)
from .padic import Twist

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


class Case(Enum):
    I_1 = "I.1"
    I_2 = "I.2"
    I_3 = "I.3"
    I_4 = "I.4"
    II_1 = "II.1"
    II_2 = "II.2"
    II_3 = "II.3"
    II_4_12 = "II.4(M12>M13)"
    II_4_23 = "II.4(M23>M13)"
    II_5 = "II.5"
    III_1 = "III.1"
    III_2 = "III.2"
    III_3 = "III.3"
    III_4 = "III.4"
    III_5 = "III.5"
    X0_I = "X0.I"
    X0_II = "X0.II"


@dataclass(frozen=True)
class CaseTag:
    gamma_type: TorusType
    case: Case

    @property
    def case_id(self) -> str:
        return self.case.value

    def __str__(self):
        return self.case.value


def dispatch_case(inv: OrbitInvariants) -> CaseTag:
    if inv.has_negative():
        raise NegativeInvariant(f"negative invariant in {inv.Ms + inv.Ns}")
    t = inv.gamma_type
    M12, M13, M23 = inv.Ms
    if inv.x_is_zero:
        if t is TorusType.I:
            return CaseTag(t, Case.X0_I)
        if t is TorusType.II:
            return CaseTag(t, Case.X0_II)
        raise InvalidNu("x = 0 is impossible for ramified nu")
    if t is TorusType.I:
        if M13 == 0:
            case = Case.I_1
        elif M12 == 0:
            case = Case.I_2
        elif M13 > M12:
            case = Case.I_3
        elif M12 == M13 == M23:
            case = Case.I_4
        else:
            raise ValueError(f"type I invariants out of range: {inv.Ms}")
    elif t is TorusType.II:
        if M13 == 0:
            case = Case.II_1
        elif M12 == 0:
            case = Case.II_2
        elif M13 > M12:
            case = Case.II_3
        elif M12 > M13:
            case = Case.II_4_12
        elif M23 > M13:
            case = Case.II_4_23
        else:
            case = Case.II_5
    else:
        if M13 == HALF:
            case = Case.III_1
        elif M12 == 0:
            case = Case.III_2
        elif M13 > M12 + HALF:
            case = Case.III_3
        elif M13 == M12 + HALF:
            case = Case.III_4
        elif M12 == M13 == M23:
            case = Case.III_5
        else:
            raise ValueError(f"type III invariants out of range: {inv.Ms}")
    return CaseTag(t, case)


def _geo(q: int, n) -> Fraction:
    """(q^n - 1)/(q - 1) = 1 + q + ... + q^(n-1)."""
    n = int(n)
    return Fraction(q ** n - 1, q - 1)


def _ceil_half(v) -> int:
    return math.ceil(Fraction(v) / 2)


def _floor_half(v) -> int:
    return math.floor(Fraction(v) / 2)


def eval_orbital(inv: OrbitInvariants, mu, amended: bool = False) -> Fraction:
    """Closed form for O_{gamma_mu}.

    With ``amended`` the trailing delta - 1 terms of cases I.3, I.4, II.3, II.4, II.5
    carry the factor q^floor(M/2) and case III.4 uses delta_{M12}(1) q^floor(M12/2);
    these are the forms the lattice oracles reproduce.  The default is verbatim.
    """
    mu = Twist.parse(mu)
    if inv.has_negative():
        return Fraction(0)
    if inv.x_is_zero:
        return eval_orbital_x_zero(inv, mu)
    tag = dispatch_case(inv)
    q = inv.q
    M12, M13, M23 = inv.Ms
    d = delta_N
    c = tag.case

    if c is Case.I_1:
        return HALF * d(0, mu)
    if c is Case.I_2:
        return HALF * (M13 + d(M13, mu))
    if c is Case.I_3:
        tail = (d(M13, mu) - 1) * (q ** _floor_half(M12) if amended else 1)
        return HALF * ((M13 - M12 + d(M12, Twist.ONE)) * q ** _floor_half(M12)
                       + 2 * (1 + d(M12 - M13, mu)) * _geo(q, _ceil_half(M12))
                       + tail)
    if c is Case.I_4:
        S = inv.symbol("zy^2-nu")
        tail = (d(M12, mu) - 1) * (q ** _floor_half(M12) if amended else 1)
        return HALF * (((1 + S) * (1 - mu.valuation) + 2) * _geo(q, _ceil_half(M12))
                       + d(M12, Twist.ONE) * q ** _floor_half(M12) + tail)

    if c is Case.II_1:
        return QUARTER * ((1 + inv.symbol("2mu", mu)) * _floor_half(M23)
                          + (1 + inv.symbol("-2mu", mu)) * _floor_half(M12) + d(0, mu))
    if c is Case.II_2:
        return QUARTER * (M13 + d(M13, mu))
    if c is Case.II_3:
        return QUARTER * ((4 + 2 * inv.symbol("-mu*zy", mu)) * _geo(q, _ceil_half(M12))
                          + (M13 - M12 + d(M12, Twist.ONE)) * q ** _floor_half(M12)
                          + (d(M13, mu) - 1) * (q ** _floor_half(M12) if amended else 1))
    if c in (Case.II_4_12, Case.II_4_23):
        if c is Case.II_4_12:
            A, big = inv.symbol("-2mu", mu), M12
        else:
            A, big = inv.symbol("2mu", mu), M23
        S = inv.symbol("zy^2-nu")
        qf = q ** _floor_half(M13)
        return QUARTER * ((S + 1) * (A + 1) * _geo(q, _ceil_half(M13))
                          + (A + 1) * (_floor_half(big) - _floor_half(M13)) * qf
                          + 2 * _geo(q, _floor_half(M13))
                          + (1 + d(M13, Twist.PI)) * qf
                          + (d(M13, mu) - 1) * (qf if amended else 1))
    if c is Case.II_5:
        S = inv.symbol("zy^2-nu")
        # the factor 1 + S kills the square-root term when z_y^2 - 1 is not a square
        T = inv.symbol("-2mu*(zy+r)", mu) if S == 1 else 0
        tail = (d(M12, mu) - 1) * (q ** _floor_half(M12) if amended else 1)
        return QUARTER * (((1 + S) * (1 + T) + 2) * _geo(q, _ceil_half(M12))
                          + d(M12, Twist.ONE) * q ** _floor_half(M12) + tail)

    if c is Case.III_1:
        return QUARTER
    if c is Case.III_2:
        return QUARTER * (M13 + HALF)
    if c in (Case.III_3, Case.III_4):
        P = inv.symbol("-mu*nu*zy", mu)
        Q = inv.symbol("-mu*zy", mu)
        head = (P + Q + 4) * _geo(q, _ceil_half(M12))
        if c is Case.III_3:
            return QUARTER * (head + (M13 - M12 - HALF + d(M12, Twist.ONE)) * q ** _floor_half(M12))
        if amended:
            return QUARTER * (head + d(M12, Twist.ONE) * q ** _floor_half(M12))
        return QUARTER * (head + d(M12, Twist.PI) * q ** _floor_half(M12) - 1)
    if c is Case.III_5:
        M = M12 - HALF
        return QUARTER * (2 * _geo(q, _ceil_half(M)) + d(M, Twist.ONE) * q ** _floor_half(M))
    raise AssertionError(f"unhandled case {c}")


def eval_orbital_x_zero(inv: OrbitInvariants, mu) -> Fraction:
    mu = Twist.parse(mu)
    if not inv.x_is_zero:
        raise ValueError("point has x != 0")
    if inv.nu.pi_bit:
        raise InvalidNu("x = 0 is impossible for ramified nu")
    if inv.has_negative():
        return Fraction(0)
    M12, M13, M23 = inv.Ms
    if inv.nu is Twist.XI2:
        return prefactor(inv.gamma_type) * delta_N(inv.v_y, mu) * (1 - inv.nu.valuation)
    return QUARTER * ((inv.symbol("2mu", mu) + 1) * _floor_half(M23)
                      + (inv.symbol("-2mu", mu) + 1) * _floor_half(M12)
                      + delta_N(M13, mu))


def _sign(n) -> int:
    n = Fraction(n)
    if n.denominator != 1:
        raise ValueError(f"(-1)^{n} needs an integer exponent")
    return -1 if int(n) % 2 else 1


def kappa_corollary(inv: OrbitInvariants, kappa: KappaCharacter, amended: bool = False) -> Fraction:
    """Closed form of SO^kappa for a nontrivial kappa.

    ``amended`` gives the sums of the amended single-orbit forms: the
    (-1)^M/2 tails of types I and II gain q^floor(M/2), and the type III value
    gains the sign kappa_nu(-z_y).
    """
    if kappa.trivial:
        raise ValueError("no closed form for the stable orbital integral")
    if inv.has_negative():
        return Fraction(0)
    q = inv.q
    M12, M13, M23 = inv.Ms
    t = inv.gamma_type
    s = kappa.label

    if inv.x_is_zero:
        if t is TorusType.I:
            return HALF * _sign(M13)
        if s is Twist.XI2:
            return HALF * (_floor_half(M12) + _floor_half(M23) + _sign(M13))
        return HALF * (inv.symbol("2",) * _floor_half(M23) + inv.symbol("-2",) * _floor_half(M12))

    if t is TorusType.I:
        lead = Fraction(0)
        n = _ceil_half(M12)
        if n:
            lead = HALF * _sign(M12 - M13) * (1 + inv.symbol("zy^2-nu")) * _geo(q, n)
        return lead + HALF * _sign(M13) * (q ** _floor_half(M12) if amended else 1)

    if t is TorusType.III:
        if s is not inv.nu:
            return Fraction(0)
        n = _ceil_half(M12)
        if not n:
            return Fraction(0)
        sign = kappa(inv.symbol("class", "-zy")) if amended else 1
        return sign * HALF * (inv.symbol("zy^2-nu") + 1) * _geo(q, n)

    c = dispatch_case(inv).case
    if s is Twist.XI2:
        if c is Case.II_1:
            return HALF * (_floor_half(M12) + _floor_half(M23) + 1)
        if c is Case.II_2:
            return HALF * _sign(M13)
        if c is Case.II_3:
            return (_sign(M12 - M13) * _geo(q, _ceil_half(M12))
                    + HALF * _sign(M13) * (q ** _floor_half(M12) if amended else 1))
        if c in (Case.II_4_12, Case.II_4_23):
            big = M12 if c is Case.II_4_12 else M23
            S = inv.symbol("zy^2-nu")
            return (HALF * (1 + S) * _geo(q, _ceil_half(M13))
                    + HALF * (_floor_half(big) - _floor_half(M13)) * q ** _floor_half(M13)
                    + HALF * _sign(M13) * (q ** _floor_half(M13) if amended else 1))
        if c is Case.II_5:
            S = inv.symbol("zy^2-nu")
            return (HALF * (1 + S) * _geo(q, _ceil_half(M12))
                    + HALF * _sign(M12) * (q ** _floor_half(M12) if amended else 1))
    else:
        group = kappa.group
        if c is Case.II_1:
            return HALF * (inv.symbol("2",) * _floor_half(M23) + inv.symbol("-2",) * _floor_half(M12))
        if c is Case.II_2:
            return Fraction(0)
        if c is Case.II_3:
            cls = inv.symbol("class", "-zy")
            return kappa(cls) * _geo(q, _ceil_half(M12))
        if c in (Case.II_4_12, Case.II_4_23):
            if c is Case.II_4_12:
                sym, big = inv.symbol("-2",), M12
            else:
                sym, big = inv.symbol("2",), M23
            S = inv.symbol("zy^2-nu")
            return (HALF * (1 + S) * sym * _geo(q, _ceil_half(M13))
                    + HALF * sym * (_floor_half(big) - _floor_half(M13)) * q ** _floor_half(M13))
        if c is Case.II_5:
            S = inv.symbol("zy^2-nu")
            if S != 1:
                return Fraction(0)
            cls = inv.symbol("class", "-2(zy+r)")
            return kappa(cls) * _geo(q, _ceil_half(M12))
    raise AssertionError(f"unhandled case {c}")


@dataclass(frozen=True)
class KappaResult:
    kappa: str
    summed: Fraction
    corollary: Optional[Fraction]

    @property
    def match(self) -> bool:
        return self.corollary is None or self.summed == self.corollary


def kappa_sum(values: dict, kappa: KappaCharacter) -> Fraction:
    """sum over mu of kappa(mu) * O_{gamma_mu}, from per-mu values."""
    return sum((kappa(mu) * v for mu, v in values.items()), Fraction(0))


def eval_kappa_orbital(inv: OrbitInvariants, kappa: KappaCharacter, strict: bool = True) -> KappaResult:
    values = {mu: eval_orbital(inv, mu) for mu in kappa.group.elements}
    summed = kappa_sum(values, kappa)
    if kappa.trivial:
        return KappaResult(kappa.name, summed, None)
    closed = kappa_corollary(inv, kappa)
    if strict and summed != closed:
        raise CorollaryMismatch(f"{kappa.name}: sum {summed} != corollary {closed}")
    return KappaResult(kappa.name, summed, closed)


def endoscopic_group(inv: OrbitInvariants) -> EndoscopicGroup:
    return EndoscopicGroup(inv.gamma_type)
