"""Brute-force evaluation of the relative orbital integrals.

The raw oracle conjugates gamma_mu by n(u) a(t) with t = p^m, writes every
entry of the result as a polynomial in u with coefficients in E, and measures
the set of u in F for which all entries are integral.  The measure is exact:
residue classes of u are refined until every integrality condition is either
certainly true or certainly false on the whole class.

The reduced oracle evaluates the single-variable double sum over (m, k) that
remains after splitting the entries along the F-basis {x, y} of E.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

from .errors import NotApplicable, PrecisionExhausted, Unstable
from .orbits import (
    OrbitInvariants,
    SymmetricPoint,
    TorusType,
    invariants,
    prefactor as type_prefactor,
)
from .padic import FieldContext, Level, PadicScalar, Twist


@dataclass(frozen=True)
class OracleConfig:
    m_max: Optional[int] = None
    u_depth: Optional[int] = None
    stability_factor: int = 2
    prefactor: Optional[Fraction] = None
    check_stability: bool = True

    def resolve(self, inv: OrbitInvariants, mu: Twist, m_lo: int) -> "OracleConfig":
        m_max = self.m_max if self.m_max is not None else support_bound(inv, mu)
        m_max = max(m_max, m_lo + 1)
        u_depth = self.u_depth
        if u_depth is None:
            u_depth = 2 * m_max + abs(math.ceil(inv.v_y)) + 2
        pre = self.prefactor if self.prefactor is not None else type_prefactor(inv.gamma_type)
        return replace(self, m_max=m_max, u_depth=u_depth, prefactor=pre)

    def doubled(self) -> "OracleConfig":
        f = self.stability_factor
        return replace(
            self,
            m_max=None if self.m_max is None else f * self.m_max,
            u_depth=None if self.u_depth is None else f * self.u_depth,
        )


def support_bound(inv: OrbitInvariants, mu) -> int:
    """Cap on v(t) beyond which no u makes the conjugate integral."""
    mu = Twist.parse(mu)
    total = inv.M12 + inv.M23 + inv.M13 + mu.valuation + abs(inv.v_y)
    return math.ceil(total) + 2


# ---------------------------------------------------------------- measure

def _taylor_shift(c: list, r: int) -> list:
    """Coefficients of Q(r + s) from those of Q(s)."""
    c = list(c)
    n = len(c) - 1
    for i in range(n):
        for j in range(n - 1, i - 1, -1):
            c[j] += r * c[j + 1]
    return c


def _child(c: list, r: int, p: int, mod: int) -> list:
    c = _taylor_shift(c, r)
    pj = 1
    out = []
    for cj in c:
        out.append(cj * pj % mod)
        pj *= p
    return out


def _classify(c: list, p: int, a: int, mod: int):
    """'good' if v(Q) >= a on the whole class, 'bad' if never, None if undecided."""
    if all(x % mod == 0 for x in c):
        return "good"
    c0 = c[0] % mod
    if c0:
        v0 = 0
        while c0 % p == 0:
            c0 //= p
            v0 += 1
        pv = p ** (v0 + 1)
        if all(x % pv == 0 for x in c[1:]):
            return "bad"
    return None


def integral_measure(p: int, constraints: Sequence, units_only: bool = False,
                     max_depth: int = 400) -> Fraction:
    """Haar measure of {w in Z_p : v(Q_i(w)) >= a_i for all i}.

    ``constraints`` holds pairs (integer coefficients in ascending degree, a).
    With ``units_only`` the domain is Z_p^x instead.
    """
    active = []
    for coeffs, a in constraints:
        if a <= 0:
            continue
        mod = p ** a
        active.append(([x % mod for x in coeffs], a, mod))
    if units_only:
        # the classes r + pZ_p, r = 1..p-1, as Q(r + p s)
        stack = [([(_child(c, r, p, mod), a, mod) for c, a, mod in active], 1) for r in range(1, p)]
    else:
        stack = [(active, 0)]
    counts = {}
    while stack:
        cell, d = stack.pop()
        keep = []
        dead = False
        for c, a, mod in cell:
            verdict = _classify(c, p, a, mod)
            if verdict == "bad":
                dead = True
                break
            if verdict is None:
                keep.append((c, a, mod))
        if dead:
            continue
        if not keep:
            counts[d] = counts.get(d, 0) + 1
            continue
        if d >= max_depth:
            raise Unstable(f"residue refinement did not settle by depth {max_depth}")
        for r in range(p):
            stack.append(([(_child(c, r, p, mod), a, mod) for c, a, mod in keep], d + 1))
    return sum((Fraction(n, p ** d) for d, n in counts.items()), Fraction(0))


def brute_force_measure(p: int, constraints: Sequence, depth: int, units_only: bool = False) -> Fraction:
    """Same measure by plain enumeration of w mod p^depth (valid once depth >= every a)."""
    mod_d = p ** depth
    good = 0
    for w in range(mod_d):
        if units_only and w % p == 0:
            continue
        if all(a <= 0 or sum(c * w ** j for j, c in enumerate(coeffs)) % p ** a == 0
               for coeffs, a in constraints):
            good += 1
    return Fraction(good, mod_d)


def integrality_constraint(coeffs: Sequence[PadicScalar], shifts: Sequence[int], threshold: int):
    """Encode v(sum_l coeffs[l] p^shifts[l] w^l) >= threshold (coeffs on F).

    Returns (integer coefficients, a) meaning v(Q(w)) >= a, or None when the
    condition holds for every w in Z_p.
    """
    lows = []
    for c, s in zip(coeffs, shifts):
        if c.exact_zero:
            continue
        if c.exp + c.prec + s < threshold:
            raise PrecisionExhausted("coefficient not known to the required depth")
        if c.prec:
            lows.append(c.exp + s)
    if not lows:
        return None
    E = min(lows)
    a = threshold - E
    if a <= 0:
        return None
    p = coeffs[0].p
    out = []
    for c, s in zip(coeffs, shifts):
        if c.exact_zero or c.prec == 0:
            out.append(0)
        else:
            out.append(c.coords[0] * p ** (c.exp + s - E))
    return out, a


# ---------------------------------------------------------------- polynomials in u

def _padd(a, b):
    n = max(len(a), len(b))
    ctx = (a or b)[0].ctx
    z = ctx.zero()
    return [(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z) for i in range(n)]


def _pmul(a, b):
    ctx = a[0].ctx
    out = [ctx.zero() for _ in range(len(a) + len(b) - 1)]
    for i, ai in enumerate(a):
        if ai.exact_zero:
            continue
        for j, bj in enumerate(b):
            if bj.exact_zero:
                continue
            out[i + j] = out[i + j] + ai * bj
    return out


def _n_poly(ctx: FieldContext, sign: int):
    """n(sign*u) = [[1, su, -u^2/2], [0, 1, -su], [0, 0, 1]] as polynomials in u."""
    z, one = ctx.zero(), ctx.F(1)
    s = ctx.F(sign)
    half = ctx.F(Fraction(-1, 2))
    return [
        [[one], [z, s], [z, z, half]],
        [[z], [one], [z, -s]],
        [[z], [z], [one]],
    ]


def _matmul(A, B):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = [A[i][0][0].ctx.zero()]
            for k in range(n):
                acc = _padd(acc, _pmul(A[i][k], B[k][j]))
            row.append(acc)
        out.append(row)
    return out


def conjugated_polynomials(gamma: SymmetricPoint):
    """X(u) = n(-u) gamma n(u); entries are polynomials in u over E."""
    ctx = gamma.ctx
    G = [[[e] for e in row] for row in gamma.matrix()]
    return _matmul(_matmul(_n_poly(ctx, -1), G), _n_poly(ctx, 1))


T_WEIGHT = (1, 0, -1)
# positions of the six distinct entries; the remaining three mirror them
ENTRY_POSITIONS = ((0, 0), (1, 0), (1, 1), (2, 0), (0, 1), (0, 2))


def _peval(poly, u: PadicScalar):
    acc = u.ctx.zero()
    for c in reversed(poly):
        acc = acc * u + c
    return acc


def conjugated_matrix(gamma: SymmetricPoint, t_val: int, u: PadicScalar):
    """a(t)^{-1} n(-u) gamma n(u) a(t) with t = p^t_val, by matrix multiplication."""
    X = conjugated_polynomials(gamma)
    p = gamma.ctx.p
    return [[_peval(X[i][j], u) * Fraction(p) ** (t_val * (T_WEIGHT[j] - T_WEIGHT[i]))
             for j in range(3)] for i in range(3)]


def raw_entries(gamma: SymmetricPoint, t_val: int, u: PadicScalar):
    """The six distinct entries of the conjugated matrix, from their closed expressions."""
    ctx = gamma.ctx
    x, y, z = gamma.x, gamma.y, gamma.z
    mu, nu = ctx.twist(gamma.mu), ctx.nu_scalar()
    t = ctx.F(Fraction(ctx.p) ** t_val)
    c = nu * y / mu  # mu^{-1} nu y
    u2 = u * u
    return (
        x - u2 * c / 2,
        t * u * c,
        u2 * c + z,
        t * t * c,
        (u * x - u * z - u2 * u * c / 2) / t,
        (mu * y - u2 * x + u2 * z + u2 * u2 * c / 4) / (t * t),
    )


# ---------------------------------------------------------------- raw oracle

class _RawSetup:
    """Per-point data of the raw oracle, independent of m."""

    def __init__(self, gamma: SymmetricPoint):
        self.gamma = gamma
        self.p = gamma.ctx.p
        X = conjugated_polynomials(gamma)
        mid = X[1][1][2]  # u^2 coefficient of the middle entry
        if mid.exact_zero:
            raise ValueError("degenerate point: y = 0")
        self.k0 = math.ceil(-mid.valuation() / 2)
        corner = X[2][0][0]
        self.m_lo = math.ceil(-corner.valuation() / 2)
        self.entries = []
        for i, j in ENTRY_POSITIONS:
            poly = X[i][j]
            for coord in (0, 1):
                coeffs = [c.coordinate(coord) for c in poly]
                if all(c.exact_zero for c in coeffs):
                    continue
                self.entries.append((T_WEIGHT[j] - T_WEIGHT[i], coeffs))

    def constraints(self, m: int):
        out = []
        for weight, coeffs in self.entries:
            shifts = [self.k0 * l + m * weight for l in range(len(coeffs))]
            c = integrality_constraint(coeffs, shifts, 0)
            if c is not None:
                out.append(c)
        return out

    def term(self, m: int, max_depth: int) -> Fraction:
        """q^m times the u-measure at v(t) = m."""
        meas = integral_measure(self.p, self.constraints(m), max_depth=max_depth)
        return Fraction(self.p) ** (m - self.k0) * meas


def raw_terms(gamma: SymmetricPoint, m_max: int, u_depth: int):
    setup = _RawSetup(gamma)
    depth = max(1, u_depth - setup.k0)
    return {m: setup.term(m, depth) for m in range(setup.m_lo, m_max + 1)}, setup


def _stability_top(cfg: OracleConfig, lo: int) -> int:
    """Last m scanned: the doubled cap, or for a cap <= 0 the window [lo, m_max]
    repeated once more above it."""
    if not cfg.check_stability:
        return cfg.m_max
    if cfg.m_max > 0:
        return cfg.stability_factor * cfg.m_max
    return cfg.m_max + (cfg.stability_factor - 1) * (cfg.m_max - lo + 1)


def raw_orbital_oracle(gamma: SymmetricPoint, cfg: Optional[OracleConfig] = None,
                       inv: Optional[OrbitInvariants] = None) -> Fraction:
    cfg = cfg or OracleConfig()
    inv = inv or invariants(gamma)
    setup = _RawSetup(gamma)
    cfg = cfg.resolve(inv, gamma.mu, setup.m_lo)
    top = _stability_top(cfg, setup.m_lo)
    depth = max(1, cfg.u_depth - setup.k0)
    total = Fraction(0)
    for m in range(setup.m_lo, top + 1):
        try:
            term = setup.term(m, depth)
        except Unstable:
            if not cfg.check_stability:
                raise
            term = setup.term(m, cfg.stability_factor * depth)
            if m <= cfg.m_max:
                raise Unstable(f"u_depth {cfg.u_depth} too small at m = {m}")
        if m > cfg.m_max and term:
            raise Unstable(f"nonzero contribution at m = {m} beyond m_max = {cfg.m_max}")
        total += term
    return cfg.prefactor * total


# ---------------------------------------------------------------- reduced oracle

def closed_term(v_y: int, mu: Twist, nu: Twist) -> int:
    """#{m : 2m >= v(mu) - v(nu) - v(y) and 2m <= v(y) + v(mu)} (the k >= m part)."""
    lo = math.ceil(Fraction(mu.valuation - nu.valuation - v_y, 2))
    hi = math.floor(Fraction(v_y + mu.valuation, 2))
    return max(0, hi - lo + 1)


def reduced_orbital_oracle(gamma: SymmetricPoint, cfg: Optional[OracleConfig] = None,
                           inv: Optional[OrbitInvariants] = None) -> Fraction:
    if gamma.x_is_zero:
        raise NotApplicable("reduced oracle needs x != 0")
    cfg = cfg or OracleConfig()
    inv = inv or invariants(gamma)
    ctx = gamma.ctx
    p = ctx.p
    mu, nu = gamma.mu, gamma.nu
    v_y = int(gamma.y.valuation())
    k_min = math.ceil(Fraction(mu.valuation - nu.valuation - v_y, 2))
    cfg = cfg.resolve(inv, mu, k_min)
    if inv.v_x < 0:
        return Fraction(0)
    mu_s, nu_s = ctx.twist(mu), ctx.nu_scalar()
    c4 = nu_s / (4 * mu_s)
    quartic = [mu_s, ctx.zero(), inv.z_y, ctx.zero(), c4]
    binomial = [mu_s, ctx.zero(), ctx.zero(), ctx.zero(), -c4]
    width = inv.M12 + inv.M23
    top = _stability_top(cfg, k_min + 1)

    def term(m: int, depth: int) -> Fraction:
        acc = Fraction(0)
        k_lo = max(k_min, math.ceil(m - width / 2))
        for k in range(k_lo, m):
            shifts = [k * l for l in range(5)]
            cons = []
            for poly, thr in ((quartic, 2 * m - v_y), (binomial, m + k - v_y)):
                c = integrality_constraint(poly, shifts, thr)
                if c is not None:
                    cons.append(c)
            meas = integral_measure(p, cons, units_only=True, max_depth=depth)
            acc += Fraction(p) ** (m - k) * meas
        return acc

    total = Fraction(0)
    depth = max(1, cfg.u_depth)
    for m in range(k_min + 1, top + 1):
        t = term(m, depth)
        if m > cfg.m_max and t:
            raise Unstable(f"nonzero contribution at m = {m} beyond m_max = {cfg.m_max}")
        total += t
    total += closed_term(v_y, mu, nu)
    return cfg.prefactor * total
