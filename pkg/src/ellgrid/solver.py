"""Linear first-order difference equations  a(x) (D f)(x) = c(x) (M f)(x) + d(x).

Here a, c, d are polynomials with deg a <= 3 and c = (beta x + gamma) X2,
d = (delta x + eps) X2.  The solution has an interpolatory expansion

    f = sum_k c_k Yb_k

over a pair of lattices: the unprimed one seeded so that its index -1 point
x_{-1} solves  a/(psi - phi) + c/2 = 0  (which pins f(y_0)), and the primed
one seeded at a root x'_0 of  a/(psi - phi) - c/2 = 0  (whose y'_1, y'_2, ...
are the solution's poles).  Coefficients come from the two-term recurrence

    c_{n+1}/c_n = -xi_n / eta_{n+1}

with closed-product and stepwise-recurrence cross-checks.  The logarithmic
case c = 0 (where f generalizes a logarithm and c_0 is a free constant) gets
an elementary product formula with no reference to the C_n.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .diffops import BasisPair, diff_constant, divided_difference, mean_value
from .errors import (
    BranchAssignmentFailedError,
    DegreeMismatchError,
    HitSingularLatticeError,
    InternalInconsistencyError,
    NoSpecialPointError,
    PoleEvaluationError,
    SmallDivisorError,
    ValidationError,
)
from .lattice import LatticePair, LatticeSpec
from .poly import Polynomial

X2_FACTOR_TOL = 1e-12


# -- equation forms ------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetricForm:
    """The D/M form of  a(x) f(phi) + b(x) f(psi) + c(x) = 0.

    alpha = alpha_half * (psi - phi) (the flag records the branch factor, so
    the stored part stays rational), beta = -(a+b)/2, gamma = -c, and the
    equation reads  alpha * (D f) = beta * [f(phi) + f(psi)] + gamma.
    """

    alpha_half: Polynomial
    beta: Polynomial
    gamma: Polynomial
    alpha_times_branch: bool = True

    def alpha_value(self, curve, x, hint=None):
        """alpha(x) for the branch ordering picked by `hint` (first root = phi)."""
        phi, psi = curve.y_roots(x).ordered(hint)
        return self.alpha_half(x) * (psi - phi)

    def f_psi_from_f_phi(self, x, f_phi):
        """Solve the symmetric form for f(psi); branch factors cancel exactly."""
        den = self.alpha_half(x) - self.beta(x)
        if den == 0:
            raise ZeroDivisionError(f"symmetric form degenerate at x={x}")
        return (self.gamma(x) + (self.beta(x) + self.alpha_half(x)) * f_phi) / den


def convert_equation_form(a_pt, b_pt, c_pt):
    """Rewrite  a f(phi) + b f(psi) + c = 0  symmetrically in the root pair."""
    a_pt, b_pt, c_pt = (p if isinstance(p, Polynomial) else Polynomial((p,))
                        for p in (a_pt, b_pt, c_pt))
    return SymmetricForm(
        alpha_half=(b_pt - a_pt) / 2.0,
        beta=-(a_pt + b_pt) / 2.0,
        gamma=-c_pt,
    )


# -- the difference equation -----------------------------------------------------------


class DifferenceEquation:
    """a (D f) = c (M f) + d with c = (beta x + gamma) X2, d = (delta x + eps) X2."""

    __slots__ = ("curve", "a", "c", "d", "beta", "gamma", "delta", "eps")

    def __init__(self, curve, a, beta, gamma, delta, eps):
        a = a if isinstance(a, Polynomial) else Polynomial(a)
        if a.degree() > 3:
            raise DegreeMismatchError(f"deg a = {a.degree()} > 3")
        x2 = curve.x_view()[2]
        object.__setattr__(self, "curve", curve)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "beta", complex(beta))
        object.__setattr__(self, "gamma", complex(gamma))
        object.__setattr__(self, "delta", complex(delta))
        object.__setattr__(self, "eps", complex(eps))
        object.__setattr__(self, "c", Polynomial((gamma, beta)) * x2)
        object.__setattr__(self, "d", Polynomial((eps, delta)) * x2)

    def __setattr__(self, name, value):
        raise AttributeError("DifferenceEquation is immutable")

    @classmethod
    def from_linear_parts(cls, curve, a, beta, gamma, delta, eps):
        return cls(curve, a, beta, gamma, delta, eps)

    @classmethod
    def from_polynomials(cls, curve, a, c, d):
        """Extract (beta, gamma, delta, eps), validating the X2 factor of c and d."""
        x2 = curve.x_view()[2]
        parts = []
        for name, p in (("c", c), ("d", d)):
            p = p if isinstance(p, Polynomial) else Polynomial(p)
            if p.is_zero():
                parts.append((0j, 0j))
                continue
            q, r = divmod(p, x2)
            if r.max_coeff > X2_FACTOR_TOL * max(p.max_coeff, 1.0):
                raise ValidationError(f"{name} does not carry the factor X2")
            if q.degree() > 1:
                raise ValidationError(f"{name}/X2 has degree {q.degree()} > 1")
            cs = list(q.coeffs) + [0j]
            parts.append((cs[1], cs[0]))
        (beta, gamma), (delta, eps) = parts
        return cls(curve, a, beta, gamma, delta, eps)

    @property
    def is_logarithmic(self):
        return self.beta == 0 and self.gamma == 0

    def scale(self, z=1.0):
        base = max(self.a.max_coeff, self.c.max_coeff, self.d.max_coeff, 1e-300)
        return base * max(1.0, abs(z)) ** 3

    def defect(self, x, f_phi, f_psi, phi, psi):
        """a*(Df) - c*(Mf) - d given the two branch values at x."""
        return (self.a(x) * (f_psi - f_phi) / (psi - phi)
                - self.c(x) * 0.5 * (f_phi + f_psi) - self.d(x))


# -- special points -------------------------------------------------------------------


@dataclass(frozen=True)
class Nearest:
    z: complex


@dataclass(frozen=True)
class ByIndex:
    i: int
    j: int | None = None


@dataclass(frozen=True)
class Explicit:
    x_m1: complex
    x_p0: complex


@dataclass(frozen=True)
class SpecialPoints:
    """x_{-1} and x'_0 with their branch assignments and residual certificates."""

    x_m1: complex
    x_p0: complex
    y_m1: complex
    y_0: complex
    y_p0: complex
    y_p1: complex
    res_m1: float
    res_p0: float


def _condition_residual(eq, r, first, second, sign):
    """|a/(second-first) + sign*c/2| at r, normalized; inf if branches collide.

    The normalization is the coefficient-level magnitude of the two terms, so
    the residual measures how much cancellation the condition achieves.
    """
    dy = second - first
    if abs(dy) <= 1e-13 * max(1.0, abs(first), abs(second)):
        return float("inf")
    lhs = eq.a(r) / dy + sign * eq.c(r) / 2.0
    growth = max(1.0, abs(r))
    scale = max(eq.a.max_coeff * growth ** eq.a.degree() / abs(dy),
                eq.c.max_coeff * growth ** eq.c.degree() / 2.0,
                1e-300)
    return abs(lhs) / scale


def special_point_candidates(eq):
    """Polished roots of the rationalized condition 4 a^2 = (beta x + gamma)^2 P.

    In the logarithmic case the condition collapses to a(x) = 0.  Candidates
    failing back-substitution into the unsquared condition (under the best
    branch pairing) are dropped; survivors come back sorted by (Re, Im).
    """
    if eq.is_logarithmic:
        rts = eq.a.roots()
    else:
        lin2 = Polynomial((eq.gamma, eq.beta)) ** 2
        sextic = 4.0 * (eq.a * eq.a) - lin2 * eq.curve.discriminant_P()
        if sextic.is_zero():
            raise NoSpecialPointError("special-point equation is identically zero")
        if sextic.degree() < 1:
            raise NoSpecialPointError("special-point equation has no roots")
        rts = sextic.roots()
        rts = [_polish_condition_root(eq, r) for r in rts]
    out = []
    for r in rts:
        if any(abs(r - s) <= 1e-8 * (1.0 + abs(r)) for s in out):
            continue
        if eq.is_logarithmic:
            out.append(r)
            continue
        try:
            pair = eq.curve.y_roots(r)
        except Exception:
            continue
        u, v = pair.as_tuple()
        best = min(_condition_residual(eq, r, u, v, +1),
                   _condition_residual(eq, r, v, u, +1))
        if best <= 1e-6:
            out.append(r)
    if not out:
        raise NoSpecialPointError("no root passes back-substitution")
    return sorted(out, key=lambda z: (z.real, z.imag))


def _polish_condition_root(eq, r, iters=8):
    """Newton-polish r against 2a(x) - sigma (beta x + gamma) sqrt(P(x)) = 0."""
    P = eq.curve.discriminant_P()
    dP = P.derivative()
    lin = Polynomial((eq.gamma, eq.beta))
    da = eq.a.derivative()
    w = cmath.sqrt(P(r))
    sigma = 1.0 if abs(2.0 * eq.a(r) - lin(r) * w) <= abs(2.0 * eq.a(r) + lin(r) * w) \
        else -1.0
    best = r
    g_best = abs(2.0 * eq.a(r) - sigma * lin(r) * w)
    for _ in range(iters):
        g = 2.0 * eq.a(r) - sigma * lin(r) * w
        if abs(w) <= 1e-300:
            break
        dg = 2.0 * da(r) - sigma * (eq.beta * w + lin(r) * dP(r) / (2.0 * w))
        if dg == 0:
            break
        r2 = r - g / dg
        w2 = cmath.sqrt(P(r2))
        if abs(w2 + w) < abs(w2 - w):
            w2 = -w2
        g2 = abs(2.0 * eq.a(r2) - sigma * lin(r2) * w2)
        if g2 < g_best:
            best, g_best = r2, g2
            r, w = r2, w2
        else:
            break
    return best


def _branch_for_role(eq, r, sign, hint=None):
    """(first, second, residual): ordering of the pair at r for one role.

    sign +1 is the x_{-1} role (first = y_{-1}, second = y_0); sign -1 is the
    x'_0 role (first = y'_0, second = y'_1).  Degenerate ties (logarithmic
    mode) break toward `hint` for the second member, else toward +sqrt.
    """
    pair = eq.curve.y_roots(r)
    u, v = pair.as_tuple()
    r_uv = _condition_residual(eq, r, u, v, sign)
    r_vu = _condition_residual(eq, r, v, u, sign)
    if min(r_uv, r_vu) > 1e-6:
        raise BranchAssignmentFailedError(
            f"no root ordering at {r} satisfies the condition (residuals "
            f"{r_uv:.2e}, {r_vu:.2e})")
    if abs(r_uv - r_vu) <= 1e-9 and hint is not None:
        return (u, v, r_uv) if abs(v - hint) <= abs(u - hint) else (v, u, r_vu)
    if abs(r_uv - r_vu) <= 1e-9:
        return u, v, r_uv          # tie: second member is the +sqrt root
    return (u, v, r_uv) if r_uv < r_vu else (v, u, r_vu)


def locate_special_points(eq, select, y0_hint=None, yp1_hint=None):
    """Pick x_{-1} and x'_0 among the candidates and fix their branch pairings.

    select: Nearest(z) takes the candidate nearest z as x_{-1} and the next
    nearest distinct one as x'_0; ByIndex(i, j) indexes the (Re, Im)-sorted
    candidate list; Explicit(x_m1, x_p0) matches given points.  In logarithmic
    mode with d != 0, x_{-1} is pinned to the root of d (the
    expansion only exists when d(x_{-1}) = 0) and select only picks x'_0.
    """
    cands = special_point_candidates(eq)

    forced_m1 = None
    if eq.is_logarithmic and eq.delta != 0:
        want = -eq.eps / eq.delta
        match = [r for r in cands if abs(r - want) <= 1e-6 * (1.0 + abs(want))]
        if not match:
            raise NoSpecialPointError(
                "logarithmic mode needs the root of d among the roots of a")
        forced_m1 = match[0]

    if isinstance(select, Explicit):
        x_m1 = _match_candidate(cands, complex(select.x_m1))
        x_p0 = _match_candidate(cands, complex(select.x_p0))
    elif isinstance(select, Nearest):
        order = sorted(cands, key=lambda r: abs(r - complex(select.z)))
        if forced_m1 is not None:
            x_m1 = forced_m1
            rest = [r for r in order if abs(r - x_m1) > 1e-8 * (1.0 + abs(r))]
        else:
            x_m1 = order[0]
            rest = order[1:]
        if not rest:
            raise NoSpecialPointError("need two distinct special points")
        x_p0 = rest[0]
    elif isinstance(select, ByIndex):
        if forced_m1 is not None:
            x_m1 = forced_m1
            rest = [r for r in cands if abs(r - x_m1) > 1e-8 * (1.0 + abs(r))]
            if not rest:
                raise NoSpecialPointError("need two distinct special points")
            x_p0 = rest[select.i % len(rest)]
        else:
            x_m1 = cands[select.i % len(cands)]
            j = select.j if select.j is not None else (select.i + 1)
            x_p0 = cands[j % len(cands)]
    else:
        raise ValidationError(f"unknown selector {select!r}")
    if abs(x_m1 - x_p0) <= 1e-9 * (1.0 + abs(x_m1)):
        raise NoSpecialPointError("x_{-1} and x'_0 must be distinct")

    y_m1, y_0, res_m1 = _branch_for_role(eq, x_m1, +1, hint=y0_hint)
    y_p0, y_p1, res_p0 = _branch_for_role(eq, x_p0, -1, hint=yp1_hint)
    return SpecialPoints(x_m1=x_m1, x_p0=x_p0, y_m1=y_m1, y_0=y_0,
                         y_p0=y_p0, y_p1=y_p1, res_m1=res_m1, res_p0=res_p0)


def _match_candidate(cands, target):
    best = min(cands, key=lambda r: abs(r - target))
    if abs(best - target) > 1e-6 * (1.0 + abs(target)):
        raise NoSpecialPointError(f"{target} is not a special-point candidate")
    return best


def build_lattices(eq, special):
    """BasisPair with x_{-1} at index -1 of the unprimed lattice and x'_0 at 0.

    The unprimed lattice is seeded one step forward of (x_{-1}, y_{-1}) so the
    seed index stays 0; walking back reproduces the special point exactly (the
    steps are Vieta complements).
    """
    curve = eq.curve
    x_0 = curve.other_x(special.y_0, special.x_m1)
    unprimed = LatticePair(LatticeSpec(curve, x_0, special.y_0))
    primed = LatticePair(LatticeSpec(curve, special.x_p0, special.y_p0))
    checks = (
        abs(unprimed.x(-1) - special.x_m1),
        abs(unprimed.y(-1) - special.y_m1),
        abs(primed.y(1) - special.y_p1),
    )
    if max(checks) > 1e-8 * (1.0 + abs(special.x_m1)):
        raise BranchAssignmentFailedError(
            f"lattice walk does not reproduce the special points: {checks}")
    for xx, yy in ((special.x_m1, special.y_m1), (special.x_m1, special.y_0),
                   (special.x_p0, special.y_p0), (special.x_p0, special.y_p1)):
        if not curve.contains(xx, yy, tol=1e-9):
            raise BranchAssignmentFailedError(f"({xx}, {yy}) left the curve")
    return BasisPair(unprimed, primed)


# -- expansion coefficients ---------------------------------------------------------------


def _xi(eq, pair, n):
    cn = diff_constant(pair, n)
    z = pair.xp(n)
    num = eq.a(z) + eq.c(z) * (pair.yp(n + 1) - pair.yp(n)) / 2.0
    den = (z - pair.x(-1)) * (z - pair.xp(0)) * (z - pair.x(n - 1))
    return cn * num / den


def _eta(eq, pair, n):
    cn = diff_constant(pair, n)
    z = pair.x(n - 1)
    num = eq.a(z) - eq.c(z) * (pair.y(n) - pair.y(n - 1)) / 2.0
    den = (z - pair.x(-1)) * (z - pair.xp(0)) * (z - pair.xp(n))
    return cn * num / den


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def closed_product_coefficient(eq, pair, n, c1):
    """c_n from the closed product (independent of the ratio recurrence)."""
    if n == 0:
        raise ValidationError("closed product starts at n = 1")
    if n == 1:
        return c1
    v = c1 * (diff_constant(pair, 1) / (pair.xp(1) - pair.x(0)))
    v *= (pair.xp(n) - pair.x(n - 1)) / diff_constant(pair, n)
    xm1, xp0 = pair.x(-1), pair.xp(0)
    for k in range(1, n):
        xk, xpk = pair.x(k), pair.xp(k)
        v *= (eq.a(xpk) + eq.c(xpk) * (pair.yp(k + 1) - pair.yp(k)) / 2.0) / \
             (eq.a(xk) - eq.c(xk) * (pair.y(k + 1) - pair.y(k)) / 2.0)
        v *= (xk - xm1) * (xk - xp0) / ((xpk - xm1) * (xpk - xp0))
    return v


def expansion_coefficients(eq, pair, N, diag=None):
    """c_0 .. c_N for the general mode (beta, gamma not both zero).

    c_0 = -(delta x_{-1} + eps)/(beta x_{-1} + gamma); c_1 comes from the
    recurrence seed (beta c_0 + delta)/eta_1 and must agree with the stepwise
    oracle route to 1e-6 (InternalInconsistency otherwise); the rest follow
    the ratio recurrence, cross-checked against the closed product at
    n in {2, 5, N}.
    """
    if eq.is_logarithmic:
        raise ValidationError("c = 0: use expansion_coefficients_log")
    if N < 0:
        raise ValidationError("N must be >= 0")
    xm1 = pair.x(-1)
    den0 = eq.beta * xm1 + eq.gamma
    if abs(den0) <= 1e-13 * max(1.0, abs(eq.beta * xm1), abs(eq.gamma)):
        raise ValidationError("beta x_{-1} + gamma = 0: c_0 undefined")
    c0 = -(eq.delta * xm1 + eq.eps) / den0
    cs = [c0]
    if N == 0:
        return cs

    etas = {n: _eta(eq, pair, n) for n in range(1, N + 1)}
    med = float(np.median([abs(v) for v in etas.values()]))
    for n, v in etas.items():
        if abs(v) < 1e-12 * med:
            raise SmallDivisorError(n, abs(v))

    c1 = (eq.beta * c0 + eq.delta) / etas[1]
    oracle = stepwise_oracle(eq, pair, 1)
    yb1 = pair.y_basis(1)(pair.y(1))
    c1_alt = (oracle[1] - c0) / yb1
    c1_rel = _rel(c1, c1_alt)
    if c1_rel > 1e-6:
        raise InternalInconsistencyError(
            f"c_1 routes disagree: recurrence {c1} vs oracle {c1_alt}")
    cs.append(c1)
    for n in range(1, N):
        cs.append(-cs[-1] * _xi(eq, pair, n) / etas[n + 1])

    prod_rel = 0.0
    for n in sorted({2, 5, N}):
        if 2 <= n <= N:
            prod_rel = max(prod_rel, _rel(cs[n], closed_product_coefficient(eq, pair, n, c1)))
    if prod_rel > 1e-7:
        raise InternalInconsistencyError(
            f"ratio recurrence vs closed product disagree ({prod_rel:.2e})")
    if diag is not None:
        diag["c1_routes_rel"] = c1_rel
        diag["closed_product_rel"] = prod_rel
    return cs


def third_root_of_a(eq, pair):
    """zeta: the root of a besides x_{-1} and x'_0 (logarithmic mode, deg a = 3)."""
    if eq.a.degree() != 3:
        raise DegreeMismatchError("logarithmic mode needs deg a = 3")
    q1, r1 = divmod(eq.a, Polynomial.from_roots([pair.x(-1)]))
    q2, r2 = divmod(q1, Polynomial.from_roots([pair.xp(0)]))
    scale = max(eq.a.max_coeff, 1.0)
    if max(r1.max_coeff, r2.max_coeff) > 1e-7 * scale:
        raise ValidationError("x_{-1} and x'_0 are not roots of a")
    return -q2.coeffs[0] / q2.coeffs[1]


def expansion_coefficients_log(eq, pair, N, c0_free, diag=None):
    """c_0 .. c_N for the logarithmic case c = 0, with c_0 the free constant.

    Requires deg a = 3 with x_{-1} and x'_0 among its roots and d(x_{-1}) = 0
    (otherwise no expansion of this form exists).  Coefficients use the
    elementary product formula (lattice values and zeta only); the route is
    cross-checked against the ratio recurrence for n <= 6.
    """
    if not eq.is_logarithmic:
        raise ValidationError("equation is not logarithmic (c != 0)")
    zeta = third_root_of_a(eq, pair)
    xm1, ym1 = pair.x(-1), pair.y(-1)
    if abs(eq.d(xm1)) > 1e-8 * eq.scale(xm1):
        raise ValidationError(
            "logarithmic expansions need d(x_{-1}) = 0; seed x_{-1} at the root of d")
    cs = [complex(c0_free)]
    if N == 0:
        return cs
    eta1 = _eta(eq, pair, 1)
    c1 = eq.delta / eta1
    pref = c1 * (diff_constant(pair, 1) / (pair.xp(1) - pair.x(0))) * \
        eq.curve.x_view()[2](xm1)
    num = 1.0 + 0j      # prod (ym1 - yp_j), j = 1..n  and  (xm1 - x_j), j = 0..n-2
    den = (xm1 - pair.xp(0))          # prod (ym1 - y_j), j=1..n-1 and (xm1 - xp_j), j=0..n
    zr = 1.0 + 0j       # prod (xp_k - zeta)/(x_k - zeta), k = 1..n-1
    floor = 1e-280
    for n in range(1, N + 1):
        num *= (ym1 - pair.yp(n))
        if n >= 2:
            num *= (xm1 - pair.x(n - 2))
            dy = ym1 - pair.y(n - 1)
            if abs(dy) <= floor:
                raise SmallDivisorError(n, abs(dy))
            den *= dy
            zr *= (pair.xp(n - 1) - zeta) / (pair.x(n - 1) - zeta)
        den *= (xm1 - pair.xp(n))
        cs.append(pref * (pair.xp(n) - pair.x(n - 1)) * num * zr / den)

    check_rel = 0.0
    ratio_c = c1
    for n in range(1, min(6, N) + 1):
        check_rel = max(check_rel, _rel(cs[n], ratio_c))
        ratio_c = -ratio_c * _xi(eq, pair, n) / _eta(eq, pair, n + 1)
    if check_rel > 1e-8:
        raise InternalInconsistencyError(
            f"log product vs ratio recurrence disagree ({check_rel:.2e})")
    if diag is not None:
        diag["log_vs_ratio_rel"] = check_rel
        diag["zeta"] = zeta
    return cs


def stepwise_oracle(eq, pair, K, f0=None):
    """f(y_0) .. f(y_K) straight from the difference equation, no expansion.

    f(y_0) defaults to the self-determined c_0 in general mode; logarithmic mode has
    no distinguished start, so f0 must be supplied (the free constant).
    """
    if f0 is None:
        if eq.is_logarithmic:
            raise ValidationError("logarithmic oracle needs the free constant f0")
        xm1 = pair.x(-1)
        f0 = -(eq.delta * xm1 + eq.eps) / (eq.beta * xm1 + eq.gamma)
    vals = [complex(f0)]
    for k in range(K):
        xk = pair.x(k)
        dy = pair.y(k + 1) - pair.y(k)
        ratio = eq.a(xk) / dy
        den = ratio - eq.c(xk) / 2.0
        growth = max(1.0, abs(xk))
        den_scale = max(eq.a.max_coeff * growth ** eq.a.degree() / abs(dy),
                        eq.c.max_coeff * growth ** eq.c.degree() / 2.0,
                        1e-300)
        if abs(den) <= 1e-12 * den_scale:
            raise HitSingularLatticeError(k)
        vals.append(((ratio + eq.c(xk) / 2.0) * vals[-1] + eq.d(xk)) / den)
    return vals


# -- the assembled solution --------------------------------------------------------------


@dataclass
class ExpansionSolution:
    eq: DifferenceEquation
    pair: BasisPair
    special: SpecialPoints
    mode: str                       # "general" | "log"
    coeffs: tuple
    c0_free: complex | None = None
    zeta: complex | None = None
    diagnostics: dict = field(default_factory=dict)

    def partial_sum(self, z, N=None):
        return evaluate_partial_sum(self, N if N is not None else len(self.coeffs) - 1, z)


def solve(eq, select, N, c0_free=None, y0_hint=None, yp1_hint=None):
    """Locate special points, build the two lattices, and expand to order N."""
    special = locate_special_points(eq, select, y0_hint=y0_hint, yp1_hint=yp1_hint)
    pair = build_lattices(eq, special)
    diag = {"certificate_m1": special.res_m1, "certificate_p0": special.res_p0}
    if eq.is_logarithmic:
        if c0_free is None:
            raise ValidationError("logarithmic mode needs c0_free")
        coeffs = expansion_coefficients_log(eq, pair, N, c0_free, diag=diag)
        zeta = diag.pop("zeta", None)
        mode = "log"
    else:
        coeffs = expansion_coefficients(eq, pair, N, diag=diag)
        zeta = None
        mode = "general"
    diag["coeff_magnitudes"] = [abs(c) for c in coeffs]
    return ExpansionSolution(eq=eq, pair=pair, special=special, mode=mode,
                             coeffs=tuple(coeffs), c0_free=c0_free, zeta=zeta,
                             diagnostics=diag)


def evaluate_partial_sum(sol, N, z):
    """S_N(z) = sum_{k<=N} c_k Yb_k(z) with running products."""
    if N >= len(sol.coeffs):
        raise ValidationError(f"partial sum order {N} exceeds computed {len(sol.coeffs) - 1}")
    pair = sol.pair
    acc = sol.coeffs[0]
    prod = 1.0 + 0j
    for k in range(1, N + 1):
        pole = pair.yp(k)
        if abs(z - pole) <= 1e-13 * max(1.0, abs(pole)):
            raise PoleEvaluationError(z)
        prod *= (z - pair.y(k - 1)) / (z - pole)
        acc += sol.coeffs[k] * prod
    return acc


def residual(eq, sol, N, z):
    """Defect a (D S_N) - c (M S_N) - d at z (vanishes on early lattice points)."""
    f = lambda t: evaluate_partial_sum(sol, N, t)
    df = divided_difference(eq.curve, f, z)
    mf = mean_value(eq.curve, f, z)
    return eq.a(z) * df - eq.c(z) * mf - eq.d(z)


@dataclass(frozen=True)
class InterpolationReport:
    max_error: float
    errors: tuple
    skipped: tuple

    def __float__(self):
        return self.max_error


def verify_interpolation(eq, sol, N):
    """Max relative gap between S_N(y_j) and the stepwise oracle for j <= N."""
    f0 = sol.coeffs[0]
    try:
        oracle = stepwise_oracle(eq, sol.pair, N, f0=f0)
        skipped = ()
    except HitSingularLatticeError as exc:
        oracle = stepwise_oracle(eq, sol.pair, exc.index, f0=f0)
        skipped = tuple(range(exc.index + 1, N + 1))
    errs = []
    for j in range(len(oracle)):
        sj = evaluate_partial_sum(sol, N, sol.pair.y(j))
        errs.append(abs(sj - oracle[j]) / (1.0 + abs(oracle[j])))
    return InterpolationReport(max_error=max(errs), errors=tuple(errs), skipped=skipped)


def solution_to_json(sol):
    """JSON-ready dict: curve, certified special points, ranges, coefficients."""
    def c2(v):
        return [v.real, v.imag]

    sp = sol.special
    out = {
        "mode": sol.mode,
        "curve": sol.eq.curve.to_json(),
        "special_points": {
            "x_m1": c2(sp.x_m1), "x_p0": c2(sp.x_p0),
            "y_m1": c2(sp.y_m1), "y_0": c2(sp.y_0),
            "y_p0": c2(sp.y_p0), "y_p1": c2(sp.y_p1),
            "residual_m1": sp.res_m1, "residual_p0": sp.res_p0,
        },
        "lattice_ranges": {
            "unprimed": list(sol.pair.unprimed.known_range),
            "primed": list(sol.pair.primed.known_range),
        },
        "coefficients": [c2(c) for c in sol.coeffs],
        "diagnostics": [
            {"name": k, "value": v if not isinstance(v, complex) else c2(v)}
            for k, v in sorted(sol.diagnostics.items())
        ],
    }
    if sol.zeta is not None:
        out["zeta"] = c2(sol.zeta)
    if sol.c0_free is not None:
        out["c0_free"] = c2(complex(sol.c0_free))
    return out
