"""Biquadratic curves F(x,y) = sum c[i][j] x^i y^j and their quadratic views.

A valid curve is quadratic in y for fixed x and quadratic in x for fixed y,
so both root extractions exist; the degree-<=4 polynomial P = X1^2 - 4*X0*X2
(discriminant of the y-view) governs the branch structure.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    LeadingCoefficientVanishesError,
    ValidationError,
    VerticalTangentError,
)
from .poly import Polynomial, solve_quadratic

ONCURVE_TOL = 1e-10
LEAD_TOL = 1e-12


class RootPair:
    """The two y-roots (or x-roots) of the curve over a fixed point.

    Unordered by intent: `lo`/`hi` only record which root carries the minus
    and plus sign of the principal square root of the discriminant.  Ordering
    against a continuation hint is done with `ordered`.
    """

    __slots__ = ("lo", "hi", "at", "sqrt_disc")

    def __init__(self, lo, hi, at, sqrt_disc):
        self.lo = lo
        self.hi = hi
        self.at = at
        self.sqrt_disc = sqrt_disc

    def as_tuple(self):
        return self.lo, self.hi

    def nearest(self, hint):
        return self.lo if abs(self.lo - hint) <= abs(self.hi - hint) else self.hi

    def other(self, root):
        """The partner of a known member of the pair."""
        return self.hi if abs(self.lo - root) <= abs(self.hi - root) else self.lo

    def ordered(self, hint=None):
        """(first, second) with `first` the root nearer the hint, if given."""
        if hint is None:
            return self.lo, self.hi
        if abs(self.lo - hint) <= abs(self.hi - hint):
            return self.lo, self.hi
        return self.hi, self.lo

    def __repr__(self):
        return f"RootPair(lo={self.lo!r}, hi={self.hi!r}, at={self.at!r})"


class BiquadraticCurve:
    """Immutable 3x3 coefficient grid c[i][j] multiplying x^i y^j."""

    __slots__ = ("c", "_xv", "_yv", "_P")

    def __init__(self, grid):
        c = tuple(tuple(complex(v) for v in row) for row in grid)
        if len(c) != 3 or any(len(row) != 3 for row in c):
            raise ValidationError("curve grid must be 3x3")
        object.__setattr__(self, "c", c)
        x2 = Polynomial([c[i][2] for i in range(3)])
        y2 = Polynomial([c[2][j] for j in range(3)])
        if x2.is_zero():
            raise ValidationError("X2 vanishes identically: curve is not quadratic in y")
        if y2.is_zero():
            raise ValidationError("Y2 vanishes identically: curve is not quadratic in x")
        object.__setattr__(self, "_xv", tuple(
            Polynomial([c[i][j] for i in range(3)]) for j in range(3)))
        object.__setattr__(self, "_yv", tuple(
            Polynomial([c[i][j] for j in range(3)]) for i in range(3)))
        x0, x1, x2 = self._xv
        P = x1 * x1 - 4.0 * x0 * x2
        if P.is_zero():
            raise ValidationError("P = X1^2 - 4 X0 X2 vanishes identically (double line)")
        object.__setattr__(self, "_P", P)

    def __setattr__(self, name, value):
        raise AttributeError("BiquadraticCurve is immutable")

    def __repr__(self):
        return f"BiquadraticCurve({[list(r) for r in self.c]!r})"

    # -- views ------------------------------------------------------------------

    def x_view(self):
        """(X0, X1, X2) with F(x,y) = X0(x) + X1(x) y + X2(x) y^2."""
        return self._xv

    def y_view(self):
        """(Y0, Y1, Y2) with F(x,y) = Y0(y) + Y1(y) x + Y2(y) x^2."""
        return self._yv

    def discriminant_P(self):
        """P = X1^2 - 4 X0 X2, degree <= 4."""
        return self._P

    @property
    def scale(self):
        return max(abs(v) for row in self.c for v in row)

    # -- evaluation ---------------------------------------------------------------

    def __call__(self, x, y):
        acc = 0j
        for i in range(2, -1, -1):
            inner = 0j
            for j in range(2, -1, -1):
                inner = inner * y + self.c[i][j]
            acc = acc * x + inner
        return acc

    def dF_dx(self, x, y):
        acc = 0j
        for j in range(3):
            acc += (self.c[1][j] + 2.0 * self.c[2][j] * x) * y ** j
        return acc

    def dF_dy(self, x, y):
        acc = 0j
        for i in range(3):
            acc += (self.c[i][1] + 2.0 * self.c[i][2] * y) * x ** i
        return acc

    def local_scale(self, x, y):
        return self.scale * max(1.0, abs(x)) ** 2 * max(1.0, abs(y)) ** 2

    def contains(self, x, y, tol=ONCURVE_TOL):
        return abs(self(x, y)) <= tol * self.local_scale(x, y)

    # -- root extraction -------------------------------------------------------------

    def y_roots(self, x, branch_hint=None):
        """Both roots of F(x, .) = 0 as a RootPair.

        With a branch hint the pair is unchanged (it is unordered); use
        `.ordered(hint)` on the result for continuation.  Raises
        LeadingCoefficientVanishes when X2(x) ~ 0 (a lattice singularity).
        """
        x0, x1, x2 = self._xv
        lead = x2(x)
        if abs(lead) <= LEAD_TOL * x2.max_coeff * max(1.0, abs(x)) ** x2.degree():
            raise LeadingCoefficientVanishesError(x)
        lo, hi, s = solve_quadratic(x0(x), x1(x), lead)
        pair = RootPair(lo, hi, x, s)
        if branch_hint is not None:
            first, second = pair.ordered(branch_hint)
            return RootPair(first, second, x, s)
        return pair

    def x_roots(self, y, branch_hint=None):
        """Both roots of F(., y) = 0; mirror of y_roots."""
        y0, y1, y2 = self._yv
        lead = y2(y)
        if abs(lead) <= LEAD_TOL * y2.max_coeff * max(1.0, abs(y)) ** y2.degree():
            raise LeadingCoefficientVanishesError(y)
        lo, hi, s = solve_quadratic(y0(y), y1(y), lead)
        pair = RootPair(lo, hi, y, s)
        if branch_hint is not None:
            first, second = pair.ordered(branch_hint)
            return RootPair(first, second, y, s)
        return pair

    def other_y(self, x, y):
        """The second y-root over x, via the Vieta sum (no square root)."""
        x0, x1, x2 = self._xv
        lead = x2(x)
        if abs(lead) <= LEAD_TOL * x2.max_coeff * max(1.0, abs(x)) ** x2.degree():
            raise LeadingCoefficientVanishesError(x)
        return -x1(x) / lead - y

    def other_x(self, y, x):
        """The second x-root over y, via the Vieta sum."""
        y0, y1, y2 = self._yv
        lead = y2(y)
        if abs(lead) <= LEAD_TOL * y2.max_coeff * max(1.0, abs(y)) ** y2.degree():
            raise LeadingCoefficientVanishesError(y)
        return -y1(y) / lead - x

    def implicit_dy_dx(self, x, y, tol=1e-8):
        """dy/dx of the branch through (x, y): -(dF/dx)/(dF/dy).

        The point must lie on the curve; a vanishing dF/dy means a vertical
        tangent (branch point) where the derivative does not exist.
        """
        if not self.contains(x, y, tol=tol):
            raise ValidationError(f"({x}, {y}) is not on the curve")
        fy = self.dF_dy(x, y)
        guard = self.scale * max(1.0, abs(x)) ** 2 * max(1.0, abs(y))
        if abs(fy) <= 1e-10 * guard:
            raise VerticalTangentError(f"dF/dy vanishes at ({x}, {y})")
        return -self.dF_dx(x, y) / fy

    # -- serialization ----------------------------------------------------------------

    def to_json(self):
        return [[[v.real, v.imag] for v in row] for row in self.c]

    @classmethod
    def from_json(cls, data):
        try:
            grid = [[complex(v[0], v[1]) for v in row] for row in data]
        except (TypeError, IndexError) as exc:
            raise ValidationError(f"curve grid must be 3x3 of [re, im] pairs: {exc}")
        return cls(grid)


def fit_biquadratic(points):
    """Least-squares biquadratic through on-curve samples (SVD null vector).

    `points` is an iterable of (x, y) pairs, at least 9 of them in general
    position; the returned curve has |F| residual below 1e-10 * scale at every
    sample, otherwise ValidationError is raised.
    """
    pts = [(complex(x), complex(y)) for x, y in points]
    if len(pts) < 9:
        raise ValidationError("need at least 9 points to fit a biquadratic")
    rows = []
    for x, y in pts:
        rows.append([x ** i * y ** j for i in range(3) for j in range(3)])
    m = np.array(rows, dtype=complex)
    m = m / max(1.0, np.abs(m).max())
    _, _, vh = np.linalg.svd(m)
    coeffs = vh[-1].conj()
    grid = [[coeffs[3 * i + j] for j in range(3)] for i in range(3)]
    curve = BiquadraticCurve(grid)
    for x, y in pts:
        if not curve.contains(x, y):
            raise ValidationError("fit residual exceeds 1e-10: points are not biquadratic")
    return curve
