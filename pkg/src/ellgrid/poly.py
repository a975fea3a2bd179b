"""Complex-coefficient polynomials and rational functions.

Coefficients are stored densely in ascending degree order and trimmed so the
leading coefficient is nonzero (relative to the largest modulus).  Everything
is immutable and pure; values can be shared freely between threads.
"""
from __future__ import annotations

import cmath

import numpy as np

from .errors import ConstantPolynomialError, PoleEvaluationError, ZeroDivisorError

# The scalar field.  All quantities in the library are algebraic over the curve
# coefficients, so double-precision complex is used throughout.
Scalar = complex

ZERO_TOL = 1e-13        # trailing coefficients below this (relative) are trimmed
EVAL_TOL = 1e-12        # "effectively zero" threshold for pole/deflation logic


def _as_scalar(v):
    return complex(v)


class Polynomial:
    """Dense univariate polynomial over the complex doubles."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=(0j,)):
        cs = [_as_scalar(c) for c in coeffs]
        if not cs:
            cs = [0j]
        top = max(abs(c) for c in cs)
        if top == 0.0:
            cs = [0j]
        else:
            while len(cs) > 1 and abs(cs[-1]) <= ZERO_TOL * top:
                cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, c):
        return cls((c,))

    @classmethod
    def x(cls):
        return cls((0j, 1.0))

    @classmethod
    def from_roots(cls, roots, leading=1.0):
        p = cls((leading,))
        for r in roots:
            p = p * cls((-_as_scalar(r), 1.0))
        return p

    # -- basic queries -----------------------------------------------------

    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def max_coeff(self):
        return max(abs(c) for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Polynomial((other,))
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    # -- evaluation ----------------------------------------------------------

    def __call__(self, z):
        """Horner evaluation; `z` may be a scalar or a numpy array."""
        if isinstance(z, np.ndarray):
            acc = np.full_like(z, self.coeffs[-1], dtype=complex)
            for c in reversed(self.coeffs[:-1]):
                acc = acc * z + c
            return acc
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc

    def derivative(self):
        if self.degree() == 0:
            return Polynomial((0j,))
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, float, complex)):
            return Polynomial((other,))
        return None

    def __add__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        n = max(len(self.coeffs), len(q.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        for k, c in enumerate(q.coeffs):
            a[k] += c
        return Polynomial(a)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return self + (-q)

    def __rsub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return q + (-self)

    def __mul__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        out = [0j] * (len(self.coeffs) + len(q.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(q.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Polynomial((1.0,))
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex)):
            if other == 0:
                raise ZeroDivisorError("division by zero scalar")
            return Polynomial(tuple(c / other for c in self.coeffs))
        if isinstance(other, Polynomial):
            return RationalFunction(self, other)
        return NotImplemented

    def __divmod__(self, other):
        """Long division; returns (quotient, remainder)."""
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        if q.is_zero():
            raise ZeroDivisorError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = q.degree()
        lead = q.coeffs[-1]
        quot = [0j] * max(1, len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            f = rem[k] / lead
            quot[k - dq] = f
            if f != 0:
                for j, b in enumerate(q.coeffs):
                    rem[k - dq + j] -= f * b
        return Polynomial(quot), Polynomial(rem[:dq] or [0j])

    # -- roots ----------------------------------------------------------------

    def roots(self):
        """All complex roots with multiplicity, Newton-polished, sorted by (Re, Im).

        Raises ConstantPolynomialError for degree 0.  Degree 1 and 2 are solved
        directly (the quadratic with the stable classic/product pairing); higher
        degrees go through companion-matrix eigenvalues.
        """
        d = self.degree()
        if d < 1:
            raise ConstantPolynomialError("cannot take roots of a constant")
        if d == 1:
            rs = [-self.coeffs[0] / self.coeffs[1]]
        elif d == 2:
            lo, hi, _ = solve_quadratic(*self.coeffs)
            rs = [lo, hi]
        else:
            monic = [c / self.coeffs[-1] for c in self.coeffs]
            comp = np.zeros((d, d), dtype=complex)
            comp[1:, :-1] = np.eye(d - 1)
            comp[:, -1] = [-c for c in monic[:-1]]
            rs = list(np.linalg.eigvals(comp))
        dp = self.derivative()
        rs = [_newton_polish(self, dp, complex(r)) for r in rs]
        return sorted(rs, key=lambda r: (r.real, r.imag))


def _newton_polish(p, dp, z, max_iter=12):
    """Refine a root estimate, accepting steps only while |p| decreases."""
    fz = abs(p(z))
    for _ in range(max_iter):
        if fz == 0.0:
            break
        dz = dp(z)
        if dz == 0:
            break
        z2 = z - p(z) / dz
        f2 = abs(p(z2))
        if f2 < fz:
            z, fz = z2, f2
        else:
            break
    return z


def solve_quadratic(c0, c1, c2):
    """Roots of c2*t**2 + c1*t + c0 with the stable classic/product pairing.

    Returns (lo, hi, sqrt_disc) where hi = (-c1 + s)/(2*c2), lo = (-c1 - s)/(2*c2)
    for s the principal square root of the discriminant; the larger-magnitude
    root is computed by the classic formula and the other from the product.
    """
    c0, c1, c2 = _as_scalar(c0), _as_scalar(c1), _as_scalar(c2)
    if c2 == 0:
        raise ZeroDivisorError("quadratic with zero leading coefficient")
    disc = c1 * c1 - 4.0 * c2 * c0
    s = cmath.sqrt(disc)
    # sign choice avoiding cancellation in c1 + sgn*s
    sgn = 1.0 if (c1.real * s.real + c1.imag * s.imag) >= 0.0 else -1.0
    t = -0.5 * (c1 + sgn * s)
    big = t / c2
    small = (c0 / t) if t != 0 else big
    if sgn > 0:         # big carries the -s branch
        lo, hi = big, small
    else:
        lo, hi = small, big
    return lo, hi, s


class RationalFunction:
    """Lazy ratio of two polynomials.

    Common roots of numerator and denominator may persist; evaluation at a
    shared root deflates locally (L'Hopital) so the value agrees with the
    reduced form wherever that is defined.
    """

    __slots__ = ("numer", "denom")

    def __init__(self, numer, denom):
        numer = numer if isinstance(numer, Polynomial) else Polynomial._coerce(numer)
        denom = denom if isinstance(denom, Polynomial) else Polynomial._coerce(denom)
        if numer is None or denom is None:
            raise TypeError("numer/denom must be polynomials or scalars")
        if denom.is_zero():
            raise ZeroDivisorError("rational function with zero denominator")
        object.__setattr__(self, "numer", numer)
        object.__setattr__(self, "denom", denom)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    def __repr__(self):
        return f"RationalFunction({self.numer!r}, {self.denom!r})"

    def degree_pair(self):
        return self.numer.degree(), self.denom.degree()

    def __call__(self, z):
        num, den = self.numer, self.denom
        growth = max(1.0, abs(z)) ** den.degree()
        dz = den(z)
        if abs(dz) > EVAL_TOL * den.max_coeff * growth:
            return num(z) / dz
        # 0/0 candidate: walk down derivatives (local deflation)
        for _ in range(den.degree() + 1):
            nz = num(z)
            ngrowth = max(1.0, abs(z)) ** num.degree()
            if abs(nz) > EVAL_TOL * max(num.max_coeff, 1e-300) * ngrowth:
                raise PoleEvaluationError(z)
            num, den = num.derivative(), den.derivative()
            dz = den(z)
            if abs(dz) > EVAL_TOL * den.max_coeff * max(1.0, abs(z)) ** max(den.degree(), 0):
                return num(z) / dz
        raise PoleEvaluationError(z)

    # -- arithmetic (cross-multiplied, no reduction) ---------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalFunction):
            return other
        p = Polynomial._coerce(other)
        if p is None:
            return None
        return RationalFunction(p, Polynomial((1.0,)))

    def __add__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return RationalFunction(self.numer * q.denom + q.numer * self.denom,
                                self.denom * q.denom)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.numer, self.denom)

    def __sub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return self + (-q)

    def __rsub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return q + (-self)

    def __mul__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return RationalFunction(self.numer * q.numer, self.denom * q.denom)

    __rmul__ = __mul__

    def __truediv__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        if q.numer.is_zero():
            raise ZeroDivisorError("division by zero rational function")
        return RationalFunction(self.numer * q.denom, self.denom * q.numer)

    def __rtruediv__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return q / self
