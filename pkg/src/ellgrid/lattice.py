"""Elliptic lattices: walk a biquadratic curve by alternating second roots.

Successive points are (x_n, y_n), (x_n, y_{n+1}), (x_{n+1}, y_{n+1}); second
roots always come from the Vieta sum identity (subtract the known root from
-X1/X2 or -Y1/Y2), never from a fresh square root, so there is no branch
ambiguity and half the cancellation error.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

from .curve import BiquadraticCurve, fit_biquadratic
from .errors import (
    LatticeSingularityError,
    LatticeStagnationError,
    LeadingCoefficientVanishesError,
    ValidationError,
)

STAGNATION_TOL = 1e-13
STAGNATION_RUN = 3


class LatticeSpec:
    """Seed of a lattice: the curve and the starting point (x0, y0).

    y0 may be given directly, or picked from the root pair at x0 through the
    y1 selector (`y1_index` in {0, 1} or a complex `y1_hint` choosing which
    root plays y1; y0 is then the Vieta complement).  Given both, consistency
    is checked: the forward/backward walk is fully determined by (x0, y0).
    """

    __slots__ = ("curve", "x0", "y0")

    def __init__(self, curve, x0, y0=None, y1_index=None, y1_hint=None):
        x0 = complex(x0)
        if y0 is None:
            pair = curve.y_roots(x0)
            if y1_hint is not None:
                y1 = pair.nearest(complex(y1_hint))
            elif y1_index is not None:
                y1 = pair.as_tuple()[int(y1_index)]
            else:
                raise ValidationError("need y0 or a y1 selector to seed a lattice")
            y0 = pair.other(y1)
        else:
            y0 = complex(y0)
            if y1_index is not None or y1_hint is not None:
                y1 = curve.other_y(x0, y0)
                pair = curve.y_roots(x0)
                want = (pair.as_tuple()[int(y1_index)] if y1_index is not None
                        else pair.nearest(complex(y1_hint)))
                if abs(want - y1) > 1e-8 * max(1.0, abs(y1)):
                    raise ValidationError("y1 selector contradicts the Vieta complement of y0")
        if not curve.contains(x0, y0):
            raise ValidationError(f"seed ({x0}, {y0}) does not lie on the curve")
        object.__setattr__(self, "curve", curve)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "y0", y0)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeSpec is immutable")

    def __repr__(self):
        return f"LatticeSpec(x0={self.x0!r}, y0={self.y0!r})"


def _polish_y(curve, x, y):
    """One or two guarded Newton steps pulling y back onto F(x, .) = 0.

    The Vieta complement picks the branch; this only removes accumulated
    rounding, accepting a correction only while |F| decreases (so branch
    points, where dF/dy ~ 0, are left alone).
    """
    fv = curve(x, y)
    for _ in range(2):
        dfy = curve.dF_dy(x, y)
        if dfy == 0:
            return y
        y2 = y - fv / dfy
        f2 = curve(x, y2)
        if abs(f2) < abs(fv):
            y, fv = y2, f2
        else:
            return y
    return y


def _polish_x(curve, x, y):
    fv = curve(x, y)
    for _ in range(2):
        dfx = curve.dF_dx(x, y)
        if dfx == 0:
            return x
        x2 = x - fv / dfx
        f2 = curve(x2, y)
        if abs(f2) < abs(fv):
            x, fv = x2, f2
        else:
            return x
    return x


class LatticePair:
    """Indexed sequences {x_n}, {y_n}, materialized lazily in both directions.

    Caches only grow; share across threads after generating the range you need
    (generate-then-share).
    """

    def __init__(self, spec):
        self.spec = spec
        self._x = {0: spec.x0}
        self._y = {0: spec.y0}
        self._lo = 0     # materialized index range [lo, hi]
        self._hi = 0

    @property
    def curve(self):
        return self.spec.curve

    @property
    def known_range(self):
        return self._lo, self._hi

    def x(self, n):
        self.ensure(n, n)
        return self._x[n]

    def y(self, n):
        self.ensure(n, n)
        return self._y[n]

    def point(self, n):
        self.ensure(n, n)
        return self._x[n], self._y[n]

    def ensure(self, n_min, n_max):
        while self._hi < n_max:
            self._step_forward()
        while self._lo > n_min:
            self._step_backward()

    def _step_forward(self):
        n = self._hi
        xn, yn = self._x[n], self._y[n]
        try:
            y_next = _polish_y(self.curve, xn, self.curve.other_y(xn, yn))
            x_next = _polish_x(self.curve, self.curve.other_x(y_next, xn), y_next)
        except LeadingCoefficientVanishesError as exc:
            raise LatticeSingularityError(n + 1, f"step {n}->{n+1}: {exc}") from exc
        self._x[n + 1] = x_next
        self._y[n + 1] = y_next
        self._hi = n + 1
        self._check_stagnation(direction=+1)

    def _step_backward(self):
        n = self._lo
        xn, yn = self._x[n], self._y[n]
        try:
            x_prev = _polish_x(self.curve, self.curve.other_x(yn, xn), yn)
            y_prev = _polish_y(self.curve, x_prev, self.curve.other_y(x_prev, yn))
        except LeadingCoefficientVanishesError as exc:
            raise LatticeSingularityError(n - 1, f"step {n}->{n-1}: {exc}") from exc
        self._x[n - 1] = x_prev
        self._y[n - 1] = y_prev
        self._lo = n - 1
        self._check_stagnation(direction=-1)

    def _check_stagnation(self, direction):
        end = self._hi if direction > 0 else self._lo
        for k in range(STAGNATION_RUN):
            a = end - direction * k
            b = a - direction
            if b < self._lo or b > self._hi or a < self._lo or a > self._hi:
                return
            guard = STAGNATION_TOL * max(1.0, abs(self._x[a]), abs(self._y[a]))
            if abs(self._x[a] - self._x[b]) >= guard or abs(self._y[a] - self._y[b]) >= guard:
                return
        raise LatticeStagnationError(end)

    # -- invariants ---------------------------------------------------------------

    def on_curve_residual(self, n):
        """|F(x_n, y_n)| and |F(x_n, y_{n+1})| relative to the local scale."""
        self.ensure(n, n + 1)
        c = self.curve
        s1 = c.local_scale(self._x[n], self._y[n])
        s2 = c.local_scale(self._x[n], self._y[n + 1])
        return (abs(c(self._x[n], self._y[n])) / s1,
                abs(c(self._x[n], self._y[n + 1])) / s2)


def step_forward(lat, n):
    """(x_{n+1}, y_{n+1}) from the cached walk (materializing as needed)."""
    lat.ensure(n, n + 1)
    return lat.point(n + 1)


def step_backward(lat, n):
    """(x_{n-1}, y_{n-1}) from the cached walk."""
    lat.ensure(n - 1, n)
    return lat.point(n - 1)


def generate(spec, n_min, n_max):
    """Materialize a lattice over [n_min, n_max] (the seed sits at index 0)."""
    if not (n_min <= 0 <= n_max):
        raise ValidationError("generate needs n_min <= 0 <= n_max")
    lat = LatticePair(spec)
    lat.ensure(n_min, n_max)
    return lat


# -- closed-form oracle lattices ----------------------------------------------------
#
# The three degenerate families have elementary closed forms; they are used as
# test oracles and as convenient fixture builders.

@dataclass(frozen=True)
class LinearLattice:
    """x_n = x0 + n h, y_n = y0 + n h on (y - x - k)(y - x - k - h) = 0, k = y0 - x0."""

    h: complex = 1.0
    x0: complex = 0.0
    y0: complex | None = None

    def point(self, n):
        y0 = self.x0 if self.y0 is None else self.y0
        return complex(self.x0 + n * self.h), complex(y0 + n * self.h)

    def curve(self):
        y0 = self.x0 if self.y0 is None else self.y0
        k = complex(y0 - self.x0)
        h = complex(self.h)
        # (y - x - k)(y - x - k - h)
        return BiquadraticCurve([
            [k * (k + h), -(2.0 * k + h), 1.0],
            [2.0 * k + h, -2.0, 0.0],
            [1.0, 0.0, 0.0],
        ])

    def spec(self):
        x0, y0 = self.point(0)
        return LatticeSpec(self.curve(), x0, y0)


@dataclass(frozen=True)
class GeometricLattice:
    """x_n = y_n = a + b q^n on (y - x)(y - q x - a(1-q)) = 0."""

    a: complex
    b: complex
    q: complex

    def point(self, n):
        v = complex(self.a + self.b * self.q ** n)
        return v, v

    def curve(self):
        a, q = complex(self.a), complex(self.q)
        # (y - x)(y - q*x - a*(1-q))
        return BiquadraticCurve([
            [0.0, -a * (1.0 - q), 1.0],
            [a * (1.0 - q), -(1.0 + q), 0.0],
            [q, 0.0, 0.0],
        ])

    def spec(self):
        x0, y0 = self.point(0)
        return LatticeSpec(self.curve(), x0, y0)


@dataclass(frozen=True)
class AskeyWilsonLattice:
    """x_n = a + b q^n + c q^-n with the y-sequence at half-integer shifts.

    y_n = a + b q^(n-1/2) + c q^(1/2-n), so (x_n, y_n) and (x_n, y_{n+1}) lie
    on one biquadratic whose discriminant P has genuine degree 2.
    """

    a: complex
    b: complex
    c: complex
    q: complex

    def point(self, n):
        a, b, c, q = (complex(v) for v in (self.a, self.b, self.c, self.q))
        rq = cmath.sqrt(q)
        return (a + b * q ** n + c * q ** (-n),
                a + (b / rq) * q ** n + (c * rq) * q ** (-n))

    def curve(self):
        a, b, c, q = (complex(v) for v in (self.a, self.b, self.c, self.q))
        rq = cmath.sqrt(q)
        s = rq + 1.0 / rq
        t2 = q + 1.0 / q - 2.0
        # y^2 - [2a + s(x-a)] y + a^2 + a s (x-a) + (x-a)^2 + b c t2
        return BiquadraticCurve([
            [a * a * (2.0 - s) + b * c * t2, -a * (2.0 - s), 1.0],
            [a * (s - 2.0), -s, 0.0],
            [1.0, 0.0, 0.0],
        ])

    def spec(self):
        x0, y0 = self.point(0)
        return LatticeSpec(self.curve(), x0, y0)


def fit_curve_to_lattice(points_fn, n_lo=-4, n_hi=6):
    """Recover the biquadratic carrying a closed-form lattice.

    `points_fn(n) -> (x_n, y_n)`; both (x_n, y_n) and (x_n, y_{n+1}) rows are
    fitted so the grid is pinned up to scale.  Two distinct biquadratics can
    share up to 16 points, so the default range supplies more than that.
    """
    samples = []
    for n in range(n_lo, n_hi + 1):
        xn, yn = points_fn(n)
        _, yn1 = points_fn(n + 1)
        samples.append((xn, yn))
        samples.append((xn, yn1))
    return fit_biquadratic(samples)


def write_lattice_csv(lat, n_min, n_max, stream):
    """Dump columns n, re/im of x_n and y_n; header row, LF line endings."""
    lat.ensure(n_min, n_max)
    stream.write("n,re_x,im_x,re_y,im_y\n")
    for n in range(n_min, n_max + 1):
        xn, yn = lat.point(n)
        stream.write(f"{n},{xn.real!r},{xn.imag!r},{yn.real!r},{yn.imag!r}\n")
