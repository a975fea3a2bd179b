"""Shared fixture equations: one per lattice family, built from closed forms.

Each general-mode fixture pins its special points by construction (the cubic
or quadratic `a` interpolates the defining conditions at chosen lattice
points), so tests can assert that the locator rediscovers them.
"""
import cmath

import numpy as np
import pytest
from hypothesis import settings

from ellgrid import (
    AskeyWilsonLattice,
    DifferenceEquation,
    Explicit,
    GeometricLattice,
    LinearLattice,
    solve,
)
from ellgrid.poly import Polynomial

settings.register_profile("ellgrid", deadline=None, derandomize=True)
settings.load_profile("ellgrid")

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def linear_fixture():
    """Curve (y-x)(y-x-1); a = x^2, c = 2 X2, d = x X2; specials i and 1."""
    curve = LinearLattice(h=1.0).curve()
    eq = DifferenceEquation(curve, Polynomial((0, 0, 1.0)),
                            beta=0.0, gamma=2.0, delta=1.0, eps=0.0)
    return eq, Explicit(x_m1=1j, x_p0=1.0)


def qgeom_fixture():
    """Curve (y-x)(y-x/2); a = x(x-3), c = x X2, d = (x+1) X2; specials 4 and 12/5."""
    curve = GeometricLattice(a=0.0, b=1.0, q=0.5).curve()
    eq = DifferenceEquation(curve, Polynomial((0, -3.0, 1.0)),
                            beta=1.0, gamma=0.0, delta=1.0, eps=1.0)
    return eq, Explicit(x_m1=4.0, x_p0=2.4)


def _aw_xy(z, q):
    rq = cmath.sqrt(q)
    return z + 1.0 / z, z / rq + rq / z


def aw_fixture():
    """Askey-Wilson curve (q = 1/2, P of degree 2) with a built backwards.

    x_{-1} sits at z = 3 on the z + 1/z parametrization and x'_0 at z = 5;
    the quadratic `a` interpolates the two defining conditions plus a(0) = 1.
    """
    q = 0.5
    curve = AskeyWilsonLattice(a=0.0, b=1.0, c=1.0, q=q).curve()
    beta, gamma = 0.0, 2.0
    x2 = curve.x_view()[2]

    x_m1, y_m1 = _aw_xy(3.0, q)
    y_0 = _aw_xy(3.0 * q, q)[1]           # half-step inward: y at z = z0 q^{1/2} ...
    x_p0, y_p0 = _aw_xy(5.0, q)
    y_p1 = _aw_xy(5.0 * q, q)[1]

    cpoly = Polynomial((gamma, beta)) * x2
    targets = [
        (x_m1, -cpoly(x_m1) * (y_0 - y_m1) / 2.0),
        (x_p0, cpoly(x_p0) * (y_p1 - y_p0) / 2.0),
        (0.0, 1.0),
    ]
    vand = np.array([[1.0, z, z * z] for z, _ in targets], dtype=complex)
    coeffs = np.linalg.solve(vand, np.array([v for _, v in targets], dtype=complex))
    eq = DifferenceEquation(curve, Polynomial(coeffs),
                            beta=beta, gamma=gamma, delta=1.0, eps=0.5)
    return eq, Explicit(x_m1=x_m1, x_p0=x_p0)


def general_fixtures():
    return [("linear", *linear_fixture()),
            ("qgeom", *qgeom_fixture()),
            ("askey-wilson", *aw_fixture())]


def log_linear_fixture(x_m1=-2.0 + 0.1j, pole_seed=0.25 + 0.5j, c0_free=0.3 - 0.7j):
    """Logarithmic telescoping fixture on the linear curve.

    The exact solution is f(y) = 1/(y - A) + const with A = pole_seed: the
    right side d/a is exactly the image of 1/(y - A) under the divided
    difference, so partial sums can be checked against a closed form.
    """
    curve = LinearLattice(h=1.0).curve()
    A = complex(pole_seed)
    xr = curve.x_roots(A)
    x_p0 = xr.nearest(A)                   # the x-root equal to A itself
    zeta = xr.other(x_p0)                  # the other x-root, A - 1
    delta = -1.0 / curve.y_view()[2](A)
    a = Polynomial.from_roots([x_m1, x_p0, zeta])
    eq = DifferenceEquation(curve, a, beta=0.0, gamma=0.0,
                            delta=delta, eps=-delta * x_m1)
    select = Explicit(x_m1=x_m1, x_p0=x_p0)
    hints = {"y0_hint": x_m1 + 1.0, "yp1_hint": A + 1.0}
    return eq, select, c0_free, A, zeta, hints


def log_qlattice_fixture():
    """Unit-modulus q (golden-ratio angle): the convergence-rate fixture.

    Node locus |x| = 1, pole locus |x| = 1.8, zeta at radius 1.4; for z in
    the annulus between nodes and the zeta equipotential the term ratio is
    |z| / 1.4.
    """
    q = np.exp(2j * np.pi * GOLDEN)
    curve = GeometricLattice(a=0.0, b=1.0, q=q).curve()
    x_m1, x_p0 = 1.0 + 0j, 1.8 + 0j
    zeta = 1.4 * np.exp(1j * np.pi / 3.0)
    a = Polynomial.from_roots([x_m1, x_p0, zeta])
    eq = DifferenceEquation(curve, a, beta=0.0, gamma=0.0, delta=1.0, eps=-x_m1)
    select = Explicit(x_m1=x_m1, x_p0=x_p0)
    hints = {"y0_hint": q * x_m1, "yp1_hint": q * x_p0}
    return eq, select, zeta, q, hints


def solve_log_qlattice(N=30, c0_free=0.0):
    eq, select, zeta, q, hints = log_qlattice_fixture()
    return solve(eq, select, N, c0_free=c0_free, **hints), zeta, q


def random_real_curves(count=5, seed=20240817):
    """Random real-coefficient curves in [-2, 2] that pass the validity checks."""
    from ellgrid import BiquadraticCurve

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        grid = rng.uniform(-2.0, 2.0, (3, 3))
        try:
            out.append(BiquadraticCurve(grid))
        except Exception:
            continue
    return out


@pytest.fixture(scope="session")
def linear_solution():
    eq, select = linear_fixture()
    return eq, solve(eq, select, 10)


@pytest.fixture(scope="session")
def qgeom_solution():
    eq, select = qgeom_fixture()
    return eq, solve(eq, select, 10)


@pytest.fixture(scope="session")
def aw_solution():
    eq, select = aw_fixture()
    return eq, solve(eq, select, 10)


@pytest.fixture(scope="session")
def all_general_solutions(linear_solution, qgeom_solution, aw_solution):
    return {"linear": linear_solution, "qgeom": qgeom_solution,
            "askey-wilson": aw_solution}
