import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellgrid.errors import (
    ConstantPolynomialError,
    PoleEvaluationError,
    ZeroDivisorError,
)
from ellgrid.poly import Polynomial, RationalFunction, solve_quadratic

X = Polynomial.x()


def test_difference_of_squares():
    assert (X + 1) * (X - 1) == X * X - 1


def test_additive_identity():
    p = Polynomial((3.0, 0.0, 2.0 + 1j))
    assert p + Polynomial((0j,)) == p
    assert p + 0 == p


def test_removable_factor_eval():
    f = (X * X - 1) / (X - 1)
    assert f(3.0) == pytest.approx(4.0)


def test_removable_pole_deflation():
    f = (X * X - 1) / (X - 1)
    assert f(1.0) == pytest.approx(2.0)


def test_nonremovable_pole_raises():
    f = RationalFunction(Polynomial((1.0,)), X - 2)
    with pytest.raises(PoleEvaluationError) as err:
        f(2.0)
    assert err.value.at == 2.0


def test_eval_simple():
    p = X * X + 1
    assert p(1j) == pytest.approx(0.0)


def test_division_by_zero_polynomial():
    with pytest.raises(ZeroDivisorError):
        RationalFunction(X, Polynomial((0j,)))
    with pytest.raises(ZeroDivisorError):
        divmod(X, Polynomial((0j,)))


def test_roots_simple():
    got = (X * X - 3 * X + 2).roots()
    assert got == pytest.approx([1.0, 2.0])
    got = sorted((X * X + 1).roots(), key=lambda z: z.imag)
    assert got == pytest.approx([-1j, 1j])


def test_roots_constant_raises():
    with pytest.raises(ConstantPolynomialError):
        Polynomial((5.0,)).roots()


def test_divmod_roundtrip():
    p = Polynomial((1.0, -2.0, 0.5, 3.0, 1j))
    q = Polynomial((2.0, 1j, 1.0))
    quo, rem = divmod(p, q)
    back = quo * q + rem
    assert max(abs(a - b) for a, b in zip(back.coeffs, p.coeffs)) < 1e-13
    assert rem.degree() < q.degree()


def test_normalization_trims_leading_noise():
    p = Polynomial((1.0, 2.0, 1e-16))
    assert p.degree() == 1


def test_quadratic_pairing_is_stable():
    # classic cancellation case: the small root must come from the product
    lo, hi, _ = solve_quadratic(1.0, -1e8, 1.0)
    small, big = sorted((lo, hi), key=abs)
    assert abs(small - 1e-8) < 1e-16
    assert abs(big - 1e8) < 1e-4


def test_derivative():
    p = Polynomial((1.0, 2.0, 3.0))
    assert p.derivative() == Polynomial((2.0, 6.0))


complex_coeff = st.complex_numbers(max_magnitude=1.0, allow_nan=False,
                                   allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(complex_coeff, min_size=2, max_size=9),
       st.complex_numbers(min_magnitude=0.2, max_magnitude=1.0,
                          allow_nan=False, allow_infinity=False))
def test_root_product_reconstruction(body, lead):
    p = Polynomial(list(body) + [lead])
    if p.degree() < 1:
        return
    roots = p.roots()
    recon = Polynomial.from_roots(roots, leading=p.coeffs[-1])
    scale = p.max_coeff
    assert len(recon.coeffs) == len(p.coeffs)
    for a, b in zip(recon.coeffs, p.coeffs):
        assert abs(a - b) <= 1e-8 * scale


@settings(max_examples=40, deadline=None)
@given(st.lists(complex_coeff, min_size=1, max_size=6),
       st.lists(complex_coeff, min_size=1, max_size=6),
       st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False))
def test_eval_is_multiplicative(ac, bc, z):
    p, q = Polynomial(ac), Polynomial(bc)
    lhs = (p * q)(z)
    rhs = p(z) * q(z)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))


@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=3.0,
                          allow_nan=False, allow_infinity=False))
def test_quadratic_roots_satisfy_equation(c0, c1, c2):
    lo, hi, _ = solve_quadratic(c0, c1, c2)
    scale = max(abs(c0), abs(c1), abs(c2))
    for r in (lo, hi):
        val = (c2 * r + c1) * r + c0
        assert abs(val) <= 1e-10 * scale * max(1.0, abs(r)) ** 2


@settings(max_examples=30, deadline=None)
@given(st.lists(complex_coeff, min_size=3, max_size=9),
       st.complex_numbers(min_magnitude=0.2, max_magnitude=1.0,
                          allow_nan=False, allow_infinity=False))
def test_polished_root_residual(body, lead):
    p = Polynomial(list(body) + [lead])
    if p.degree() < 1:
        return
    for r in p.roots():
        bound = 1e-10 * p.max_coeff * max(1.0, abs(r)) ** p.degree()
        assert abs(p(r)) <= bound
