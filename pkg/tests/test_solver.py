import json

import numpy as np
import pytest

from ellgrid import (
    ByIndex,
    DifferenceEquation,
    Explicit,
    LinearLattice,
    Nearest,
    closed_product_coefficient,
    convert_equation_form,
    evaluate_partial_sum,
    expansion_coefficients,
    expansion_coefficients_log,
    locate_special_points,
    residual,
    solution_to_json,
    solve,
    stepwise_oracle,
    verify_interpolation,
)
from ellgrid.errors import (
    DegreeMismatchError,
    NoSpecialPointError,
    ValidationError,
)
from ellgrid.poly import Polynomial
from ellgrid.solver import build_lattices, special_point_candidates, _condition_residual

from conftest import (
    aw_fixture,
    general_fixtures,
    linear_fixture,
    log_linear_fixture,
    qgeom_fixture,
)

X = Polynomial.x()


# -- equation form conversion ----------------------------------------------------------


def test_convert_pure_difference():
    form = convert_equation_form(Polynomial((-1.0,)), Polynomial((1.0,)),
                                 Polynomial((0j,)))
    assert form.beta.is_zero()
    assert form.alpha_half == Polynomial((1.0,))


def test_convert_pure_mean():
    form = convert_equation_form(Polynomial((-0.5,)), Polynomial((-0.5,)), X)
    assert form.alpha_half.is_zero()
    assert form.beta == Polynomial((0.5,))
    assert form.gamma == -X


def test_convert_pointwise_equivalence():
    rng = np.random.default_rng(14)
    a_pt = Polynomial(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    b_pt = Polynomial(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    c_pt = Polynomial(rng.standard_normal(3))
    form = convert_equation_form(a_pt, b_pt, c_pt)
    curve = LinearLattice(h=1.0).curve()
    for _ in range(10):
        x = complex(*rng.uniform(-2, 2, 2))
        f_phi = complex(*rng.standard_normal(2))
        # original linear form solved for f(psi)
        want = -(a_pt(x) * f_phi + c_pt(x)) / b_pt(x)
        assert form.f_psi_from_f_phi(x, f_phi) == pytest.approx(want)
        # and alpha itself carries the branch factor
        phi, psi = curve.y_roots(x).ordered()
        assert form.alpha_value(curve, x) == pytest.approx(
            (b_pt(x) - a_pt(x)) * (psi - phi) / 2.0)


# -- equation construction ---------------------------------------------------------------


def test_from_polynomials_extracts_linear_parts():
    eq0, _ = qgeom_fixture()
    eq = DifferenceEquation.from_polynomials(eq0.curve, eq0.a, eq0.c, eq0.d)
    assert eq.beta == pytest.approx(eq0.beta)
    assert eq.gamma == pytest.approx(eq0.gamma)
    assert eq.delta == pytest.approx(eq0.delta)
    assert eq.eps == pytest.approx(eq0.eps)


def test_from_polynomials_rejects_missing_x2_factor():
    eq0, _ = aw_fixture()          # X2 = 1 there, so use a curve with X2 != 1
    curve = eq0.curve
    bad = X + 1.0
    # this curve has X2 = 1; build one with genuine X2 to see the rejection
    rng = np.random.default_rng(4)
    curve2 = None
    from ellgrid import BiquadraticCurve
    while curve2 is None:
        try:
            curve2 = BiquadraticCurve(rng.uniform(-2, 2, (3, 3)))
        except ValidationError:
            pass
    with pytest.raises(ValidationError):
        DifferenceEquation.from_polynomials(curve2, X, bad, Polynomial((0j,)))


def test_degree_cap_on_a():
    eq0, _ = linear_fixture()
    with pytest.raises(DegreeMismatchError):
        DifferenceEquation(eq0.curve, Polynomial((0, 0, 0, 0, 1.0)), 0, 1, 0, 0)


# -- special points -----------------------------------------------------------------------


def test_linear_fixture_candidates():
    eq, _ = linear_fixture()
    cands = special_point_candidates(eq)
    want = sorted([1.0 + 0j, -1.0 + 0j, 1j, -1j], key=lambda z: (z.real, z.imag))
    assert cands == pytest.approx(want)


def test_qgeom_candidates_reject_branch_point():
    eq, _ = qgeom_fixture()
    cands = special_point_candidates(eq)
    # x = 0 is a double root of the rationalized equation but sits on P = 0
    assert all(abs(r) > 1e-6 for r in cands)
    assert sorted(abs(r) for r in cands) == pytest.approx([2.4, 4.0])


def test_aw_fixture_rediscovers_constructed_points():
    eq, select = aw_fixture()
    cands = special_point_candidates(eq)
    for target in (select.x_m1, select.x_p0):
        assert min(abs(r - target) for r in cands) < 1e-8


def test_special_point_certificates():
    for name, eq, select in general_fixtures():
        sp = locate_special_points(eq, select)
        assert sp.res_m1 <= 1e-9
        assert sp.res_p0 <= 1e-9


def test_special_points_independent_of_d():
    eq, select = qgeom_fixture()
    perturbed = DifferenceEquation(eq.curve, eq.a, eq.beta, eq.gamma,
                                   eq.delta + 0.7, eq.eps - 1.2)
    assert special_point_candidates(eq) == pytest.approx(
        special_point_candidates(perturbed))


def test_selectors():
    eq, _ = linear_fixture()
    sp = locate_special_points(eq, Nearest(0.9 + 0.1j))
    assert sp.x_m1 == pytest.approx(1.0)            # nearest candidate
    sp2 = locate_special_points(eq, ByIndex(0, 2))
    cands = special_point_candidates(eq)
    assert sp2.x_m1 == pytest.approx(cands[0])
    assert sp2.x_p0 == pytest.approx(cands[2])
    with pytest.raises(NoSpecialPointError):
        locate_special_points(eq, Explicit(x_m1=5.0, x_p0=1.0))


def test_sextic_has_six_certified_roots():
    """Cubic a and beta != 0 on a quartic-P curve: all 6 roots are genuine."""
    from conftest import random_real_curves
    curve = random_real_curves(1, seed=2024)[0]
    assert curve.discriminant_P().degree() == 4
    a = Polynomial((0.3, -1.1, 0.4, 1.0))
    eq = DifferenceEquation(curve, a, beta=0.7, gamma=0.2, delta=1.0, eps=0.0)
    lin2 = Polynomial((eq.gamma, eq.beta)) ** 2
    sextic = 4.0 * (eq.a * eq.a) - lin2 * curve.discriminant_P()
    assert sextic.degree() == 6
    cands = special_point_candidates(eq)
    assert len(cands) == 6
    scale = sextic.max_coeff
    for r in cands:
        assert abs(sextic(r)) <= 1e-9 * scale * max(1.0, abs(r)) ** 6
        assert min(_condition_residual(eq, r, *curve.y_roots(r).as_tuple(), +1),
                   _condition_residual(eq, r, *curve.y_roots(r).as_tuple()[::-1], +1)) \
            <= 1e-9


def test_degenerate_condition_has_no_special_points():
    """a proportional to (beta x + gamma) sqrt(P): the condition is identically 0."""
    from ellgrid import GeometricLattice
    curve = GeometricLattice(a=0.0, b=1.0, q=0.5).curve()   # P = (x/2)^2
    beta, gamma = 1.0, 2.0
    a = Polynomial((0, gamma, beta)) / 4.0                  # = (beta x + gamma) x / 4
    eq = DifferenceEquation(curve, a, beta=beta, gamma=gamma, delta=1.0, eps=0.0)
    with pytest.raises(NoSpecialPointError):
        special_point_candidates(eq)


def test_stepwise_oracle_hits_singular_lattice():
    """zeta placed on the unprimed lattice: the recurrence divides by a(x_2) = 0."""
    from ellgrid.errors import HitSingularLatticeError
    curve = LinearLattice(h=1.0).curve()
    x_m1 = -2.0 + 0.1j
    x_p0 = 0.25 + 0.5j
    zeta = x_m1 + 3.0                       # = x_2 of the lattice seeded at x_m1
    a = Polynomial.from_roots([x_m1, x_p0, zeta])
    eq = DifferenceEquation(curve, a, 0.0, 0.0, 1.0, -x_m1)
    sp = locate_special_points(eq, Explicit(x_m1, x_p0),
                               y0_hint=x_m1 + 1.0, yp1_hint=x_p0 + 1.0)
    pair = build_lattices(eq, sp)
    with pytest.raises(HitSingularLatticeError) as err:
        stepwise_oracle(eq, pair, 5, f0=0.0)
    assert err.value.index == 2


def test_partial_sum_pole_guard():
    eq, select = linear_fixture()
    sol = solve(eq, select, 6)
    from ellgrid.errors import PoleEvaluationError
    with pytest.raises(PoleEvaluationError):
        evaluate_partial_sum(sol, 6, sol.pair.yp(3))


def test_log_mode_pins_xm1_to_root_of_d():
    eq, select, c0, A, zeta, hints = log_linear_fixture()
    sp = locate_special_points(eq, Nearest(0.0), **{k: v for k, v in hints.items()})
    assert sp.x_m1 == pytest.approx(-2.0 + 0.1j)    # the root of d, not the nearest


def test_build_lattices_memberships():
    for name, eq, select in general_fixtures():
        sp = locate_special_points(eq, select)
        pair = build_lattices(eq, sp)
        curve = eq.curve
        for xx, yy in ((sp.x_m1, sp.y_m1), (sp.x_m1, sp.y_0),
                       (sp.x_p0, sp.y_p0), (sp.x_p0, sp.y_p1)):
            assert abs(curve(xx, yy)) <= 1e-9 * curve.local_scale(xx, yy)
        assert pair.x(-1) == pytest.approx(sp.x_m1)
        assert pair.y(-1) == pytest.approx(sp.y_m1)
        assert pair.yp(1) == pytest.approx(sp.y_p1)


def test_swapping_pole_branch_flips_certificate_sign():
    eq, select = aw_fixture()
    sp = locate_special_points(eq, select)
    dy = sp.y_p1 - sp.y_p0
    value = eq.a(sp.x_p0) / dy - eq.c(sp.x_p0) / 2.0
    swapped = eq.a(sp.x_p0) / (-dy) - eq.c(sp.x_p0) / 2.0
    # defining condition holds as chosen; the swap lands on -c instead of 0
    assert abs(value) <= 1e-9 * abs(eq.c(sp.x_p0))
    assert swapped == pytest.approx(-eq.c(sp.x_p0))
    # equivalently the swapped ordering satisfies the x_{-1}-type condition
    assert _condition_residual(eq, sp.x_p0, sp.y_p1, sp.y_p0, +1) <= 1e-9


# -- coefficients ------------------------------------------------------------------------


def test_c0_formula():
    for name, eq, select in general_fixtures():
        sol = solve(eq, select, 6)
        xm1 = sol.pair.x(-1)
        want = -(eq.delta * xm1 + eq.eps) / (eq.beta * xm1 + eq.gamma)
        assert sol.coeffs[0] == pytest.approx(want)


def test_trivial_equation_all_zero():
    eq0, select = linear_fixture()
    eq = DifferenceEquation(eq0.curve, eq0.a, eq0.beta, eq0.gamma, 0.0, 0.0)
    sol = solve(eq, select, 8)
    assert all(c == 0 for c in sol.coeffs)
    rep = verify_interpolation(eq, sol, 8)
    assert rep.max_error == 0.0
    z = 0.37 + 2.2j
    assert residual(eq, sol, 8, z) == 0


def test_two_route_coefficients_agree():
    for name, eq, select in general_fixtures():
        sol = solve(eq, select, 10)
        c1 = sol.coeffs[1]
        for n in range(2, 11):
            prod = closed_product_coefficient(eq, sol.pair, n, c1)
            assert abs(prod - sol.coeffs[n]) <= 1e-8 * max(1.0, abs(sol.coeffs[n]))


def test_stepwise_oracle_interpolation():
    for name, eq, select in general_fixtures():
        sol = solve(eq, select, 8)
        oracle = stepwise_oracle(eq, sol.pair, 8)
        assert oracle[0] == pytest.approx(sol.coeffs[0])
        s1 = evaluate_partial_sum(sol, 1, sol.pair.y(1))
        assert abs(s1 - oracle[1]) <= 1e-9 * (1.0 + abs(oracle[1]))
        rep = verify_interpolation(eq, sol, 8)
        assert rep.max_error <= 1e-7


def test_partial_sum_basics():
    eq, select = linear_fixture()
    sol = solve(eq, select, 6)
    z = -3.1 + 0.7j
    assert evaluate_partial_sum(sol, 0, z) == sol.coeffs[0]
    for N in (1, 3, 6):
        assert evaluate_partial_sum(sol, N, sol.pair.y(0)) == pytest.approx(sol.coeffs[0])


def test_residual_vanishes_on_lattice():
    for name, eq, select in general_fixtures():
        sol = solve(eq, select, 10)
        for j in range(0, 9):
            z = sol.pair.x(j)
            assert abs(residual(eq, sol, 10, z)) <= 1e-7 * eq.scale(z)


def test_corrupted_coefficient_localizes():
    eq, select = linear_fixture()
    sol = solve(eq, select, 8)
    cs = list(sol.coeffs)
    cs[5] *= 1.01
    sol.coeffs = tuple(cs)
    rep = verify_interpolation(eq, sol, 8)
    assert max(rep.errors[:5]) <= 1e-9
    assert min(rep.errors[5:]) > 1e-6


def test_interpolation_at_order_zero():
    eq, select = qgeom_fixture()
    sol = solve(eq, select, 0)
    rep = verify_interpolation(eq, sol, 0)
    assert rep.max_error == 0.0


# -- logarithmic mode ------------------------------------------------------------------------


def test_log_telescoping_oracle():
    eq, select, c0_free, A, zeta, hints = log_linear_fixture()
    sol = solve(eq, select, 10, c0_free=c0_free, **hints)
    assert sol.mode == "log"
    assert sol.zeta == pytest.approx(A - 1.0)
    # exact solution: f(y) = 1/(y - A) + const.
    offset = c0_free - 1.0 / (sol.pair.y(0) - A)
    for j in range(11):
        got = evaluate_partial_sum(sol, 10, sol.pair.y(j))
        want = 1.0 / (sol.pair.y(j) - A) + offset
        assert abs(got - want) <= 1e-8 * (1.0 + abs(want))


def test_log_product_matches_ratio_route():
    """Elementary product vs the general recurrence run with c = 0."""
    from ellgrid.solver import _eta, _xi
    eq, select, c0_free, A, zeta, hints = log_linear_fixture()
    sol = solve(eq, select, 8, c0_free=c0_free, **hints)
    ratio = [0j, eq.delta / _eta(eq, sol.pair, 1)]
    for n in range(1, 8):
        ratio.append(-ratio[-1] * _xi(eq, sol.pair, n) / _eta(eq, sol.pair, n + 1))
    for n in range(1, 9):
        assert abs(sol.coeffs[n] - ratio[n]) <= 1e-8 * max(1.0, abs(ratio[n]))


def test_log_free_constant_shifts_only_c0():
    eq, select, _, A, zeta, hints = log_linear_fixture()
    s1 = solve(eq, select, 5, c0_free=0.0, **hints)
    s2 = solve(eq, select, 5, c0_free=3.5 - 1j, **hints)
    assert s2.coeffs[0] == pytest.approx(3.5 - 1j)
    for a, b in zip(s1.coeffs[1:], s2.coeffs[1:]):
        assert a == pytest.approx(b)


def test_log_trivial_when_d_zero():
    eq0, select, c0_free, A, zeta, hints = log_linear_fixture()
    eq = DifferenceEquation(eq0.curve, eq0.a, 0.0, 0.0, 0.0, 0.0)
    sol = solve(eq, Explicit(select.x_m1, select.x_p0), 6, c0_free=2.0, **hints)
    assert sol.coeffs[0] == pytest.approx(2.0)
    assert all(c == 0 for c in sol.coeffs[1:])


def test_log_mode_validations():
    eq, select, c0_free, A, zeta, hints = log_linear_fixture()
    sol = solve(eq, select, 3, c0_free=c0_free, **hints)
    with pytest.raises(ValidationError):
        expansion_coefficients(eq, sol.pair, 3)          # log equations take the log route
    bad = DifferenceEquation(eq.curve, eq.a, 0.0, 0.0, eq.delta, eq.eps + 1.0)
    with pytest.raises((ValidationError, NoSpecialPointError)):
        solve(bad, select, 3, c0_free=0.0, **hints)      # d(x_{-1}) != 0
    quad = DifferenceEquation(eq.curve, Polynomial((0.0, -1.0, 1.0)), 0.0, 0.0, 1.0, 0.0)
    with pytest.raises((DegreeMismatchError, ValidationError, NoSpecialPointError)):
        solve(quad, Explicit(0.0, 1.0), 3, c0_free=0.0)
    with pytest.raises(ValidationError):
        solve(eq, select, 3, **hints)                     # missing c0_free


def test_general_mode_rejects_log_route():
    eq, select = linear_fixture()
    sol = solve(eq, select, 3)
    with pytest.raises(ValidationError):
        expansion_coefficients_log(eq, sol.pair, 3, 0.0)


# -- serialization ------------------------------------------------------------------------------


def test_solution_json_shape():
    eq, select = qgeom_fixture()
    sol = solve(eq, select, 5)
    payload = solution_to_json(sol)
    text = json.dumps(payload)
    back = json.loads(text)
    assert back["mode"] == "general"
    assert len(back["coefficients"]) == 6
    assert all(len(c) == 2 for c in back["coefficients"])
    assert back["special_points"]["residual_m1"] <= 1e-9
    assert back["lattice_ranges"]["unprimed"][0] <= -1


def test_log_solution_json_has_zeta():
    eq, select, c0_free, A, zeta, hints = log_linear_fixture()
    sol = solve(eq, select, 4, c0_free=c0_free, **hints)
    payload = solution_to_json(sol)
    assert payload["mode"] == "log"
    assert payload["zeta"] == pytest.approx([(A - 1.0).real, (A - 1.0).imag])
