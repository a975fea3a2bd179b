"""Elliptic lattices on biquadratic curves and their difference calculus."""

from .curve import BiquadraticCurve, RootPair, fit_biquadratic
from .diffops import (
    BasisFunction,
    BasisPair,
    diff_constant,
    divided_difference,
    divided_difference_rational,
    identity_samples,
    mean_poly_direct,
    mean_poly_value,
    mean_rational,
    mean_value,
    verify_diff_basis_identity,
)
from .lattice import (
    AskeyWilsonLattice,
    GeometricLattice,
    LatticePair,
    LatticeSpec,
    LinearLattice,
    fit_curve_to_lattice,
    generate,
    step_backward,
    step_forward,
)
from .poly import Polynomial, RationalFunction, Scalar, solve_quadratic
from .solver import (
    ByIndex,
    DifferenceEquation,
    ExpansionSolution,
    Explicit,
    Nearest,
    SpecialPoints,
    SymmetricForm,
    build_lattices,
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
from .convergence import (
    RatePredictor,
    RateReport,
    detect_small_divisors,
    empirical_rate,
    path_integral,
    period_quadrature,
    predicted_rate,
    rate_map,
    term_magnitudes,
    trace_lattice_locus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
