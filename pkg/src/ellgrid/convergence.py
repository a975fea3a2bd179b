"""Geometric decay of expansion terms vs the potential-theoretic prediction.

The empirical rate is the least-squares slope of log |c_n Yb_n(z)| against n.
The prediction integrates dv/sqrt(P) numerically: omega around the closed
locus filled by the x-lattice, and the uniformizing coordinate xi(z) along a
branch-tracked path from a basepoint, giving

    rate(z) = exp(-Im 2 pi (xi_z - xi_zeta) / omega)

for the logarithmic case (zeta the third root of a).  Divisions by
y_{-1} - y_{n-2} can get sporadically tiny when (n-1)h nearly returns to a
period multiple; those indices are detected and excluded from rate fits.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import (
    PathThroughBranchPointError,
    PoleEvaluationError,
    RefinePathError,
    ValidationError,
    WindowTooSmallError,
)

COARSE_STEP = 0.5       # relative sqrt(P) jump that marks an under-sampled path


# -- small divisors --------------------------------------------------------------------


def detect_small_divisors(pair, N, threshold):
    """Indices n <= N where |y_{-1} - y_{n-2}| dips below threshold * median."""
    if N < 3 or threshold <= 0:
        return []
    ym1 = pair.y(-1)
    mags = {n: abs(ym1 - pair.y(n - 2)) for n in range(3, N + 1)}
    med = float(np.median(list(mags.values())))
    return [(n, m) for n, m in sorted(mags.items()) if m < threshold * med]


# -- empirical rate ---------------------------------------------------------------------


@dataclass(frozen=True)
class RateReport:
    empirical_rate: float
    predicted_rate: float | None
    window: tuple
    smalldiv_flags: tuple
    z: complex
    flags: tuple = ()


def term_magnitudes(sol, z, n_max):
    """|c_n Yb_n(z)| for n = 1..n_max (index 0 of the result is n = 1)."""
    if n_max >= len(sol.coeffs):
        raise ValidationError(f"solution has only {len(sol.coeffs) - 1} coefficients")
    pair = sol.pair
    out = []
    prod = 1.0 + 0j
    for k in range(1, n_max + 1):
        pole = pair.yp(k)
        if abs(z - pole) <= 1e-13 * max(1.0, abs(pole)):
            raise PoleEvaluationError(z)
        prod *= (z - pair.y(k - 1)) / (z - pole)
        out.append(abs(sol.coeffs[k] * prod))
    return out


def empirical_rate(sol, z, n_min, n_max, smalldiv_threshold=0.05, predicted=None):
    """Least-squares geometric ratio of the terms over [n_min, n_max].

    Small-divisor indices (and exact zeros) are excluded from the fit; at
    least five usable terms are required.
    """
    if n_max - n_min < 5:
        raise WindowTooSmallError(f"window [{n_min}, {n_max}] is shorter than 5")
    mags = term_magnitudes(sol, z, n_max)
    flagged = detect_small_divisors(sol.pair, n_max, smalldiv_threshold)
    excluded = {n for n, _ in flagged}
    ns, logs = [], []
    for n in range(max(n_min, 1), n_max + 1):
        m = mags[n - 1]
        if n in excluded or m == 0.0:
            continue
        ns.append(n)
        logs.append(np.log(m))
    if len(ns) < 5:
        raise WindowTooSmallError(f"only {len(ns)} usable terms in [{n_min}, {n_max}]")
    slope = float(np.polyfit(np.asarray(ns, dtype=float), np.asarray(logs), 1)[0])
    rho = float(np.exp(slope))
    flags = ("NotConverging",) if rho >= 1.0 else ()
    return RateReport(empirical_rate=rho, predicted_rate=predicted,
                      window=(n_min, n_max), smalldiv_flags=tuple(flagged),
                      z=complex(z), flags=flags)


# -- branch-tracked quadrature of dv / sqrt(P) ----------------------------------------------


def _tracked_sqrt(values, w_start=None):
    """Continuous branch of sqrt along sampled P values.

    Flip events are decided between raw principal neighbors and accumulated,
    so one crossing of the principal cut flips everything after it exactly
    once.  Returns (tracked values, under-sampled flag).
    """
    w = np.sqrt(np.asarray(values, dtype=complex))
    if len(w) > 1:
        flip_event = np.abs(w[1:] - w[:-1]) > np.abs(w[1:] + w[:-1])
        signs = np.concatenate(([1.0], np.cumprod(np.where(flip_event, -1.0, 1.0))))
        w = w * signs
    if w_start is not None and abs(w[0] + w_start) < abs(w[0] - w_start):
        w = -w
    jumps = np.abs(np.diff(w)) > COARSE_STEP * (np.abs(w[1:]) + np.abs(w[:-1]) + 1e-300)
    return w, bool(jumps.any())


def period_quadrature(curve, locus_samples):
    """omega = closed-loop integral of dv/sqrt(P) over ordered samples.

    The loop closes from the last sample back to the first.  Treating the
    sample index as the parameter, the tangent dv/dt comes from a 6th-order
    periodic stencil and the integral is the periodic sum of (dv/dt)/sqrt(P),
    so smooth densely-sampled loops converge fast.  The square root is
    continued along the path; a near-antipodal jump between consecutive
    samples (under-resolved path, or an odd number of enclosed branch points)
    raises RefinePath.
    """
    v = np.asarray([complex(s) for s in locus_samples], dtype=complex)
    if len(v) < 8:
        raise RefinePathError("need at least 8 samples around the locus")
    P = curve.discriminant_P()
    w_ext, coarse = _tracked_sqrt(P(np.append(v, v[0])))
    if coarse:
        raise RefinePathError("sqrt(P) jumps between samples; refine the path")
    if abs(w_ext[-1] - w_ext[0]) > abs(w_ext[-1] + w_ext[0]):
        raise RefinePathError("sqrt(P) does not return after the loop; refine the path")
    w = w_ext[:-1]
    dv = (np.roll(v, -3) - 9.0 * np.roll(v, -2) + 45.0 * np.roll(v, -1)
          - 45.0 * np.roll(v, 1) + 9.0 * np.roll(v, 2) - np.roll(v, 3)) / 60.0
    return complex(np.sum(dv / w))


def _segment_clearance(z0, z1, pts):
    """Min distance from segment [z0, z1] to any of pts."""
    if not pts:
        return float("inf")
    d = z1 - z0
    L2 = abs(d) ** 2
    best = float("inf")
    for p in pts:
        if L2 == 0:
            best = min(best, abs(p - z0))
            continue
        t = ((p - z0).real * d.real + (p - z0).imag * d.imag) / L2
        t = min(1.0, max(0.0, t))
        best = min(best, abs(z0 + t * d - p))
    return best


def route_path(curve, z0, z1, clearance=None, depth=0):
    """Waypoints from z0 to z1 skirting the roots of P by lateral detours."""
    z0, z1 = complex(z0), complex(z1)
    try:
        roots = curve.discriminant_P().roots()
    except Exception:
        roots = []
    seg = abs(z1 - z0)
    if clearance is None:
        clearance = max(1e-3 * seg, 1e-9)
    near = [r for r in roots if _segment_clearance(z0, z1, [r]) < clearance]
    if not near or seg < 4.0 * clearance:
        if near:
            raise PathThroughBranchPointError(
                f"cannot route {z0} -> {z1} around branch point {near[0]}")
        return [z0, z1]
    if depth > 8:
        raise PathThroughBranchPointError(f"routing depth exceeded between {z0} and {z1}")
    r = min(near, key=lambda p: _segment_clearance(z0, z1, [p]))
    mid = 0.5 * (z0 + z1)
    away = mid - r
    if abs(away) < 1e-12:
        away = 1j * (z1 - z0) / seg
    mid = r + away / abs(away) * max(4.0 * clearance, abs(away))
    left = route_path(curve, z0, mid, clearance, depth + 1)
    right = route_path(curve, mid, z1, clearance, depth + 1)
    return left[:-1] + right


def path_integral(curve, waypoints, w_start=None, rel_tol=1e-9, max_samples=1 << 15):
    """Integral of dv/sqrt(P) along a polyline, branch-tracked end to end.

    Each straight segment is integrated by composite Simpson; the density
    doubles until the value stabilizes to rel_tol.  Returns (integral, w_end)
    so chained paths can continue the same branch.
    """
    pts = [complex(w) for w in waypoints]
    P = curve.discriminant_P()
    n = 16
    prev = None
    while n <= max_samples:
        segs = [np.linspace(a, b, n + 1) for a, b in zip(pts[:-1], pts[1:])]
        flat = np.concatenate(segs)
        w, coarse = _tracked_sqrt(P(flat), w_start=w_start)
        if not coarse:
            weights = np.full(n + 1, 2.0)
            weights[1::2] = 4.0
            weights[0] = weights[-1] = 1.0
            val = 0j
            for k, seg in enumerate(segs):
                wk = w[k * (n + 1):(k + 1) * (n + 1)]
                val += (seg[-1] - seg[0]) / (3.0 * n) * np.sum(weights / wk)
            val = complex(val)
            if prev is not None and abs(val - prev) <= rel_tol * max(1.0, abs(val)):
                return val, complex(w[-1])
            prev = val
        n *= 2
    raise RefinePathError("path integral did not stabilize; waypoints too coarse")


# -- locus tracing -----------------------------------------------------------------------


def _sqrt_near(P, x, w_prev):
    w = cmath.sqrt(P(x))
    return -w if abs(w + w_prev) < abs(w - w_prev) else w


def trace_lattice_locus(curve, x_start, direction, step=None, max_steps=200000):
    """Follow dx/ds = u * sqrt(P(x)) from x_start until the curve closes.

    `direction` is any complex number parallel to the lattice step in the
    uniformizing plane (the locus is a straight line there); its magnitude is
    ignored.  Returns the ordered samples of one full loop.
    """
    u = complex(direction)
    if u == 0:
        raise ValidationError("locus direction must be nonzero")
    u /= abs(u)
    P = curve.discriminant_P()
    x = complex(x_start)
    w = cmath.sqrt(P(x))
    if abs(w) < 1e-14:
        raise PathThroughBranchPointError("locus start is a branch point")
    if step is None:
        step = 0.004 * (1.0 + abs(x_start))
    samples = [x]
    for it in range(max_steps):
        ds = step / max(abs(w), 1e-12)
        # RK4 on dx/ds = u * sqrt(P(x)), branch-continued within the stages
        k1 = u * w
        w2 = _sqrt_near(P, x + 0.5 * ds * k1, w)
        k2 = u * w2
        w3 = _sqrt_near(P, x + 0.5 * ds * k2, w)
        k3 = u * w3
        w4 = _sqrt_near(P, x + ds * k3, w)
        k4 = u * w4
        x_new = x + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        w = _sqrt_near(P, x_new, w)
        x = x_new
        samples.append(x)
        if it > 20 and abs(x - complex(x_start)) < 1.5 * step:
            return samples
    raise RefinePathError("lattice locus did not close while tracing")


# -- the predicted rate ---------------------------------------------------------------------


class RatePredictor:
    """Caches omega, xi(zeta), and the orientation for one logarithmic solution.

    All xi integrals start from the same basepoint on the node locus with the
    same initial branch, so differences are consistent; the overall sign is
    calibrated by requiring rate < 1 on the node-locus side.
    """

    def __init__(self, curve, sol, basepoint=None, locus=None):
        if sol.mode != "log" or sol.zeta is None:
            raise ValidationError("predicted rates exist for logarithmic solutions only")
        self.curve = curve
        self.zeta = complex(sol.zeta)
        self.base = complex(basepoint if basepoint is not None else sol.pair.x(0))
        self._w0 = cmath.sqrt(curve.discriminant_P()(self.base))
        if locus is None:
            h_dir, _ = path_integral(
                curve, route_path(curve, self.base, sol.pair.x(1)), w_start=self._w0)
            locus = trace_lattice_locus(curve, self.base, h_dir)
        self.locus = list(locus)
        self.omega = period_quadrature(curve, self.locus)
        self.xi_zeta, _ = path_integral(
            curve, route_path(curve, self.base, self.zeta), w_start=self._w0)
        anchor = (2.0 * np.pi * (0.0 - self.xi_zeta) / self.omega).imag
        self.sign = -1.0 if anchor < 0 else 1.0

    def xi(self, z):
        val, _ = path_integral(
            self.curve, route_path(self.curve, self.base, complex(z)), w_start=self._w0)
        return val

    def log_rate(self, z):
        arg = 2.0 * np.pi * (self.xi(z) - self.xi_zeta) / self.omega
        return -self.sign * arg.imag

    def rate(self, z):
        return float(np.exp(self.log_rate(z)))


def predicted_rate(curve, sol, z, basepoint=None, locus=None):
    """exp(-Im 2 pi (xi_z - xi_zeta)/omega); logarithmic mode only."""
    return RatePredictor(curve, sol, basepoint=basepoint, locus=locus).rate(z)


# -- grid sweep for the CLI -------------------------------------------------------------------


def rate_map(sol, re_axis, im_axis, n_min, n_max, smalldiv_threshold=0.05):
    """Rows (re, im, empirical, predicted, flags) over a rectangular z grid.

    Points where a rate cannot be computed (pole hit, too few terms, path
    failure) get empty fields and a flag naming the failure.
    """
    predictor = None
    if sol.mode == "log":
        try:
            predictor = RatePredictor(sol.eq.curve, sol)
        except (ValidationError, RefinePathError, PathThroughBranchPointError):
            predictor = None
    rows = []
    for im in im_axis:
        for re in re_axis:
            z = complex(re, im)
            emp, pred, flags = None, None, []
            try:
                rep = empirical_rate(sol, z, n_min, n_max,
                                     smalldiv_threshold=smalldiv_threshold)
                emp = rep.empirical_rate
                flags.extend(rep.flags)
            except (WindowTooSmallError, PoleEvaluationError, ValidationError) as exc:
                flags.append(type(exc).__name__.removesuffix("Error"))
            if predictor is not None:
                try:
                    pred = predictor.rate(z)
                except (RefinePathError, PathThroughBranchPointError) as exc:
                    flags.append(type(exc).__name__.removesuffix("Error"))
            rows.append((re, im, emp, pred, tuple(flags)))
    return rows
