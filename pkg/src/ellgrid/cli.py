"""Batch front end: scenario configs in, CSV/JSON and summaries out.

Subcommands: lattice, solve, verify, ratemap.  One JSON config describes the
scenario; complex numbers are always two-element [re, im] arrays.  Exit codes:
0 success, 2 validation, 3 numerical failure, 4 I/O.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import convergence, diffops, lattice as lattice_mod, solver
from .curve import BiquadraticCurve
from .errors import EllgridError, MissingFieldError, ValidationError
from .lattice import LatticeSpec, write_lattice_csv
from .poly import Polynomial

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


# -- config decoding ------------------------------------------------------------------


def _cnum(v, field):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    raise ValidationError(f"{field}: expected a number or [re, im] pair, got {v!r}")


def _cpoly(v, field):
    if not isinstance(v, list) or not v:
        raise ValidationError(f"{field}: expected a non-empty coefficient list")
    return Polynomial([_cnum(x, f"{field}[{i}]") for i, x in enumerate(v)])


def _require(cfg, field):
    if field not in cfg:
        raise MissingFieldError(field)
    return cfg[field]


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError:
        raise
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    return cfg


def _curve_from(cfg):
    return BiquadraticCurve.from_json(_require(cfg, "curve"))


def _seed_from(cfg, curve):
    seed = _require(cfg, "lattice_seed")
    x0 = _cnum(_require(seed, "x0"), "lattice_seed.x0")
    y0 = _cnum(seed["y0"], "lattice_seed.y0") if "y0" in seed else None
    y1_index = seed.get("y1_index")
    y1_hint = _cnum(seed["y1_hint"], "lattice_seed.y1_hint") if "y1_hint" in seed else None
    return LatticeSpec(curve, x0, y0=y0, y1_index=y1_index, y1_hint=y1_hint)


def _select_from(params):
    sel = params.get("select")
    if sel is None:
        return solver.ByIndex(0, 1)
    if "nearest" in sel:
        return solver.Nearest(_cnum(sel["nearest"], "select.nearest"))
    if "index" in sel:
        idx = sel["index"]
        if isinstance(idx, list):
            return solver.ByIndex(int(idx[0]), int(idx[1]) if len(idx) > 1 else None)
        return solver.ByIndex(int(idx))
    if "explicit" in sel:
        pts = sel["explicit"]
        return solver.Explicit(_cnum(pts[0], "select.explicit[0]"),
                               _cnum(pts[1], "select.explicit[1]"))
    raise ValidationError(f"unknown select clause {sel!r}")


def _equation_from(cfg, curve):
    eqc = _require(cfg, "equation")
    a = _cpoly(_require(eqc, "a"), "equation.a")
    if eqc.get("mode") == "log":
        if "c0_free" not in eqc:
            raise MissingFieldError("c0_free")
        d = _cpoly(_require(eqc, "d"), "equation.d")
        eq = solver.DifferenceEquation.from_polynomials(
            curve, a, Polynomial((0j,)), d)
        return eq, _cnum(eqc["c0_free"], "equation.c0_free")
    c = _cpoly(_require(eqc, "c"), "equation.c")
    d = _cpoly(_require(eqc, "d"), "equation.d")
    return solver.DifferenceEquation.from_polynomials(curve, a, c, d), None


def _solve_scenario(cfg, n_override=None):
    curve = _curve_from(cfg)
    params = cfg.get("params", {})
    eq, c0_free = _equation_from(cfg, curve)
    n = int(n_override if n_override is not None else params.get("n", 10))
    select = _select_from(params)
    y0_hint = _cnum(params["y0_hint"], "params.y0_hint") if "y0_hint" in params else None
    yp1_hint = _cnum(params["yp1_hint"], "params.yp1_hint") if "yp1_hint" in params else None
    return solver.solve(eq, select, n, c0_free=c0_free,
                        y0_hint=y0_hint, yp1_hint=yp1_hint)


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# -- subcommands -----------------------------------------------------------------------


def run_lattice(cfg, out_path, n_override, quiet):
    curve = _curve_from(cfg)
    spec = _seed_from(cfg, curve)
    params = cfg.get("params", {})
    n_max = int(n_override if n_override is not None else params.get("n_max", params.get("n", 10)))
    n_min = int(params.get("n_min", -n_max))
    lat = lattice_mod.generate(spec, n_min, n_max)
    for n in range(n_min, n_max):
        r1, r2 = lat.on_curve_residual(n)
        if max(r1, r2) > 1e-9:
            raise EllgridError(f"on-curve invariant violated at n={n}")
    stream, close = _open_out(out_path or params.get("out"))
    try:
        write_lattice_csv(lat, n_min, n_max, stream)
    finally:
        if close:
            stream.close()
    if not quiet and close:
        print(f"lattice written for n in [{n_min}, {n_max}]")
    return EXIT_OK


def run_solve(cfg, out_path, n_override, quiet):
    params = cfg.get("params", {})
    sol = _solve_scenario(cfg, n_override)
    report = solver.verify_interpolation(sol.eq, sol, len(sol.coeffs) - 1)
    payload = solver.solution_to_json(sol)
    payload["interpolation_max_error"] = report.max_error
    text = json.dumps(payload, indent=2) + "\n"
    stream, close = _open_out(out_path or params.get("out"))
    try:
        stream.write(text)
    finally:
        if close:
            stream.close()
    if not quiet:
        lines = ["  n  |c_n|", "  --- ------"]
        for k, c in enumerate(sol.coeffs):
            lines.append(f"  {k:3d} {abs(c):.6e}")
        lines.append(f"  certificates: x_-1 {sol.special.res_m1:.2e}, "
                     f"x'_0 {sol.special.res_p0:.2e}")
        lines.append(f"  interpolation max error: {report.max_error:.2e}")
        if all(abs(c) == 0.0 for c in sol.coeffs):
            lines.append("  note: trivial solution (all coefficients vanish)")
        print("\n".join(lines), file=sys.stdout if close else sys.stderr)
    return EXIT_OK


def _verify_checks(cfg):
    """Yield (name, passed, detail) for the scenario's invariant suite."""
    curve = _curve_from(cfg)
    params = cfg.get("params", {})
    n_max = int(params.get("n_max", 8))

    if "lattice_seed" in cfg:
        spec = _seed_from(cfg, curve)
        lat = lattice_mod.generate(spec, min(-3, -n_max), n_max)
        worst = 0.0
        for n in range(min(-3, -n_max), n_max):
            worst = max(worst, *lat.on_curve_residual(n))
        yield "lattice-on-curve", worst <= 1e-9, f"max residual {worst:.2e}"

        x0, x1p, x2p = curve.x_view()
        worst = 0.0
        for n in range(0, min(5, n_max)):
            pair = curve.y_roots(lat.x(n))
            s = -x1p(lat.x(n)) / x2p(lat.x(n))
            p = x0(lat.x(n)) / x2p(lat.x(n))
            sc = max(1.0, abs(s), abs(p))
            worst = max(worst, abs(pair.lo + pair.hi - s) / sc,
                        abs(pair.lo * pair.hi - p) / sc)
        yield "root-pair-sum-product", worst <= 1e-10, f"max deviation {worst:.2e}"

        worst = 0.0
        for n in range(0, min(5, n_max)):
            pair = curve.y_roots(lat.x(n))
            got = sorted((pair.lo, pair.hi), key=lambda v: (v.real, v.imag))
            want = sorted((lat.y(n), lat.y(n + 1)), key=lambda v: (v.real, v.imag))
            sc = max(1.0, abs(want[0]), abs(want[1]))
            worst = max(worst, abs(got[0] - want[0]) / sc, abs(got[1] - want[1]) / sc)
        yield "complement-root-consistency", worst <= 1e-9, f"max deviation {worst:.2e}"

    if "equation" in cfg:
        sol = _solve_scenario(cfg)
        corrupt = params.get("corrupt")
        if corrupt:
            k = int(corrupt.get("index", 0))
            factor = complex(corrupt.get("factor", 1.01))
            cs = list(sol.coeffs)
            if k < len(cs):
                cs[k] = cs[k] * factor
            sol.coeffs = tuple(cs)
        yield ("special-point-certificates",
               max(sol.special.res_m1, sol.special.res_p0) <= 1e-9,
               f"residuals {sol.special.res_m1:.2e}, {sol.special.res_p0:.2e}")

        worst = 0.0
        for n in range(1, min(6, len(sol.coeffs) - 1) + 1):
            _, spread = diffops.diff_constant(sol.pair, n, method="all")
            worst = max(worst, spread)
        yield "cn-four-way-agreement", worst <= 1e-8, f"max spread {worst:.2e}"

        samples = diffops.identity_samples(sol.pair, 3, count=12, seed=11)
        worst = 0.0
        for n in (1, 2, 3):
            worst = max(worst, diffops.verify_diff_basis_identity(sol.pair, n, samples))
        yield "diff-basis-identity", worst <= 1e-7, f"max error {worst:.2e}"

        n_exp = len(sol.coeffs) - 1
        report = solver.verify_interpolation(sol.eq, sol, n_exp)
        yield ("interpolation-vs-oracle", report.max_error <= 1e-7,
               f"max error {report.max_error:.2e}")

        worst = 0.0
        for j in range(0, min(6, n_exp)):
            z = sol.pair.x(j)
            worst = max(worst, abs(solver.residual(sol.eq, sol, n_exp, z))
                        / sol.eq.scale(z))
        yield "residual-on-lattice", worst <= 1e-7, f"max relative defect {worst:.2e}"


def run_verify(cfg, out_path, n_override, quiet):
    if "lattice_seed" not in cfg and "equation" not in cfg:
        raise ValidationError("verify needs a lattice_seed or an equation in the scenario")
    lines = []
    all_ok = True
    for name, ok, detail in _verify_checks(cfg):
        all_ok &= ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    text = "\n".join(lines) + "\n"
    stream, close = _open_out(out_path or cfg.get("params", {}).get("out"))
    try:
        stream.write(text)
    finally:
        if close:
            stream.close()
    if not quiet and close:
        sys.stdout.write(text)
    return EXIT_OK if all_ok else EXIT_NUMERICAL


def run_ratemap(cfg, out_path, n_override, quiet):
    params = cfg.get("params", {})
    grid = _require(params, "grid") if "params" in cfg else None
    if grid is None:
        raise MissingFieldError("params.grid")
    window = params.get("window", [5, 25])
    n_min, n_max = int(window[0]), int(window[1])
    sol = _solve_scenario(cfg, n_override if n_override is not None else n_max)
    re_lo, re_hi, re_n = grid["re"]
    im_lo, im_hi, im_n = grid["im"]
    re_axis = np.linspace(re_lo, re_hi, int(re_n))
    im_axis = np.linspace(im_lo, im_hi, int(im_n))
    rows = convergence.rate_map(sol, re_axis, im_axis, n_min, n_max,
                                smalldiv_threshold=float(params.get("threshold", 0.05)))
    stream, close = _open_out(out_path or params.get("out"))
    try:
        stream.write("re_z,im_z,empirical_rate,predicted_rate,flags\n")
        for re, im, emp, pred, flags in rows:
            emp_s = "" if emp is None else repr(float(emp))
            pred_s = "" if pred is None else repr(float(pred))
            stream.write(f"{float(re)!r},{float(im)!r},{emp_s},{pred_s},{';'.join(flags)}\n")
    finally:
        if close:
            stream.close()
    if not quiet and close:
        print(f"rate map: {len(rows)} points")
    return EXIT_OK


RUNNERS = {
    "lattice": run_lattice,
    "solve": run_solve,
    "verify": run_verify,
    "ratemap": run_ratemap,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ellgrid",
        description="Elliptic lattices, difference operators, and interpolatory expansions")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("lattice", "generate a lattice and dump it as CSV"),
        ("solve", "expand the scenario's difference equation, dump JSON"),
        ("verify", "run the invariant suite on the scenario"),
        ("ratemap", "empirical/predicted convergence rates over a z grid"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario JSON path")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--n", type=int, default=None, help="override the order/step count")
        p.add_argument("--quiet", action="store_true", help="suppress the summary")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        run = cfg.get("run")
        if run is not None and run.lower() != args.command:
            raise ValidationError(
                f"config run={run!r} does not match subcommand {args.command!r}")
        return RUNNERS[args.command](cfg, args.out, args.n, args.quiet)
    except (ValidationError, MissingFieldError) as exc:
        print(f"ValidationError: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except EllgridError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"IOError: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
