"""``nullcone`` command-line interface.

Exit codes: 0 success, 1 input error, 2 numeric guard tripped or identity
failure, 3 a rigidity statement was contradicted.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import cmc, curvature, io, rigidity, suites
from .errors import DomainError, NullConeError, NumericGuardError, TheoremViolation
from .spacetime import WarpingModel, default_r_ref, ef_from_static, ncc_deficit, ncc_flux
from .spectral import SphereGrid, ZonalGrid
from .surface import NullConeSurface, boost_sphere, default_radius, random_profile_u

EXIT_OK, EXIT_INPUT, EXIT_GUARD, EXIT_THEOREM = 0, 1, 2, 3

COMMANDS = ("ncc-check", "surface-report", "rigidity-kernel", "solve-cmc", "verify-identities",
            "curvature-oracle", "mobius", "boost-sphere")


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


# ---------------------------------------------------------------------------
# Shared arguments
# ---------------------------------------------------------------------------

def _add_model_args(p):
    p.add_argument("--model", default="minkowski",
                   help="minkowski, schwarzschild, desitter, antidesitter, or a model descriptor JSON file")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--radius-l", type=float, default=1.0)
    p.add_argument("--n", type=int, default=3)


def _add_common(p):
    p.add_argument("--report", type=Path, help="write the JSON report here")
    p.add_argument("--plots", type=Path, help="directory for SVG figures and CSV tables")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="override a tolerance (repeatable)")


def _add_surface_args(p):
    p.add_argument("--surface", help="surface profile JSON file")
    p.add_argument("--fixture", help="name of a bundled sample surface")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nullcone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("ncc-check", help="null convergence inequality on a radial sweep")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--points", type=int, default=200)

    p = sub.add_parser("surface-report", help="frames, |H|^2 and torsion of a surface")
    _add_model_args(p)
    _add_surface_args(p)
    _add_common(p)
    p.add_argument("--bandlimit", type=int, default=24)

    p = sub.add_parser("rigidity-kernel", help="SVD kernel of the linearized operator")
    _add_surface_args(p)
    _add_common(p)
    p.add_argument("--bandlimit", type=int, default=24)

    p = sub.add_parser("solve-cmc", help="Newton solve for constant |H|^2 and classify")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--target", choices=("hsq", "gauss"), default="hsq")
    p.add_argument("--bandlimit", type=int, default=12)
    p.add_argument("--gauge", choices=("auto", "none", "fix", "lm"), default="auto")
    p.add_argument("--noise", type=float, default=0.05, help="relative size of the initial perturbation")
    p.add_argument("--beta", type=float, default=None, help="boost of the initial guess (space forms)")

    p = sub.add_parser("verify-identities", help="run identity suites")
    _add_common(p)
    p.add_argument("--suite", choices=suites.SUITES + ("all",), default="all")
    p.add_argument("--profiles", type=Path, help="directory of surface files (default: bundled fixtures)")

    p = sub.add_parser("curvature-oracle", help="finite-difference curvature audit")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--chart", choices=("static", "ef"), default="static")

    p = sub.add_parser("mobius", help="conformal factor of a Mobius map")
    _add_common(p)
    for name in "abcd":
        p.add_argument(f"--{name}", type=complex, help="complex entry, e.g. 1+2j (random if omitted)")
    p.add_argument("--bandlimit", type=int, default=8)

    p = sub.add_parser("boost-sphere", help="boosted sphere of symmetry in a space form")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--r0", type=float)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--axis", type=float, nargs=3, default=(0.0, 0.0, 1.0))
    p.add_argument("--bandlimit", type=int, default=32)
    p.add_argument("--w0", type=float, default=0.0)
    p.add_argument("--out", type=Path, help="also save the surface file here")
    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _tolerances(overrides) -> dict:
    tol = dict(suites.DEFAULT_TOLERANCES)
    tol.update({"newton": cmc.CONVERGENCE_TOL, "kernel_threshold": rigidity.KERNEL_THRESHOLD,
                "kernel_gap": rigidity.MIN_AUDIT_GAP, "ncc": 1e-12, "classify": 1e-6})
    for item in overrides:
        name, sep, value = item.partition("=")
        if not sep or name not in tol:
            raise io.InputError(f"bad --tol {item!r}; known names: {sorted(tol)}")
        try:
            tol[name] = float(value)
        except ValueError as exc:
            raise io.InputError(f"bad --tol value {item!r}") from exc
    return tol


def _model(args, report=None) -> WarpingModel:
    spec = args.model
    if spec.endswith(".json") or os.path.sep in spec:
        model = io.load_model(spec)
        if report is not None:
            report.add_input(spec)
    else:
        desc = {"kind": spec, "mass": args.mass, "radius_l": args.radius_l, "n": args.n}
        model = io.model_from_descriptor(desc)
    return model


def _surface(args, report) -> NullConeSurface:
    if args.surface and args.fixture:
        raise io.InputError("give either --surface or --fixture, not both")
    if args.surface:
        report.add_input(args.surface)
        return io.load_surface(args.surface)
    if args.fixture:
        return io.load_fixture(args.fixture)
    raise io.InputError("a --surface file or --fixture name is required")


def _grid_for(model, L):
    return SphereGrid(L) if model.n == 3 else ZonalGrid(model.n - 1, L)


def _thread_limit():
    value = os.environ.get("NULLCONE_THREADS")
    if not value:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=int(value))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_ncc_check(args, report, tol):
    model = _model(args, report)
    report.model = model.descriptor()
    lo = args.r_min if args.r_min is not None else (2.1 * model.mass if model.kind == "schwarzschild" else 0.1)
    hi = args.r_max if args.r_max is not None else (
        0.95 * model.radius_l if model.kind == "desitter" else 50.0)
    r = np.linspace(lo, hi, args.points)
    flux = ncc_flux(model, r)
    deficit = ncc_deficit(model, r)
    ok = bool(np.all(flux >= 0) and np.all(deficit <= 0))
    if model.is_space_form:
        ok = ok or bool(np.max(np.abs(deficit)) < tol["ncc"])
    report.add("ncc", {"r_min": lo, "r_max": hi, "points": args.points,
                       "min_flux": float(flux.min()), "max_deficit": float(deficit.max()),
                       "max_abs_deficit": float(np.max(np.abs(deficit))), "holds": ok})
    if args.plots:
        from . import plotting
        report.add("plots", [str(p) for p in plotting.ncc_sweep(r, flux, deficit, args.plots)])
    if not ok:
        raise NumericGuardError("null convergence inequality fails on the sweep", guard="ncc")


def cmd_surface_report(args, report, tol):
    surf = _surface(args, report)
    report.model = surf.model.descriptor()
    report.bandlimit = surf.grid.L
    hsq = surf.hsq().values
    out = {"hsq_min": float(hsq.min()), "hsq_max": float(hsq.max()), "hsq_mean": float(hsq.mean()),
           "hsq_spread": suites.hsq_spread(surf)}
    if not surf.is_zonal:
        fr = surf.frame()
        out["pairing_residuals"] = fr.pairing_residuals()
        out["induced_metric_residual"] = fr.induced_metric_residual()
        out["cnnc_residual_max"] = float(np.max(np.abs(surf.cnnc_residual())))
        out["mean_curvature_ratio"] = surf.mean_curvature_vector().ratio_to_hsq
    verdict = cmc.classify(surf.u, surf.model, tol=tol["classify"])
    out["classification"] = verdict.as_dict()
    report.add("surface", out)
    if args.plots:
        from . import plotting
        report.add("plots", [str(p) for p in plotting.colatitude_profile(surf.u, args.plots)])


def cmd_rigidity_kernel(args, report, tol):
    surf = _surface(args, report)
    report.model = surf.model.descriptor()
    report.bandlimit = args.bandlimit
    op = rigidity.assemble(surf, args.bandlimit, threshold=tol["kernel_threshold"])
    ker = rigidity.kernel(op)
    lm = op.lm
    basis = [[{"l": l, "m": m, "value": float(v)} for (l, m), v in zip(lm, vec) if abs(v) > 1e-12]
             for vec in ker.basis_coeffs]
    report.add("kernel", {**ker.as_dict(), "basis": basis})
    if args.plots:
        from . import plotting
        report.add("plots", [str(p) for p in plotting.singular_values(ker.singular_values, ker.threshold,
                                                                      args.plots)])
    if ker.gap < tol["kernel_gap"]:
        raise NumericGuardError(f"kernel gap {ker.gap:.3e} below {tol['kernel_gap']:.1e}", guard="kernel_gap")
    expected = 4 if surf.model.is_space_form else 1
    if not surf.is_zonal and ker.dimension != expected:
        raise TheoremViolation(f"kernel dimension {ker.dimension}, expected {expected}")


def _initial_radius(model, E):
    """Radius of the round solution nearest the static region."""
    n = model.n
    if model.is_space_form:
        kappa = float(model.fsq(1.0)) - 1.0
        inv = E / (n - 1) - kappa
        if not inv > 0:
            raise io.InputError(f"E = {E} admits no round solution in {model.kind}")
        return 1.0 / math.sqrt(inv)
    # (n-1) u^2 f^2(1/u) = E on the outer branch, by bisection over r.
    from scipy.optimize import brentq
    g = lambda r: (n - 1) * model.fsq(r) / r**2 - E  # noqa: E731
    rs = np.geomspace(model.r_lo * 1.0001, 1e6 * max(model.r_lo, 1.0), 4000)
    vals = g(rs)
    k = int(np.argmax(vals))
    if vals[k] < 0:
        raise io.InputError(f"E = {E} exceeds the largest round value {vals[k] + E:.6g}")
    return brentq(g, rs[k], rs[-1]) if vals[-1] < 0 else rs[k]


def cmd_solve_cmc(args, report, tol):
    model = _model(args, report)
    report.model = model.descriptor()
    report.bandlimit = args.bandlimit
    E = cmc.gauss_to_hsq(args.E, model.n) if args.target == "gauss" else args.E
    rng = np.random.default_rng(args.seed)
    r0 = _initial_radius(model, E)
    grid = _grid_for(model, args.bandlimit)
    gauge_name = args.gauge
    if gauge_name == "auto":
        gauge_name = "fix" if model.is_space_form else "none"
    if model.is_space_form and model.n == 3:
        beta = rng.uniform(0.0, 0.5) if args.beta is None else args.beta
        if model.kind == "desitter":
            beta = min(beta, 0.9 * math.log(model.radius_l / r0)) if r0 < model.radius_l else 0.0
        axis = rng.standard_normal(3)
        base = boost_sphere(model, grid, r0, beta, axis).u
    else:
        beta = 0.0
        base = grid.constant(1.0 / r0)
    noise = random_profile_u(model, grid, rng, r0=r0, amplitude=args.noise,
                             min_degree=2 if model.is_space_form else 1) - grid.constant(1.0 / r0)
    gauge = {"none": cmc.NoGauge(), "lm": cmc.LevenbergMarquardt(),
             "fix": cmc.FixLowModes(tuple(grid.pack(base.coeffs)[:4 if model.n == 3 else 2]))}[gauge_name]
    problem = cmc.CmcProblem(model, E, args.bandlimit, gauge)
    res = cmc.newton_solve(problem, base + noise, tol=tol["newton"])
    verdict = cmc.classify(res.u, model, tol=tol["classify"])
    report.add("problem", {"E_hsq": E, "target": args.target,
                           "conversion_factor_hsq_per_gauss": model.n - 1,
                           "gauge": res.gauge, "initial_r0": r0, "initial_beta": beta})
    report.add("newton", {"converged": res.converged, "iterations": res.iterations,
                          "residual_history": res.residual_history, "lm_fallback": res.fallback})
    report.add("classification", verdict.as_dict())
    report.add("solution", {"u_coeffs": io.coefficient_records(res.u)})
    if args.plots:
        from . import plotting
        files = plotting.residual_history(res.residual_history, args.plots)
        files += plotting.colatitude_profile(res.u, args.plots, stem="solution_profile")
        report.add("plots", [str(p) for p in files])
    if not res.converged:
        raise NumericGuardError(f"Newton did not converge in {res.iterations} iterations", guard="newton")
    if verdict.violation:
        raise TheoremViolation("boosted solution found outside a space form")
    if model.is_space_form and verdict.distance >= tol["classify"]:
        raise TheoremViolation("converged space-form solution is not an l <= 1 profile")


def _profile_surfaces(args, report) -> dict:
    if args.profiles is None:
        return {k: io.load_fixture(k) for k in io.fixture_index()}
    files = sorted(Path(args.profiles).glob("*.json"))
    files = [f for f in files if f.name != "index.json"]
    if not files:
        raise io.InputError(f"no surface files in {args.profiles}")
    out = {}
    for f in files:
        report.add_input(f)
        out[f.stem] = io.load_surface(f)
    return out


def cmd_verify_identities(args, report, tol):
    names = suites.SUITES if args.suite == "all" else (args.suite,)
    surfaces = _profile_surfaces(args, report) if set(names) & {"frames", "cnnc", "ricci1"} else None
    all_ok = True
    for name in names:
        rows, errata = suites.run_suite(name, surfaces, tol, args.seed)
        report.add(name, [r.as_dict() for r in rows])
        report.errata.extend(e.as_dict() for e in errata)
        all_ok &= all(r.passed for r in rows)
        for r in rows:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.identity:<48s} {r.max_error:10.3e}  (tol {r.tolerance:.0e})")
    if not all_ok:
        raise NumericGuardError("identity suite failure", guard="identity")


def cmd_curvature_oracle(args, report, tol):
    model = _model(args, report)
    report.model = model.descriptor()
    rng = np.random.default_rng(args.seed)
    pts = curvature.sample_static_points(model, args.points, rng)
    rows = []
    worst = 0.0
    r_ref = default_r_ref(model)
    chart = curvature.static_chart(model) if args.chart == "static" else curvature.ef_chart(model, r_ref)
    for x in pts:
        if args.chart == "static":
            xc, ref = x, curvature.riemann_static_closedform(model, x)
            res = curvature.riemann_fd(chart, xc)
            err = curvature.relative_tensor_error(res.riemann, ref, res.metric, x[1])
        else:
            v, w = ef_from_static(model, x[0], x[1], r_ref)
            xc = np.concatenate([[v, w], x[2:]])
            res = curvature.riemann_fd(chart, xc)
            oracle = curvature.ef_riemann_from_tensor(res.riemann, 1.0)
            rel = curvature.ef_riemann_relations(model, x[1])
            scale = max(max(abs(val) for val in rel.values()), float(model.fsq(x[1])) ** 2 / x[1] ** 2)
            err = max(abs(oracle[k] - rel[k]) for k in rel) / scale
        worst = max(worst, err)
        rows.append({"point": [float(c) for c in xc], "relative_error": err,
                     "fd_error_estimate": float(res.error_estimate)})
    errata = curvature.unique_errata(curvature.audit_printed_curvature(model, pts[:3])
                                     + curvature.christoffels_static(model, pts[0]).errata)
    report.errata.extend(e.as_dict() for e in errata)
    report.add("oracle", {"chart": args.chart, "points": rows, "max_relative_error": worst,
                          "tolerance": tol["curvature"], "pass": worst < tol["curvature"]})
    for e in errata:
        print(f"erratum  {e.component}: printed {e.printed:.6g}, oracle {e.oracle:.6g}")
    if worst >= tol["curvature"]:
        raise NumericGuardError(f"oracle disagrees with closed forms: {worst:.3e}", guard="curvature")


def cmd_mobius(args, report, tol):
    rng = np.random.default_rng(args.seed)
    coeffs = []
    for name in "abcd":
        val = getattr(args, name)
        coeffs.append(val if val is not None else complex(rng.standard_normal(), rng.standard_normal()))
    grid = SphereGrid(args.bandlimit)
    rep = cmc.mobius_conformal_factor(*coeffs, grid)
    res = float(np.max(np.abs(cmc.liouville_residual(rep.u, 1.0).values)))
    mp = cmc.max_principle_functional(rep.u, 1.0)
    report.add("map", {"a": coeffs[0], "b": coeffs[1], "c": coeffs[2], "d": coeffs[3]})
    report.add("conformal_factor", {**rep.as_dict(), "liouville_residual": res,
                                    "lap_plus_2_constant": mp.constant, "lap_plus_2_spread": mp.spread})
    if args.plots:
        from . import plotting
        report.add("plots", [str(p) for p in plotting.colatitude_profile(rep.u, args.plots, stem="mobius")])


def cmd_boost_sphere(args, report, tol):
    model = _model(args, report)
    report.model = model.descriptor()
    report.bandlimit = args.bandlimit
    r0 = default_radius(model) if args.r0 is None else args.r0
    grid = _grid_for(model, args.bandlimit)
    axis = args.axis if model.n == 3 else (-1 if args.axis[2] < 0 else 1)
    surf = boost_sphere(model, grid, r0, args.beta, axis, w0=args.w0)
    kappa = float(model.fsq(1.0)) - 1.0
    expected = (model.n - 1) * (1.0 / r0**2 + kappa)
    hsq = surf.hsq().values
    fit = cmc.classify(surf.u, model, tol=tol["classify"])
    report.add("boosted_sphere", {"r0": r0, "beta": args.beta, "expected_hsq": expected,
                                  "max_hsq_deviation": float(np.max(np.abs(hsq - expected))),
                                  "classification": fit.as_dict()})
    if args.out:
        io.save_surface(args.out, surf)
    if args.plots:
        from . import plotting
        report.add("plots", [str(p) for p in plotting.colatitude_profile(surf.u, args.plots, stem="boosted")])


HANDLERS = {
    "ncc-check": cmd_ncc_check,
    "surface-report": cmd_surface_report,
    "rigidity-kernel": cmd_rigidity_kernel,
    "solve-cmc": cmd_solve_cmc,
    "verify-identities": cmd_verify_identities,
    "curvature-oracle": cmd_curvature_oracle,
    "mobius": cmd_mobius,
    "boost-sphere": cmd_boost_sphere,
}


def run(argv=None) -> int:
    """Parse ``argv``, execute, write the report; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _ArgError("a subcommand is required")
        tol = _tolerances(args.tol)
    except (_ArgError, io.InputError) as exc:
        print(f"nullcone: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    arguments = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}
    report = io.RunReport(args.command, arguments, tol)
    code = EXIT_OK
    t0 = time.perf_counter()
    try:
        with _thread_limit():
            HANDLERS[args.command](args, report, tol)
        report.status = {"exit_code": EXIT_OK, "result": "ok"}
    except (io.InputError, DomainError, ValueError, TypeError) as exc:
        code = EXIT_INPUT
        report.status = {"exit_code": code, "result": "input_error", "message": str(exc)}
    except NumericGuardError as exc:
        code = EXIT_GUARD
        report.status = {"exit_code": code, "result": "guard", "guard": exc.guard, "message": str(exc)}
    except TheoremViolation as exc:
        code = EXIT_THEOREM
        report.status = {"exit_code": code, "result": "theorem_violation", "message": str(exc)}
    except NullConeError as exc:
        code = EXIT_GUARD
        report.status = {"exit_code": code, "result": "error", "message": str(exc)}
    report.timings["wall_seconds"] = time.perf_counter() - t0
    if code != EXIT_OK:
        print(f"nullcone: {report.status['result']}: {report.status['message']}", file=sys.stderr)
    if args.report:
        report.write(args.report)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
