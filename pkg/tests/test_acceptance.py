"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured worst
error and runtime before asserting, so the summary is visible with or
without ``-s``.
"""

import time
import warnings

import numpy as np
import pytest

from nullcone import cmc, curvature, io, rigidity, suites
from nullcone.spacetime import WarpingModel, ncc_deficit, ncc_flux
from nullcone.spectral import SphereGrid, ZonalGrid
from nullcone.surface import NullConeSurface, boost_sphere, random_profile_u, random_surface

SPACE_FORMS = {
    "minkowski": WarpingModel.minkowski(),
    "antidesitter": WarpingModel.anti_de_sitter(1.0),
    "desitter": WarpingModel.de_sitter(1.0),
}
ALL_MODELS = {"schwarzschild": WarpingModel.schwarzschild(1.0), **SPACE_FORMS}


@pytest.fixture
def verdict(capsys):
    """Print the one-line verdict, then fail with the collected reasons."""

    def emit(number, title, failures, detail, elapsed, budget):
        if budget is not None and elapsed >= budget:
            failures = failures + [f"runtime {elapsed:.2f} s over the {budget:g} s budget"]
        status = "PASS" if not failures else "FAIL"
        limit = f" / {budget:g} s" if budget is not None else ""
        with capsys.disabled():
            print(f"\n[{status}] criterion {number:>2}: {title} | {detail} | {elapsed:.2f} s{limit}")
        assert not failures, "; ".join(failures)

    return emit


def test_criterion_01_ncc(verdict):
    t0 = time.perf_counter()
    failures = []
    r = np.linspace(2.1, 50.0, 200)
    schw = ALL_MODELS["schwarzschild"]
    flux, deficit = ncc_flux(schw, r), ncc_deficit(schw, r)
    if not (np.all(flux >= 0) and np.all(deficit <= 0)):
        failures.append("Schwarzschild sweep violates the inequality")
    worst = 0.0
    for kind, model in SPACE_FORMS.items():
        hi = 0.95 * model.radius_l if kind == "desitter" else 50.0
        rs = np.linspace(0.1, hi, 200)
        d = float(np.max(np.abs(ncc_deficit(model, rs))))
        worst = max(worst, d)
        if not d < 1e-12:
            failures.append(f"{kind}: |deficit| = {d:.2e}")
    elapsed = time.perf_counter() - t0
    detail = f"Schwarzschild min flux {flux.min():.3e}, max deficit {deficit.max():.3e}; space forms {worst:.1e}"
    verdict(1, "null convergence sweep", failures, detail, elapsed, 1.0)


def test_criterion_02_cnnc(verdict):
    t0 = time.perf_counter()
    grid = SphereGrid(32)
    worst, failures = 0.0, []
    for k, (kind, model) in enumerate(ALL_MODELS.items()):
        rng = np.random.default_rng(200 + k)
        for _ in range(3):
            err = float(np.max(np.abs(random_surface(model, grid, rng).cnnc_residual())))
            worst = max(worst, err)
            if not err < 1e-6:
                failures.append(f"{kind}: {err:.2e}")
    elapsed = time.perf_counter() - t0
    verdict(2, "alpha_H + d log|H| = 0 at L=32", failures, f"max residual {worst:.2e} (tol 1e-06)", elapsed, 30)


def test_criterion_03_rigidity_kernel(verdict):
    t0 = time.perf_counter()
    cases = {f"schwarzschild(m={m})": (WarpingModel.schwarzschild(m), 1) for m in (0.5, 1.0, 2.0)}
    cases.update({k: (m, 4) for k, m in SPACE_FORMS.items()})
    grid = SphereGrid(24)
    failures = []
    min_gap, max_lmd = np.inf, 0.0
    for k, (name, (model, expected)) in enumerate(cases.items()):
        rng = np.random.default_rng(300 + k)
        for _ in range(5):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                ker = rigidity.kernel(rigidity.assemble(random_surface(model, grid, rng)))
            min_gap = min(min_gap, ker.gap)
            if ker.dimension != expected:
                failures.append(f"{name}: dimension {ker.dimension}")
            if not ker.gap > 1e4:
                failures.append(f"{name}: gap {ker.gap:.2e}")
            if model.is_space_form:
                lmd = float(np.max(ker.low_mode_distances))
                max_lmd = max(max_lmd, lmd)
                if not lmd < 1e-6:
                    failures.append(f"{name}: kernel low_mode_distance {lmd:.2e}")
    elapsed = time.perf_counter() - t0
    detail = f"30 kernels, min gap {min_gap:.2e}, space-form basis distance {max_lmd:.1e}"
    verdict(3, "kernel dimension 1 / 4 at L=24", failures, detail, elapsed, 120)


def test_criterion_04_integral_identity(verdict):
    t0 = time.perf_counter()
    grid = SphereGrid(16)
    rng = np.random.default_rng(400)
    models = list(ALL_MODELS.values())
    worst, failures = 0.0, []
    for k in range(20):
        surf = random_surface(models[k % 4], grid, rng)
        # variation u limited to degree L/2 so every product is resolved by the 3L grid
        c = np.where(grid.mask & (grid.degree <= 8), rng.standard_normal(grid.mask.shape), 0.0)
        gap = rigidity.quadratic_form_identity(surf, grid.from_coeffs(c)).relative_gap
        worst = max(worst, gap)
        if not gap < 1e-8:
            failures.append(f"pair {k}: {gap:.2e}")
    elapsed = time.perf_counter() - t0
    verdict(4, "integrated Ricci identity, 20 pairs at L=16", failures, f"max gap {worst:.2e} (tol 1e-08)",
            elapsed, 30)


def _minkowski_solves(count, L=12, seed=510):
    model = SPACE_FORMS["minkowski"]
    grid = SphereGrid(L)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        r0, beta = rng.uniform(1.0, 3.0), rng.uniform(0.0, 0.8)
        base = boost_sphere(model, grid, r0, beta, rng.standard_normal(3)).u
        noise = random_profile_u(model, grid, rng, r0=r0, amplitude=0.02, min_degree=2) - grid.constant(1 / r0)
        gauge = cmc.FixLowModes(tuple(grid.pack(base.coeffs)[:4]))
        res = cmc.newton_solve(cmc.CmcProblem(model, 2.0 / r0**2, L, gauge), base + noise)
        out.append((res, r0, beta))
    return out


def test_criterion_05_constant_norm_rigidity(verdict):
    t0 = time.perf_counter()
    failures = []
    schw = ALL_MODELS["schwarzschild"]
    grid = SphereGrid(12)
    rng = np.random.default_rng(500)
    worst_sch = 0.0
    for k in range(20):
        r0 = rng.uniform(3.5, 8.0)
        E = 2 * float(schw.fsq(r0)) / r0**2
        u0 = random_profile_u(schw, grid, rng, r0=r0, amplitude=0.02)
        res = cmc.newton_solve(cmc.CmcProblem(schw, E, 12), u0)
        v = cmc.classify(res.u, schw)
        worst_sch = max(worst_sch, v.distance)
        if not (res.converged and v.kind == "SphereOfSymmetry" and v.distance < 1e-6):
            failures.append(f"Schwarzschild solve {k}: converged={res.converged}, {v.kind}")
    worst_mink = 0.0
    for k, (res, r0, beta) in enumerate(_minkowski_solves(10)):
        v = cmc.classify(res.u, SPACE_FORMS["minkowski"])
        worst_mink = max(worst_mink, v.distance)
        if not (res.converged and v.distance < 1e-6 and v.r0 == pytest.approx(r0, rel=1e-8)):
            failures.append(f"Minkowski solve {k}: converged={res.converged}, distance {v.distance:.1e}")
    boosted = io.load_fixture("minkowski_boosted").with_grid(SphereGrid(32))
    fit = cmc.classify(boosted.u)
    dev = float(np.max(np.abs(boosted.hsq().values - 2.0 / fit.r0**2)))
    if not dev < 1e-8:
        failures.append(f"boosted fixture |hsq - 2/r0^2| = {dev:.2e}")
    elapsed = time.perf_counter() - t0
    detail = (f"20 Schwarzschild + 10 Minkowski solves, distances {worst_sch:.1e} / {worst_mink:.1e}; "
              f"fixture deviation {dev:.1e}")
    verdict(5, "constant |H|^2 solutions are rigid", failures, detail, elapsed, 180)


def test_criterion_06_liouville_mobius(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(600)
    grid = SphereGrid(8)
    failures = []
    worst_d = worst_r = worst_s = 0.0
    done = 0
    while done < 10:
        a, b, c, d = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        if abs(a * d - b * c) < 0.1:
            continue
        rep = cmc.mobius_conformal_factor(a, b, c, d, grid)
        res = float(np.max(np.abs(cmc.liouville_residual(rep.u, 1.0).values)))
        spread = cmc.max_principle_functional(rep.u, 1.0).spread
        worst_d, worst_r, worst_s = max(worst_d, rep.low_mode_distance), max(worst_r, res), max(worst_s, spread)
        if not (rep.low_mode_distance < 1e-9 and res < 1e-8 and spread < 1e-6):
            failures.append(f"map {done}: distance {rep.low_mode_distance:.1e}, residual {res:.1e}")
        done += 1
    # Converged Minkowski solutions solve the Liouville equation with E/2.
    for res, r0, _ in _minkowski_solves(5, L=8, seed=601):
        spread = cmc.max_principle_functional(res.u, 1.0 / r0**2).spread
        worst_s = max(worst_s, spread)
        if not spread < 1e-6:
            failures.append(f"Newton solution spread {spread:.1e}")
    elapsed = time.perf_counter() - t0
    detail = f"distance {worst_d:.1e}, residual {worst_r:.1e}, (Lap+2)u spread {worst_s:.1e}"
    verdict(6, "Mobius conformal factors are l<=1", failures, detail, elapsed, 30)


def test_criterion_07_obata(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(700)
    failures = []
    worst = 0.0
    for k in range(10):
        u3 = random_profile_u(WarpingModel.minkowski(4), ZonalGrid(3, 10), rng, amplitude=0.4)
        u2 = random_profile_u(WarpingModel.minkowski(), SphereGrid(8), rng, amplitude=0.4)
        for tag, u, n in (("S^3", u3, 3), ("S^2", u2, 2)):
            gap = cmc.obata_weighted_identity(u, n).gap
            worst = max(worst, gap)
            if not gap < 1e-7:
                failures.append(f"{tag} case {k}: {gap:.2e}")
    u = random_profile_u(WarpingModel.minkowski(), SphereGrid(12), rng, amplitude=0.4)
    lv = cmc.conformal_scalar_curvature(u, 2).values
    lr = 2 * cmc.liouville_residual(u, 0.0).values
    cons = float(np.max(np.abs(lv - lr)) / np.max(np.abs(lr)))
    if not cons < 1e-10:
        failures.append(f"n=2 consistency {cons:.2e}")
    elapsed = time.perf_counter() - t0
    verdict(7, "weighted Obata identity", failures, f"max gap {worst:.2e}; n=2 consistency {cons:.1e}",
            elapsed, 30)


def test_criterion_08_curvature_oracle(verdict):
    t0 = time.perf_counter()
    rows, errata = suites.curvature_suite(points=10, seed=800)
    failures = [f"{r.identity}: {r.max_error:.2e}" for r in rows if not r.passed]
    names = {e.component for e in errata}
    for required in ("R_abcd", "Gamma^r_tt"):
        if required not in names:
            failures.append(f"missing erratum {required}")
    elapsed = time.perf_counter() - t0
    worst = {key: max(r.max_error for r in rows if key in r.identity)
             for key in ("FD oracle", "Ricci flat", "constant sectional", "contractions")}
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f"; errata {sorted(names)}"
    verdict(8, "curvature oracle and errata", failures, detail, elapsed, 60)


def test_criterion_09_killing(verdict):
    t0 = time.perf_counter()
    rows = suites.killing_suite(L=16, seed=900)
    failures = [f"{r.identity}: {r.max_error:.2e}" for r in rows if not r.passed]
    families = {r.identity.split("<K_")[1].split(",")[0] for r in rows}
    if families != {"time", "boost", "ads_k", "ads_kprime", "ds_k"}:
        failures.append(f"families covered: {sorted(families)}")
    elapsed = time.perf_counter() - t0
    worst = max(r.max_error for r in rows)
    verdict(9, "Killing pairings vs closed forms", failures,
            f"{len(rows)} family/model pairs, max error {worst:.1e} (tol 1e-08)", elapsed, 10)


def test_criterion_10_jacobian(verdict):
    t0 = time.perf_counter()
    failures = []
    worst = 0.0
    for k, (kind, model) in enumerate(ALL_MODELS.items()):
        u = random_profile_u(model, SphereGrid(12), np.random.default_rng(1000 + k), amplitude=0.05)
        gc = cmc.gradient_check(cmc.CmcProblem(model, 1.0, 12), u, directions=10, seed=k)
        worst = max(worst, gc.max_relative_error)
        if not gc.max_relative_error < 1e-6:
            failures.append(f"{kind}: {gc.max_relative_error:.2e}")
    elapsed = time.perf_counter() - t0
    verdict(10, "Newton Jacobian vs central differences", failures,
            f"10 directions x 4 models, max error {worst:.1e} (tol 1e-06)", elapsed, None)
