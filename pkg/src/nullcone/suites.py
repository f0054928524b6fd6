"""Batteries of identity checks behind ``nullcone verify-identities``.

Each suite returns rows ``(identity, max_error, tolerance, passed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cmc, curvature, rigidity
from .spacetime import WarpingModel
from .spectral import SphereGrid, ZonalGrid
from .surface import KILLING_FAMILIES, NullConeSurface, random_profile_u, random_surface

DEFAULT_TOLERANCES = {
    "frames": 1e-10,
    "cnnc": 1e-6,
    "killing": 1e-8,
    "ricci1": 1e-8,
    "bochner": 1e-8,
    "max_principle": 1e-6,
    "obata": 1e-7,
    "curvature": 1e-6,
    "ricci_flat": 1e-7,
    "constant_curvature": 1e-7,
    "contractions": 1e-5,
}

SUITES = ("frames", "cnnc", "killing", "ricci1", "bochner", "obata", "curvature")

KILLING_APPLICABLE = {
    "time": ("minkowski", "schwarzschild", "desitter", "antidesitter"),
    "boost": ("minkowski",),
    "ads_k": ("antidesitter",),
    "ads_kprime": ("antidesitter",),
    "ds_k": ("desitter",),
}


@dataclass
class Row:
    identity: str
    max_error: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {"identity": self.identity, "max_error": self.max_error,
                "tolerance": self.tolerance, "pass": self.passed}


def _row(name, err, tol) -> Row:
    err = float(err)
    return Row(name, err, float(tol), bool(err < tol))


def _tol(tolerances, key):
    return (tolerances or {}).get(key, DEFAULT_TOLERANCES[key])


def frames_suite(surfaces: dict, tolerances=None) -> list:
    """Null-frame pairings, induced metric and the two ``|H|^2`` routes."""
    tol = _tol(tolerances, "frames")
    rows = []
    for name, surf in surfaces.items():
        fr = surf.frame()
        rows.append(_row(f"{name}: null pairings", max(fr.pairing_residuals().values()), tol))
        rows.append(_row(f"{name}: induced metric", fr.induced_metric_residual(), tol))
        h1, h2 = surf.hsq().values, surf.hsq_u_form().values
        rows.append(_row(f"{name}: hsq routes", np.max(np.abs(h1 - h2)) / np.max(np.abs(h1)), tol))
    return rows


def cnnc_suite(surfaces: dict, tolerances=None) -> list:
    tol = _tol(tolerances, "cnnc")
    rows = []
    for name, surf in surfaces.items():
        res = surf.cnnc_residual()
        rows.append(_row(f"{name}: alpha_H + dlog|H|", np.max(np.abs(res)), tol))
    return rows


def killing_suite(L: int = 16, w0: float = 0.7, seed: int = 0, tolerances=None) -> list:
    """Computed against closed-form pairings for each family on a random surface."""
    tol = _tol(tolerances, "killing")
    rows = []
    models = {"minkowski": WarpingModel.minkowski(), "schwarzschild": WarpingModel.schwarzschild(1.0),
              "desitter": WarpingModel.de_sitter(1.0), "antidesitter": WarpingModel.anti_de_sitter(1.0)}
    grid = SphereGrid(L)
    rng = np.random.default_rng(seed)
    for kind, model in models.items():
        surf = random_surface(model, grid, rng, w0=w0)
        for fam in KILLING_FAMILIES:
            if kind not in KILLING_APPLICABLE[fam]:
                continue
            idx = (None,) if fam == "time" else (1, 2, 3)
            err = max(surf.killing_pairing(fam, i).max_rel_error for i in idx)
            rows.append(_row(f"{kind}: <K_{fam}, L>", err, tol))
    return rows


def ricci1_suite(surfaces: dict, seed: int = 0, count: int = 2, tolerances=None) -> list:
    """Integrated identity for the linearized operator, random variations ``u``."""
    tol = _tol(tolerances, "ricci1")
    rng = np.random.default_rng(seed)
    rows = []
    for name, surf in surfaces.items():
        grid = surf.grid
        worst = 0.0
        for _ in range(count):
            c = np.where(grid.mask & (grid.degree <= grid.L // 2), rng.standard_normal(grid.mask.shape), 0.0)
            u = grid.from_coeffs(c)
            worst = max(worst, rigidity.quadratic_form_identity(surf, u).relative_gap)
        rows.append(_row(f"{name}: integral identity", worst, tol))
    return rows


def bochner_suite(L: int = 16, count: int = 5, seed: int = 0, tolerances=None) -> list:
    tol = _tol(tolerances, "bochner")
    tol_mp = _tol(tolerances, "max_principle")
    rng = np.random.default_rng(seed)
    grid = SphereGrid(L)
    M = WarpingModel.minkowski()
    worst = max(cmc.laplacian_bochner_identity(random_profile_u(M, grid, rng, amplitude=0.3)).gap
                for _ in range(count))
    rows = [_row("Bochner expansion of Lap(Liouville scalar)", worst, tol)]
    spread = 0.0
    pointwise = 0.0
    for _ in range(count):
        coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        rep = cmc.mobius_conformal_factor(*coeffs, SphereGrid(8))
        mp = cmc.max_principle_functional(rep.u, 1.0)
        spread = max(spread, mp.spread)
        pointwise = max(pointwise, mp.pointwise_gap)
    rows.append(_row("(Lap + 2)u constant on Mobius solutions", spread, tol_mp))
    rows.append(_row("u Lap(Lap+2)u = 2|traceless Hess|^2", pointwise, 1e-7))
    return rows


def obata_suite(count: int = 5, seed: int = 0, tolerances=None) -> list:
    tol = _tol(tolerances, "obata")
    rng = np.random.default_rng(seed)
    z = max(cmc.obata_weighted_identity(
        random_profile_u(WarpingModel.minkowski(4), ZonalGrid(3, 10), rng, amplitude=0.4), 3).gap
        for _ in range(count))
    s = max(cmc.obata_weighted_identity(
        random_profile_u(WarpingModel.minkowski(), SphereGrid(8), rng, amplitude=0.4), 2).gap
        for _ in range(count))
    u = random_profile_u(WarpingModel.minkowski(), SphereGrid(12), rng, amplitude=0.4)
    lv = cmc.conformal_scalar_curvature(u, 2).values
    lr = 2 * cmc.liouville_residual(u, 0.0).values
    return [_row("weighted identity on S^3 (zonal)", z, tol),
            _row("weighted identity on S^2", s, tol),
            _row("n=2 scalar curvature = 2 x Liouville", np.max(np.abs(lv - lr)) / np.max(np.abs(lr)), 1e-10)]


def curvature_suite(points: int = 10, seed: int = 0, tolerances=None):
    """Oracle against closed forms; returns ``(rows, errata)``.

    Printed components that disagree are reported as errata; passing is
    decided by the corrected closed forms.
    """
    tol = _tol(tolerances, "curvature")
    rng = np.random.default_rng(seed)
    models = {"minkowski": WarpingModel.minkowski(), "schwarzschild": WarpingModel.schwarzschild(1.0),
              "desitter": WarpingModel.de_sitter(1.0), "antidesitter": WarpingModel.anti_de_sitter(1.0)}
    rows, errata = [], []
    for kind, model in models.items():
        chart = curvature.static_chart(model)
        pts = curvature.sample_static_points(model, points, rng)
        worst = worst_ric = worst_cc = 0.0
        kappa = curvature.sectional_curvature(model)
        for x in pts:
            res = curvature.riemann_fd(chart, x)
            ref = curvature.riemann_static_closedform(model, x)
            worst = max(worst, curvature.relative_tensor_error(res.riemann, ref, res.metric, x[1]))
            if kind == "schwarzschild":
                worst_ric = max(worst_ric, ricci_flatness(res, ref))
            if kappa is not None:
                cc = curvature.constant_curvature_tensor(res.metric, kappa)
                worst_cc = max(worst_cc, curvature.relative_tensor_error(res.riemann, cc, res.metric, x[1]))
        rows.append(_row(f"{kind}: FD oracle vs closed form", worst, tol))
        if kind == "schwarzschild":
            rows.append(_row(f"{kind}: Ricci flat", worst_ric, _tol(tolerances, "ricci_flat")))
        else:
            rows.append(_row(f"{kind}: constant sectional curvature", worst_cc,
                             _tol(tolerances, "constant_curvature")))
        surf = random_surface(model, SphereGrid(16), rng)
        fc = curvature.ef_riemann_contractions(surf, count=4, seed=seed)
        rows.append(_row(f"{kind}: frame contractions", max(fc.rel_error_trace, fc.rel_error_mixed),
                         _tol(tolerances, "contractions")))
        errata.extend(curvature.audit_printed_curvature(model, pts[:2]))
        errata.extend(curvature.christoffels_static(model, pts[0]).errata)
    return rows, curvature.unique_errata(errata)


def ricci_flatness(res, riemann_ref) -> float:
    """``max |Ric^i_j|`` over the largest mixed component ``|R^i_jkl|`` of the reference."""
    ginv = np.linalg.inv(res.metric)
    mixed_ric = ginv @ res.ricci()
    mixed_ref = np.einsum("ia,ajkl->ijkl", ginv, riemann_ref)
    return float(np.max(np.abs(mixed_ric)) / np.max(np.abs(mixed_ref)))


def run_suite(name: str, surfaces: dict | None = None, tolerances=None, seed: int = 0):
    """Run one suite; returns ``(rows, errata)``."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    if name == "curvature":
        return curvature_suite(seed=seed, tolerances=tolerances)
    if name in ("frames", "cnnc", "ricci1"):
        if not surfaces:
            raise ValueError(f"suite {name!r} needs at least one surface")
        fn = {"frames": frames_suite, "cnnc": cnnc_suite, "ricci1": ricci1_suite}[name]
        return fn(surfaces, tolerances=tolerances), []
    fn = {"killing": killing_suite, "bochner": bochner_suite, "obata": obata_suite}[name]
    return fn(seed=seed, tolerances=tolerances), []


def hsq_spread(surface: NullConeSurface) -> float:
    h = surface.hsq().values
    return float(np.ptp(h) / max(abs(float(np.mean(h))), math.ulp(1.0)))
