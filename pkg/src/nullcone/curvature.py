"""Curvature of warped static metrics: closed forms and a finite-difference oracle.

Index conventions follow ``R(X, Y)Z = D_X D_Y Z - D_Y D_X Z - D_[X,Y] Z`` and
``R(X, Y, Z, W) = <R(X, Y) W, Z>``.  In coordinates::

    R(d_a, d_b) d_c = R^d_{abc} d_d
    R^d_{abc} = d_a G^d_{bc} - d_b G^d_{ac} + G^d_{ae} G^e_{bc} - G^d_{be} G^e_{ac}
    R_{abec}  = g_{ed} R^d_{abc} = R(d_a, d_b, d_e, d_c)

so a space of constant curvature ``k`` has ``R_{abcd} = k (g_ac g_bd - g_ad g_bc)``.
Arrays named ``riemann`` below always hold the all-lower tensor indexed as
``R(d_a, d_b, d_c, d_d)``.

Coordinates: static ``(t, r, angles...)``, EF ``(v, w, angles...)``; angles are
hyperspherical with round metric ``diag(1, sin^2 a1, sin^2 a1 sin^2 a2, ...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NumericGuardError
from .spacetime import (WarpingModel, default_r_ref, radius_from_tortoise, round_metric_diag,
                        tortoise)

ERRATUM_RTOL = 1e-4
DEFAULT_STEPS = (2e-3, 1e-3)


# ---------------------------------------------------------------------------
# Round-sphere pieces
# ---------------------------------------------------------------------------

def round_metric_derivs(angles) -> np.ndarray:
    """``d_j gtilde_kk`` as an array ``[j, k]`` for the hyperspherical round metric."""
    angles = np.asarray(angles, dtype=float)
    d = angles.shape[0]
    diag = round_metric_diag(angles)
    out = np.zeros((d, d))
    for k in range(d):
        for j in range(k):
            out[j, k] = 2.0 * diag[k] / math.tan(angles[j])
    return out


def round_christoffels(angles) -> np.ndarray:
    """Christoffel symbols ``G^c_{ab}`` of the round metric, indexed ``[c, a, b]``."""
    angles = np.asarray(angles, dtype=float)
    d = angles.shape[0]
    g = round_metric_diag(angles)
    dg = round_metric_derivs(angles)
    G = np.zeros((d, d, d))
    for c in range(d):
        for a in range(d):
            for b in range(d):
                val = 0.0
                if c == b:
                    val += dg[a, b]
                if c == a:
                    val += dg[b, a]
                if a == b:
                    val -= dg[c, a]
                G[c, a, b] = 0.5 * val / g[c]
    return G


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------

@dataclass
class MetricChart:
    """A coordinate chart with a callable Lorentzian metric.

    ``metric(x)`` returns the ``(N, N)`` matrix at ``x``; ``dmetric(x)``, when
    given, returns exact first derivatives ``[k, i, j] = d_k g_ij`` and lets
    the oracle skip one layer of numerical differentiation.  ``scale(x)`` sets
    the per-coordinate finite-difference step scale.
    """

    kind: str
    dim: int
    metric: Callable
    scale: Callable
    dmetric: Optional[Callable] = None
    model: Optional[WarpingModel] = field(default=None, repr=False)
    r_of: Optional[Callable] = field(default=None, repr=False)

    def signature_ok(self, x) -> bool:
        ev = np.linalg.eigvalsh(self.metric(np.asarray(x, dtype=float)))
        return int(np.sum(ev < 0)) == 1 and int(np.sum(ev > 0)) == self.dim - 1


def static_chart(model: WarpingModel) -> MetricChart:
    """``(t, r, angles)`` chart of ``-F dt^2 + dr^2/F + r^2 round``."""
    dim = model.n + 1

    def metric(x):
        r = x[1]
        F = float(model.fsq(r))
        g = np.zeros((dim, dim))
        g[0, 0] = -F
        g[1, 1] = 1.0 / F
        g[2:, 2:] = np.diag(r * r * round_metric_diag(x[2:]))
        return g

    def scale(x):
        s = np.ones(dim)
        s[:2] = x[1]
        if np.isfinite(model.r_hi):
            s[1] = min(s[1], 0.5 * (model.r_hi - x[1]))
        s[1] = min(s[1], 0.5 * (x[1] - model.r_lo))
        return s

    return MetricChart("static", dim, metric, scale, model=model, r_of=lambda x: x[1])


def ef_chart(model: WarpingModel, r_ref: float | None = None) -> MetricChart:
    """``(v, w, angles)`` chart of ``-F dv dw + r(v, w)^2 round``.

    ``r`` is recovered from ``(v - w)/2 = r*`` by root finding; the metric
    derivatives use ``d_v r = F/2`` and ``d_w r = -F/2`` exactly.
    """
    dim = model.n + 1
    r_ref = default_r_ref(model) if r_ref is None else float(r_ref)

    def r_of(x):
        return float(radius_from_tortoise(model, 0.5 * (x[0] - x[1]), r_ref))

    def metric(x):
        r = r_of(x)
        g = np.zeros((dim, dim))
        g[0, 1] = g[1, 0] = -0.5 * float(model.fsq(r))
        g[2:, 2:] = np.diag(r * r * round_metric_diag(x[2:]))
        return g

    def dmetric(x):
        r = r_of(x)
        F = float(model.fsq(r))
        dF = float(model.dfsq(r))
        diag = round_metric_diag(x[2:])
        dg = np.zeros((dim, dim, dim))
        for k, drdk in ((0, 0.5 * F), (1, -0.5 * F)):
            dg[k, 0, 1] = dg[k, 1, 0] = -0.5 * dF * drdk
            dg[k, 2:, 2:] = np.diag(2 * r * drdk * diag)
        dga = round_metric_derivs(x[2:])
        for j in range(dim - 2):
            dg[2 + j, 2:, 2:] = np.diag(r * r * dga[j])
        return dg

    def scale(x):
        s = np.ones(dim)
        s[:2] = r_of(x)
        return s

    return MetricChart("ef", dim, metric, scale, dmetric=dmetric, model=model, r_of=r_of)


# ---------------------------------------------------------------------------
# Finite-difference oracle
# ---------------------------------------------------------------------------

_STENCIL = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


def _fd_derivative(fun, x, k, h):
    """Five-point central difference of ``fun`` along coordinate ``k``."""
    acc = 0.0
    for off, wgt in _STENCIL:
        xs = np.array(x, dtype=float)
        xs[k] -= off * h
        acc = acc + wgt * fun(xs)
    return -acc / (12.0 * h)


def _christoffels_from(g, dg):
    ginv = np.linalg.inv(g)
    # lower[e, a, b] = (d_a g_eb + d_b g_ea - d_e g_ab) / 2
    lower = 0.5 * (np.einsum("aeb->eab", dg) + np.einsum("bea->eab", dg) - dg)
    return np.einsum("de,eab->dab", ginv, lower)


def christoffels_fd(chart: MetricChart, x, rel_step: float) -> np.ndarray:
    """Christoffel symbols ``[d, a, b]``; metric derivatives exact when available."""
    x = np.asarray(x, dtype=float)
    g = chart.metric(x)
    if chart.dmetric is not None:
        return _christoffels_from(g, chart.dmetric(x))
    h = rel_step * chart.scale(x)
    dg = np.stack([_fd_derivative(chart.metric, x, k, h[k]) for k in range(chart.dim)])
    return _christoffels_from(g, dg)


def _riemann_once(chart: MetricChart, x, rel_step: float):
    G = christoffels_fd(chart, x, rel_step)
    h = rel_step * chart.scale(x)
    dG = np.stack([_fd_derivative(lambda y: christoffels_fd(chart, y, rel_step), x, k, h[k])
                   for k in range(chart.dim)])
    # mixed[d, a, b, c] = R^d_{abc}
    mixed = (np.einsum("adbc->dabc", dG) - np.einsum("bdac->dabc", dG)
             + np.einsum("dae,ebc->dabc", G, G) - np.einsum("dbe,eac->dabc", G, G))
    g = chart.metric(x)
    return np.einsum("ed,dabc->abec", g, mixed), G


@dataclass
class RiemannResult:
    riemann: np.ndarray
    christoffels: np.ndarray
    metric: np.ndarray
    error_estimate: float
    steps: tuple

    def ricci(self) -> np.ndarray:
        """``Ric_{bc} = g^{ad} R(d_a, d_b, d_d, d_c)``."""
        ginv = np.linalg.inv(self.metric)
        return np.einsum("ad,abdc->bc", ginv, self.riemann)

    def contract(self, X, Y, Z, W) -> float:
        return float(np.einsum("abcd,a,b,c,d->", self.riemann, X, Y, Z, W))


def riemann_fd(chart: MetricChart, x, steps=DEFAULT_STEPS, guard_rtol: float = 1e-4) -> RiemannResult:
    """Riemann tensor by nested central differences with Richardson extrapolation.

    Two step sizes ``h1 = 2 h2`` (relative to the chart's step scale) are
    combined as ``(16 R(h2) - R(h1)) / 15``; the difference of the two raw
    results is reported as the error estimate.

    Raises
    ------
    NumericGuardError
        If the two step sizes disagree by more than ``guard_rtol`` relative,
        which signals a step that is too large or too small.
    """
    h1, h2 = steps
    if not math.isclose(h1, 2 * h2):
        raise ValueError("Richardson extrapolation expects steps (2h, h)")
    x = np.asarray(x, dtype=float)
    R1, _ = _riemann_once(chart, x, h1)
    R2, G = _riemann_once(chart, x, h2)
    R = (16.0 * R2 - R1) / 15.0
    g = chart.metric(x)
    scale = max(float(np.max(np.abs(R))), _curvature_scale(chart, x, g))
    err = float(np.max(np.abs(R2 - R1))) / 15.0
    if err > guard_rtol * scale:
        raise NumericGuardError(
            f"finite-difference steps disagree (error {err:.3e} vs scale {scale:.3e})", guard="fd_step")
    return RiemannResult(R, G, g, err, (h1, h2))


def _curvature_scale(chart: MetricChart, x, g) -> float:
    """Natural size ``|g|^2 / r^2`` of an all-lower curvature tensor at ``x``."""
    r = chart.r_of(x) if chart.r_of is not None else 1.0
    return float(np.max(np.abs(g)) ** 2 / r**2)


def relative_tensor_error(R, R_ref, g, r) -> float:
    """``max |R - R_ref|`` relative to ``max(|R_ref|, |g|^2/r^2)``."""
    scale = max(float(np.max(np.abs(R_ref))), float(np.max(np.abs(g)) ** 2 / r**2))
    return float(np.max(np.abs(np.asarray(R) - np.asarray(R_ref)))) / scale


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def ef_christoffels(model: WarpingModel, r, angles) -> np.ndarray:
    """Exact Christoffel symbols ``[d, a, b]`` of the EF chart.

    ``r`` and every entry of ``angles`` may be arrays of a common shape; the
    result then has that shape appended.
    """
    r = np.asarray(r, dtype=float)
    angles = [np.asarray(a, dtype=float) for a in angles]
    d = len(angles)
    N = d + 2
    shape = np.broadcast(r, *angles).shape
    F = model.fsq(r) * np.ones(shape)
    dF = model.dfsq(r) * np.ones(shape)
    r = r * np.ones(shape)
    G = np.zeros((N, N, N) + shape)
    G[0, 0, 0] = 0.5 * dF
    G[1, 1, 1] = -0.5 * dF
    diag = _round_diag_arrays(angles, shape)
    for a in range(d):
        A = 2 + a
        G[A, A, 0] = G[A, 0, A] = F / (2 * r)
        G[A, A, 1] = G[A, 1, A] = -F / (2 * r)
        G[0, A, A] = -r * diag[a]
        G[1, A, A] = r * diag[a]
    G[2:, 2:, 2:] = _round_christoffel_arrays(angles, shape)
    return G


def _round_diag_arrays(angles, shape):
    out = [np.ones(shape)]
    for k in range(1, len(angles)):
        out.append(out[-1] * np.sin(angles[k - 1]) ** 2)
    return out


def _round_christoffel_arrays(angles, shape):
    d = len(angles)
    diag = _round_diag_arrays(angles, shape)
    G = np.zeros((d, d, d) + shape)
    for k in range(d):
        for j in range(k):
            cot = np.cos(angles[j]) / np.sin(angles[j])
            # d_j g_kk = 2 cot(a_j) g_kk
            G[k, k, j] = G[k, j, k] = cot
            G[j, k, k] = -cot * diag[k] / diag[j]
    return G


def static_christoffels_closedform(model: WarpingModel, point) -> np.ndarray:
    """Validated static-chart Christoffel symbols ``[d, a, b]``."""
    point = np.asarray(point, dtype=float)
    r = point[1]
    F = float(model.fsq(r))
    dF = float(model.dfsq(r))
    d = model.n - 1
    G = np.zeros((d + 2,) * 3)
    G[1, 0, 0] = 0.5 * F * dF
    G[0, 0, 1] = G[0, 1, 0] = 0.5 * dF / F
    G[1, 1, 1] = -0.5 * dF / F
    diag = round_metric_diag(point[2:])
    for a in range(d):
        A = 2 + a
        G[A, A, 1] = G[A, 1, A] = 1.0 / r
        G[1, A, A] = -F * r * diag[a]
    G[2:, 2:, 2:] = round_christoffels(point[2:])
    return G


def static_christoffels_printed(model: WarpingModel, point) -> dict:
    """The static-chart symbols exactly as printed in the reference table.

    Keys name the symbol; values are full ``[d, a, b]`` arrays holding only
    that symbol's entries.
    """
    point = np.asarray(point, dtype=float)
    r = point[1]
    F = float(model.fsq(r))
    f = math.sqrt(F)
    fp = 0.5 * float(model.dfsq(r)) / f
    d = model.n - 1
    N = d + 2
    diag = round_metric_diag(point[2:])
    out = {}

    def blank():
        return np.zeros((N, N, N))

    G = blank()
    G[1, 0, 0] = -fp / f
    out["Gamma^r_tt"] = G
    G = blank()
    G[0, 0, 1] = G[0, 1, 0] = fp / f
    out["Gamma^t_tr"] = G
    G = blank()
    G[1, 1, 1] = -fp / f
    out["Gamma^r_rr"] = G
    G = blank()
    for a in range(d):
        G[2 + a, 2 + a, 1] = G[2 + a, 1, 2 + a] = 1.0 / r
    out["Gamma^b_ar"] = G
    G = blank()
    for a in range(d):
        G[1, 2 + a, 2 + a] = -F * r * diag[a]
    out["Gamma^r_ab"] = G
    G = blank()
    G[2:, 2:, 2:] = round_christoffels(point[2:])
    out["Gamma^c_ab"] = G
    return out


def _fill(R, a, b, c, d, val):
    """Set ``R[a,b,c,d] = val`` and all entries related by the Riemann symmetries."""
    for (i, j, k, l), s in (((a, b, c, d), 1), ((b, a, c, d), -1), ((a, b, d, c), -1), ((b, a, d, c), 1),
                            ((c, d, a, b), 1), ((d, c, a, b), -1), ((c, d, b, a), -1), ((d, c, b, a), 1)):
        R[i, j, k, l] = s * val


def static_riemann_blocks(model: WarpingModel, r, angles):
    """Named component blocks of the static-chart Riemann tensor (validated forms).

    Returns a dict with ``R_trrt``, ``R_tabt`` (coefficient of ``gtilde_ab``),
    ``R_rabr`` (coefficient of ``gtilde_ab``) and ``R_abcd`` (coefficient of
    ``gtilde_ac gtilde_bd - gtilde_ad gtilde_bc``).
    """
    F = float(model.fsq(r))
    dF = float(model.dfsq(r))
    d2F = float(model.d2fsq(r))
    return {
        "R_trrt": -0.5 * d2F,
        "R_tabt": -0.5 * r * F * dF,
        "R_rabr": 0.5 * r * dF / F,
        "R_abcd": r * r * (1.0 - F),
    }


def riemann_static_closedform(model: WarpingModel, point) -> np.ndarray:
    """All-lower Riemann tensor of the static chart from the validated blocks."""
    point = np.asarray(point, dtype=float)
    r = point[1]
    blocks = static_riemann_blocks(model, r, point[2:])
    d = model.n - 1
    N = d + 2
    gt = round_metric_diag(point[2:])
    R = np.zeros((N,) * 4)
    _fill(R, 0, 1, 1, 0, blocks["R_trrt"])
    for a in range(d):
        A = 2 + a
        _fill(R, 0, A, A, 0, blocks["R_tabt"] * gt[a])
        _fill(R, 1, A, A, 1, blocks["R_rabr"] * gt[a])
        for b in range(d):
            if b != a:
                B = 2 + b
                _fill(R, A, B, A, B, blocks["R_abcd"] * gt[a] * gt[b])
    return R


def static_riemann_printed(model: WarpingModel, r, angles) -> dict:
    """Component blocks exactly as printed, same normalization as :func:`static_riemann_blocks`.

    The printed sphere block ``R_abdc = r^2 Rtilde_abdc + r f^2 (...)`` is
    converted to the coefficient of ``gtilde_ac gtilde_bd - gtilde_ad gtilde_bc``
    in ``R(d_a, d_b, d_c, d_d)`` on the unit round sphere.
    """
    F = float(model.fsq(r))
    f = math.sqrt(F)
    fp = 0.5 * float(model.dfsq(r)) / f
    fpp = (0.5 * float(model.d2fsq(r)) - fp * fp) / f
    return {
        "R_trrt": -f * fpp - fp * fp,
        "R_tabt": -r * f**3 * fp,
        "R_rabr": fp / f * r * r,
        # R_abdc = -coef * (...) with coef the R_abcd coefficient
        "R_abcd": -(-r * r + r * F),
    }


def ef_riemann_relations(model: WarpingModel, r) -> dict:
    """EF-chart components ``R(d_w, d_v, d_w, d_v)``, ``R(d_w, d_a, d_b, d_v)`` / gtilde and the two zeros."""
    F = float(model.fsq(r))
    dF = float(model.dfsq(r))
    d2F = float(model.d2fsq(r))
    return {
        "R(w,v,w,v)": F * F * d2F / 8.0,
        "R(w,a,b,v)": -0.25 * r * F * dF,
        "R(w,a,b,w)": 0.0,
        "R(v,a,b,v)": 0.0,
    }


def ef_riemann_printed(model: WarpingModel, r) -> dict:
    F = float(model.fsq(r))
    f = math.sqrt(F)
    fp = 0.5 * float(model.dfsq(r)) / f
    fpp = (0.5 * float(model.d2fsq(r)) - fp * fp) / f
    return {
        "R(w,v,w,v)": -(f**4 / 4.0) * (f * fpp + fp * fp),
        "R(w,a,b,v)": -0.5 * r * f**3 * fp,
        "R(w,a,b,w)": 0.0,
        "R(v,a,b,v)": 0.0,
    }


def ef_riemann_from_tensor(R, gt_aa: float) -> dict:
    """Extract the EF relation components from an all-lower tensor (first angle)."""
    return {
        "R(w,v,w,v)": float(R[1, 0, 1, 0]),
        "R(w,a,b,v)": float(R[1, 2, 2, 0]) / gt_aa,
        "R(w,a,b,w)": float(R[1, 2, 2, 1]) / gt_aa,
        "R(v,a,b,v)": float(R[0, 2, 2, 0]) / gt_aa,
    }


def static_blocks_from_tensor(R, angles) -> dict:
    gt = round_metric_diag(angles)
    out = {
        "R_trrt": float(R[0, 1, 1, 0]),
        "R_tabt": float(R[0, 2, 2, 0]) / gt[0],
        "R_rabr": float(R[1, 2, 2, 1]) / gt[0],
    }
    if len(gt) >= 2:
        out["R_abcd"] = float(R[2, 3, 2, 3]) / (gt[0] * gt[1])
    return out


# ---------------------------------------------------------------------------
# Errata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Erratum:
    component: str
    printed: float
    oracle: float
    point: dict

    def as_dict(self) -> dict:
        return {"component": self.component, "printed": self.printed,
                "oracle": self.oracle, "point": self.point}


def _disagrees(printed: float, oracle: float, scale: float, rtol: float) -> bool:
    return abs(printed - oracle) > rtol * max(abs(oracle), abs(printed), scale)


def _point_dict(model, chart_kind, x):
    names = ("t", "r") if chart_kind == "static" else ("v", "w")
    out = {names[0]: float(x[0]), names[1]: float(x[1])}
    for k, a in enumerate(x[2:], start=1):
        out[f"angle{k}"] = float(a)
    out["model"] = model.kind
    return out


@dataclass
class ChristoffelTable:
    """Validated symbols plus the audit trail of the printed table."""

    symbols: np.ndarray
    oracle: np.ndarray
    errata: list
    max_rel_error: float


def christoffels_static(model: WarpingModel, point, rtol: float = ERRATUM_RTOL,
                        rel_step: float = 1e-3) -> ChristoffelTable:
    """Static-chart Christoffels, each printed entry checked against the oracle.

    Entries that fail are replaced by the closed-form correction and logged as
    :class:`Erratum` records.  ``max_rel_error`` compares the returned table
    with the finite-difference oracle.
    """
    point = np.asarray(point, dtype=float)
    model.check_domain(point[1])
    chart = static_chart(model)
    oracle = christoffels_fd(chart, point, rel_step)
    exact = static_christoffels_closedform(model, point)
    scale = max(float(np.max(np.abs(oracle))), 1.0 / point[1])
    errata = []
    table = np.zeros_like(exact)
    for name, printed in static_christoffels_printed(model, point).items():
        mask = printed != 0
        mask |= _symbol_mask(name, exact.shape[0])
        bad = [idx for idx in zip(*np.nonzero(mask))
               if _disagrees(printed[idx], oracle[idx], scale, rtol)]
        if bad:
            idx = bad[0]
            errata.append(Erratum(name, float(printed[idx]), float(oracle[idx]),
                                  _point_dict(model, "static", point)))
            table[mask] = exact[mask]
        else:
            table[mask] = printed[mask]
    err = float(np.max(np.abs(table - oracle))) / scale
    return ChristoffelTable(table, oracle, errata, err)


def _symbol_mask(name: str, N: int) -> np.ndarray:
    m = np.zeros((N, N, N), dtype=bool)
    A = slice(2, N)
    if name == "Gamma^r_tt":
        m[1, 0, 0] = True
    elif name == "Gamma^t_tr":
        m[0, 0, 1] = m[0, 1, 0] = True
    elif name == "Gamma^r_rr":
        m[1, 1, 1] = True
    elif name == "Gamma^b_ar":
        for a in range(2, N):
            m[a, a, 1] = m[a, 1, a] = True
    elif name == "Gamma^r_ab":
        for a in range(2, N):
            m[1, a, a] = True
    elif name == "Gamma^c_ab":
        m[A, A, A] = True
    return m


def audit_printed_curvature(model: WarpingModel, points, r_ref: float | None = None,
                            rtol: float = ERRATUM_RTOL) -> list:
    """Compare every printed static and EF curvature component with the oracle.

    ``points`` are static-chart points ``(t, r, angles...)``; the EF checks
    use the same ``r`` and angles.  Returns the list of :class:`Erratum`.
    """
    errata = []
    schart = static_chart(model)
    r_ref = default_r_ref(model) if r_ref is None else r_ref
    echart = ef_chart(model, r_ref)
    for x in points:
        x = np.asarray(x, dtype=float)
        res = riemann_fd(schart, x)
        oracle = static_blocks_from_tensor(res.riemann, x[2:])
        printed = static_riemann_printed(model, x[1], x[2:])
        scale = _curvature_scale(schart, x, res.metric)
        for key in oracle:
            if _disagrees(printed[key], oracle[key], scale, rtol):
                errata.append(Erratum(key, printed[key], oracle[key], _point_dict(model, "static", x)))
        v, w = _ef_point(model, x, r_ref)
        xe = np.concatenate([[v, w], x[2:]])
        res_e = riemann_fd(echart, xe)
        oracle_e = ef_riemann_from_tensor(res_e.riemann, 1.0)
        printed_e = ef_riemann_printed(model, x[1])
        scale_e = _curvature_scale(echart, xe, res_e.metric)
        for key in oracle_e:
            if _disagrees(printed_e[key], oracle_e[key], scale_e, rtol):
                errata.append(Erratum(key, printed_e[key], oracle_e[key], _point_dict(model, "ef", xe)))
    return errata


def _ef_point(model, x, r_ref):
    rs = float(tortoise(model, x[1], r_ref))
    return x[0] + rs, x[0] - rs


def unique_errata(errata) -> list:
    """One record per component name (first occurrence)."""
    seen = {}
    for e in errata:
        seen.setdefault(e.component, e)
    return list(seen.values())


# ---------------------------------------------------------------------------
# Sample points and space-form checks
# ---------------------------------------------------------------------------

def sample_static_points(model: WarpingModel, count: int, rng) -> list:
    """Random static-chart points well inside the chart and away from the poles."""
    if model.kind == "schwarzschild":
        lo, hi = 2.5 * model.mass, 10.0 * model.mass
    elif model.kind == "desitter":
        lo, hi = 0.1 * model.radius_l, 0.8 * model.radius_l
    elif model.kind == "antidesitter":
        lo, hi = 0.2 * model.radius_l, 3.0 * model.radius_l
    else:
        lo, hi = 0.5, 5.0
    pts = []
    for _ in range(count):
        t = rng.uniform(-1.0, 1.0)
        r = rng.uniform(lo, hi)
        angles = [rng.uniform(0.4, math.pi - 0.4) for _ in range(model.n - 2)] + [rng.uniform(0, 2 * math.pi)]
        pts.append(np.array([t, r] + angles))
    return pts


def sectional_curvature(model: WarpingModel) -> Optional[float]:
    if model.kind == "minkowski":
        return 0.0
    if model.kind == "desitter":
        return 1.0 / model.radius_l**2
    if model.kind == "antidesitter":
        return -1.0 / model.radius_l**2
    return None


def constant_curvature_tensor(g, kappa: float) -> np.ndarray:
    return kappa * (np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g))


def null_ricci_from_oracle(res: RiemannResult, r: float, F: float) -> float:
    """``Ric(W, W)`` for ``W = (1/f) d_t + (1/r) d_angle1`` in the static chart."""
    W = np.zeros(res.metric.shape[0])
    W[0] = 1.0 / math.sqrt(F)
    W[2] = 1.0 / r
    return float(W @ res.ricci() @ W)


# ---------------------------------------------------------------------------
# Frame contractions on a null-cone surface
# ---------------------------------------------------------------------------

@dataclass
class FrameContractions:
    trace_lbar_l: np.ndarray
    trace_closed_form: np.ndarray
    mixed_lbar_l: np.ndarray
    mixed_closed_form: np.ndarray
    rel_error_trace: float
    rel_error_mixed: float
    points: np.ndarray


def ef_riemann_contractions(surface, count: int = 8, seed: int = 0) -> FrameContractions:
    """``sigma^ab R(Lbar, d_a, d_b, L)`` and ``R(Lbar, d_a, L, Lbar)`` two ways.

    The oracle route contracts :func:`riemann_fd` in the EF chart with the
    surface's null frame at ``count`` random points; the closed forms are
    ``-2(n-1) f f'/r`` and ``(4/r) d_a r (-(f f')' + f f'/r)``.  The mixed
    contraction is returned in coordinate components ``a = theta, phi``.
    """
    model = surface.model
    rng = np.random.default_rng(seed)
    chart = ef_chart(model, surface.r_ref)
    pts = surface.random_points(count, rng)
    tr, tr_cf, mix, mix_cf = [], [], [], []
    for theta, phi in pts:
        fr = surface.frame_at(theta, phi)
        x = np.array([fr.v, surface.w0, theta, phi])
        res = riemann_fd(chart, x)
        R = res.riemann
        T = fr.tangents
        sig_inv = np.linalg.inv(fr.sigma)
        tr.append(float(np.einsum("ab,ijkl,i,aj,bk,l->", sig_inv, R, fr.Lbar, T, T, fr.L)))
        mix.append(np.einsum("ijkl,i,aj,k,l->a", R, fr.Lbar, T, fr.L, fr.Lbar))
        r = fr.r
        ffp = float(model.f_fprime(r))
        ffp_p = float(model.ff_prime_prime(r))
        tr_cf.append(-2 * (model.n - 1) * ffp / r)
        mix_cf.append((4.0 / r) * np.asarray(fr.dr) * (-ffp_p + ffp / r))
    tr = np.array(tr)
    tr_cf = np.array(tr_cf)
    mix = np.array(mix)
    mix_cf = np.array(mix_cf)
    scale_tr = max(float(np.max(np.abs(tr_cf))), 1e-300)
    # Both vanish identically for flat space; use the curvature scale there.
    r_typ = float(np.mean([surface.frame_at(t, p).r for t, p in pts[:1]]))
    floor = 1.0 / r_typ**3
    e_tr = float(np.max(np.abs(tr - tr_cf))) / max(scale_tr, floor)
    e_mix = float(np.max(np.abs(mix - mix_cf))) / max(float(np.max(np.abs(mix_cf))), floor)
    return FrameContractions(tr, tr_cf, mix, mix_cf, e_tr, e_mix, np.array(pts))
