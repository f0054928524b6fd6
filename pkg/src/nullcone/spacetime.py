"""Static spherically symmetric spacetimes.

A model is fixed by the warping factor of

    g = -f^2(r) dt^2 + dr^2 / f^2(r) + r^2 g_{S^{n-1}}

through ``f^2`` and its first two radial derivatives.  All functions below are
vectorised over ``r`` and never mutate the model.

Conventions
-----------
- ``F = f^2``; ``ff' = F'/2``.
- Tortoise coordinate ``r* = int_{r_ref}^{r} ds / F(s)``.
- Eddington-Finkelstein (EF) coordinates ``v = t + r*``, ``w = t - r*``; the
  metric becomes ``-F dv dw + r^2 g_{S^{n-1}}`` so ``g_vw = -F/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError

# Fraction of 2m kept between the Schwarzschild horizon and the chart.
HORIZON_CLIP = 1e-6
QUAD_EPSABS = 1e-12

KINDS = ("minkowski", "schwarzschild", "desitter", "antidesitter", "custom")
SPACE_FORMS = ("minkowski", "desitter", "antidesitter")


@dataclass(frozen=True)
class WarpingModel:
    """Warping factor ``F = f^2`` with two derivatives on ``(r_lo, r_hi)``.

    ``regular_center`` marks models whose chart extends to ``r = 0`` (the
    space forms); there the tortoise integral may start at the center.
    Use the class constructors rather than building instances by hand.
    """

    kind: str
    fsq: Callable
    dfsq: Callable
    d2fsq: Callable
    r_lo: float
    r_hi: float
    n: int = 3
    mass: Optional[float] = None
    radius_l: Optional[float] = None
    regular_center: bool = False
    _closed_tortoise: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if int(self.n) != self.n or self.n < 3:
            raise ValueError("spacetime dimension parameter n must be an integer >= 3")

    # -- constructors -------------------------------------------------------
    @classmethod
    def minkowski(cls, n: int = 3) -> "WarpingModel":
        return cls(
            "minkowski",
            lambda r: np.ones_like(np.asarray(r, dtype=float)),
            lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            0.0, math.inf, n=n, regular_center=True,
            _closed_tortoise=lambda r: np.asarray(r, dtype=float),
        )

    @classmethod
    def schwarzschild(cls, mass: float, n: int = 3) -> "WarpingModel":
        if not mass > 0:
            raise ValueError("Schwarzschild mass must be positive")
        m = float(mass)

        def antiderivative(r):
            r = np.asarray(r, dtype=float)
            return r + 2 * m * np.log(r / (2 * m) - 1.0)

        return cls(
            "schwarzschild",
            lambda r: 1.0 - 2 * m / np.asarray(r, dtype=float),
            lambda r: 2 * m / np.asarray(r, dtype=float) ** 2,
            lambda r: -4 * m / np.asarray(r, dtype=float) ** 3,
            2 * m * (1 + HORIZON_CLIP), math.inf, n=n, mass=m,
            _closed_tortoise=antiderivative,
        )

    @classmethod
    def de_sitter(cls, radius_l: float, n: int = 3) -> "WarpingModel":
        if not radius_l > 0:
            raise ValueError("de Sitter radius must be positive")
        l = float(radius_l)
        return cls(
            "desitter",
            lambda r: 1.0 - (np.asarray(r, dtype=float) / l) ** 2,
            lambda r: -2 * np.asarray(r, dtype=float) / l**2,
            lambda r: np.full_like(np.asarray(r, dtype=float), -2 / l**2),
            0.0, l, n=n, radius_l=l, regular_center=True,
            _closed_tortoise=lambda r: l * np.arctanh(np.asarray(r, dtype=float) / l),
        )

    @classmethod
    def anti_de_sitter(cls, radius_l: float, n: int = 3) -> "WarpingModel":
        if not radius_l > 0:
            raise ValueError("anti-de Sitter radius must be positive")
        l = float(radius_l)
        return cls(
            "antidesitter",
            lambda r: 1.0 + (np.asarray(r, dtype=float) / l) ** 2,
            lambda r: 2 * np.asarray(r, dtype=float) / l**2,
            lambda r: np.full_like(np.asarray(r, dtype=float), 2 / l**2),
            0.0, math.inf, n=n, radius_l=l, regular_center=True,
            _closed_tortoise=lambda r: l * np.arctan(np.asarray(r, dtype=float) / l),
        )

    @classmethod
    def custom(cls, fsq, dfsq, d2fsq, r_lo: float, r_hi: float, n: int = 3,
               regular_center: bool = False, rtol: float = 1e-6) -> "WarpingModel":
        """Build a model from user callables, rejecting inconsistent derivatives.

        The derivative callables are compared against fourth-order centered
        differences of ``fsq`` (and of ``dfsq``) at interior sample radii.
        """
        model = cls("custom", fsq, dfsq, d2fsq, float(r_lo), float(r_hi), n=n,
                    regular_center=regular_center)
        _validate_derivatives(model, rtol)
        if np.any(np.asarray(fsq(_sample_radii(model))) <= 0):
            raise ValueError("f^2 must be positive on the domain")
        return model

    # -- descriptors --------------------------------------------------------
    @classmethod
    def from_descriptor(cls, desc: dict) -> "WarpingModel":
        kind = str(desc.get("kind", "")).lower().replace("-", "").replace("_", "")
        n = int(desc.get("n", 3))
        if kind == "minkowski":
            return cls.minkowski(n)
        if kind == "schwarzschild":
            return cls.schwarzschild(float(desc["mass"]), n)
        if kind == "desitter":
            return cls.de_sitter(float(desc["radius_l"]), n)
        if kind == "antidesitter":
            return cls.anti_de_sitter(float(desc["radius_l"]), n)
        raise ValueError(f"model descriptor kind {desc.get('kind')!r} is not serializable")

    def descriptor(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom models are code-only and cannot be serialized")
        return {
            "kind": self.kind,
            "mass": float(self.mass) if self.mass is not None else 0.0,
            "radius_l": float(self.radius_l) if self.radius_l is not None else 0.0,
            "n": int(self.n),
        }

    # -- helpers ------------------------------------------------------------
    @property
    def is_space_form(self) -> bool:
        return self.kind in SPACE_FORMS

    def with_n(self, n: int) -> "WarpingModel":
        from dataclasses import replace

        return replace(self, n=n)

    def in_domain(self, r, allow_center: bool = False) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        lo_ok = r > self.r_lo
        if allow_center and self.regular_center:
            lo_ok = r >= self.r_lo
        return lo_ok & (r < self.r_hi)

    def check_domain(self, r, allow_center: bool = False, what: str = "r"):
        ok = self.in_domain(r, allow_center)
        if not np.all(ok):
            bad = np.asarray(r, dtype=float)[~ok] if np.ndim(r) else np.asarray([r])
            raise DomainError(
                f"{what} outside model domain ({self.r_lo}, {self.r_hi}) "
                f"for {self.kind}: e.g. {bad.ravel()[:3]}")

    def f_fprime(self, r):
        """``f f' = (f^2)'/2``."""
        return 0.5 * np.asarray(self.dfsq(r), dtype=float)

    def ff_prime_prime(self, r):
        """``(f f')' = (f^2)''/2``."""
        return 0.5 * np.asarray(self.d2fsq(r), dtype=float)


def _sample_radii(model: WarpingModel, count: int = 9) -> np.ndarray:
    lo, hi = model.r_lo, model.r_hi
    if math.isinf(hi):
        scale = max(lo, 1.0)
        return lo + scale * np.linspace(0.3, 8.0, count)
    return lo + (hi - lo) * np.linspace(0.1, 0.9, count)


def _d1(fun, r, h):
    return (fun(r - 2 * h) - 8 * fun(r - h) + 8 * fun(r + h) - fun(r + 2 * h)) / (12 * h)


def _validate_derivatives(model: WarpingModel, rtol: float):
    r = _sample_radii(model)
    h = 1e-3 * np.minimum(np.maximum(r, 1e-2), 0.2 * (r - model.r_lo) + 1e-12)
    for name, fun, dfun in (("dfsq", model.fsq, model.dfsq), ("d2fsq", model.dfsq, model.d2fsq)):
        fd = _d1(lambda x: np.asarray(fun(x), dtype=float), r, h)
        exact = np.asarray(dfun(r), dtype=float)
        scale = np.maximum(np.abs(exact), np.abs(np.asarray(fun(r), dtype=float)) / np.maximum(r, 1e-12))
        scale = np.maximum(scale, 1e-12)
        if np.any(np.abs(fd - exact) > rtol * scale):
            raise ValueError(f"custom model: {name} disagrees with finite differences of its antiderivative")


# ---------------------------------------------------------------------------
# Null convergence condition
# ---------------------------------------------------------------------------

def ncc_deficit(model: WarpingModel, r):
    """``(f^2 - 1)/r^2 - f f'/r``; non-positive values certify the NCC inequality."""
    model.check_domain(r)
    r = np.asarray(r, dtype=float)
    return (model.fsq(r) - 1.0) / r**2 - model.f_fprime(r) / r


def ncc_flux(model: WarpingModel, r):
    """``r^{n-1} f f' + r^{n-2} (1 - f^2)``, non-negative iff ``ncc_deficit <= 0``."""
    model.check_domain(r)
    r = np.asarray(r, dtype=float)
    n = model.n
    return r ** (n - 1) * model.f_fprime(r) + r ** (n - 2) * (1.0 - model.fsq(r))


@dataclass(frozen=True)
class NullRicci:
    value: np.ndarray
    flux_derivative: np.ndarray
    rel_error: np.ndarray


def null_ricci_combination(model: WarpingModel, r, rel_step: float = 1e-4) -> NullRicci:
    """Ricci curvature on the null vector ``(1/f) d_t + e_1`` and the flux-derivative check.

    ``flux_derivative`` is a centered finite difference of :func:`ncc_flux`; it
    must match ``r^{n-1} * value``.
    """
    model.check_domain(r)
    r = np.asarray(r, dtype=float)
    n = model.n
    F = model.fsq(r)
    terms = ((n - 3) * model.f_fprime(r) / r, 0.5 * model.d2fsq(r), (n - 2) * (1.0 - F) / r**2)
    value = terms[0] + terms[1] + terms[2]
    h = rel_step * r
    if np.isfinite(model.r_lo):
        h = np.minimum(h, 0.2 * (r - model.r_lo))
    if np.isfinite(model.r_hi):
        h = np.minimum(h, 0.2 * (model.r_hi - r))

    def flux(x):
        return x ** (n - 1) * model.f_fprime(x) + x ** (n - 2) * (1.0 - model.fsq(x))

    deriv = _d1(flux, r, h)
    target = r ** (n - 1) * value
    scale = r ** (n - 1) * (np.abs(terms[0]) + np.abs(terms[1]) + np.abs(terms[2])) + 1e-300
    return NullRicci(value, deriv, np.abs(deriv - target) / scale)


# ---------------------------------------------------------------------------
# Tortoise and EF coordinates
# ---------------------------------------------------------------------------

def tortoise_closed_form(model: WarpingModel, r, r_ref):
    """Closed-form ``r*(r) - r*(r_ref)`` for the built-in kinds."""
    if model._closed_tortoise is None:
        raise ValueError("no closed form tortoise for custom models")
    if model.kind == "schwarzschild":
        m = model.mass
        r = np.asarray(r, dtype=float)
        return (r - r_ref) + 2 * m * np.log((r - 2 * m) / (r_ref - 2 * m))
    return model._closed_tortoise(r) - model._closed_tortoise(r_ref)


def tortoise(model: WarpingModel, r, r_ref, method: str = "auto"):
    """Tortoise coordinate ``int_{r_ref}^{r} ds / f^2(s)``.

    ``method="quad"`` forces adaptive Gauss-Kronrod quadrature; ``"auto"`` uses
    the closed form for built-in kinds.
    """
    model.check_domain(r, allow_center=True)
    model.check_domain(r_ref, allow_center=True, what="r_ref")
    if method == "auto" and model._closed_tortoise is not None:
        return tortoise_closed_form(model, r, r_ref)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown tortoise method {method!r}")

    def one(x):
        val, _ = integrate.quad(lambda s: 1.0 / float(model.fsq(s)), r_ref, x,
                                epsabs=QUAD_EPSABS, epsrel=1e-13, limit=200)
        return val

    r_arr = np.asarray(r, dtype=float)
    out = np.vectorize(one, otypes=[float])(r_arr)
    return out if out.ndim else float(out)


def ef_from_static(model: WarpingModel, t, r, r_ref):
    """``(v, w) = (t + r*, t - r*)``."""
    rs = tortoise(model, r, r_ref)
    t = np.asarray(t, dtype=float)
    return t + rs, t - rs


def radius_from_tortoise(model: WarpingModel, rstar, r_ref):
    """Invert ``r*(r) = rstar`` by bracketed root finding."""
    rstar = np.asarray(rstar, dtype=float)

    def g(x, target):
        return float(tortoise(model, x, r_ref)) - target

    a = model.r_lo if model.regular_center else model.r_lo * (1 + 1e-15)

    def one(target):
        ga = g(a, target)
        if ga > 0:
            raise DomainError(f"tortoise value {target} below the chart range")
        if ga == 0:
            return a
        if math.isinf(model.r_hi):
            b = max(2 * max(a, 1.0), abs(target) + a + 1.0)
            while g(b, target) < 0:
                b *= 2.0
                if b > 1e300:
                    raise DomainError("tortoise inversion failed to bracket")
        else:
            b = model.r_hi * (1 - 1e-15)
            if g(b, target) < 0:
                raise DomainError(f"tortoise value {target} above the chart range")
        return optimize.brentq(g, a, b, args=(target,), xtol=1e-300,
                               rtol=4 * np.finfo(float).eps, maxiter=500)

    out = np.vectorize(one, otypes=[float])(rstar)
    return out if out.ndim else float(out)


def static_from_ef(model: WarpingModel, v, w, r_ref):
    """Inverse of :func:`ef_from_static`: ``(t, r)`` from ``(v, w)``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    r = radius_from_tortoise(model, 0.5 * (v - w), r_ref)
    return 0.5 * (v + w), r


def round_metric_diag(angles) -> np.ndarray:
    """Diagonal of the unit round metric of ``S^d`` in hyperspherical angles.

    ``angles`` has shape ``(d, ...)``; entry ``k`` is ``prod_{j<k} sin^2(angle_j)``.
    """
    angles = np.asarray(angles, dtype=float)
    out = np.ones_like(angles)
    for k in range(1, angles.shape[0]):
        out[k] = out[k - 1] * np.sin(angles[k - 1]) ** 2
    return out


@dataclass(frozen=True)
class EFMetric:
    r: np.ndarray
    g_vw: np.ndarray
    angular_factor: np.ndarray

    def matrix(self, angles) -> np.ndarray:
        """Full ``(n+1)x(n+1)`` metric in ``(v, w, angles...)`` at one point."""
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        dim = 2 + angles.shape[0]
        g = np.zeros((dim, dim))
        g[0, 1] = g[1, 0] = float(self.g_vw)
        g[2:, 2:] = np.diag(float(self.angular_factor) * round_metric_diag(angles))
        return g


def ef_metric(model: WarpingModel, v, w, r_ref) -> EFMetric:
    """EF metric data: ``g_vw = -f^2/2`` and the angular block ``r^2 * round``."""
    _, r = static_from_ef(model, v, w, r_ref)
    return EFMetric(r=r, g_vw=-0.5 * model.fsq(r), angular_factor=np.asarray(r) ** 2)


def default_r_ref(model: WarpingModel) -> float:
    """Reference radius for tortoise offsets: the center, or ``3m`` outside a horizon."""
    if model.regular_center:
        return 0.0
    if model.kind == "schwarzschild":
        return 3.0 * model.mass
    lo, hi = model.r_lo, model.r_hi
    return 2 * lo if math.isinf(hi) else 0.5 * (lo + hi)
