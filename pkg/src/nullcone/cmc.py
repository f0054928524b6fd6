"""Constant mean-curvature-norm surfaces in null cones and related identities.

The unknown is ``u = 1/r`` on the round sphere.  A surface of the standard
null cone has constant ``|H|^2`` exactly when::

    (n-1) u^2 f^2(1/u) - (n-1)|grad u|^2 + 2 u Lap u = E

which for Minkowski ``n = 3`` is twice the Liouville equation
``u^2 + u Lap u - |grad u|^2 = E_gauss``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericGuardError
from .spacetime import WarpingModel
from .spectral import FOUR_PI, SphereField, SphereGrid, ZonalField, ZonalGrid
from .surface import BoostFit, fit_boosted_sphere

CONVERGENCE_TOL = 1e-10
MAX_ITERATIONS = 50
MAX_HALVINGS = 30
SINGULAR_RCOND = 1e-11
SOLUTION_TOL = 1e-8


# ---------------------------------------------------------------------------
# Problem statement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoGauge:
    """Plain Newton; a singular Jacobian is an error."""

    name: str = field(default="none", init=False)


@dataclass(frozen=True)
class FixLowModes:
    """Pin the ``l <= 1`` coefficients of every Newton update.

    ``values`` (packed order ``(0,0), (1,-1), (1,0), (1,1)``; ``(0,), (1,)``
    on zonal grids) overwrite the initial guess's low coefficients first.
    """

    values: tuple | None = None
    name: str = field(default="fix_low_modes", init=False)


@dataclass(frozen=True)
class LevenbergMarquardt:
    """Damped normal equations with ``lam`` relative to ``max diag(J^T J)``."""

    lam: float = 1e-8
    name: str = field(default="levenberg_marquardt", init=False)


GAUGES = {"none": NoGauge, "fix_low_modes": FixLowModes, "levenberg_marquardt": LevenbergMarquardt}


@dataclass(frozen=True)
class CmcProblem:
    """Find ``u > 0`` with constant ``|H|^2``-scalar ``E`` at bandlimit ``L``."""

    model: WarpingModel
    E: float
    L: int
    gauge: object = field(default_factory=NoGauge)

    def __post_init__(self):
        if not (self.E > 0 and math.isfinite(self.E)):
            raise ValueError("E must be positive and finite")
        if int(self.L) < 1:
            raise ValueError("bandlimit must be at least 1")
        if isinstance(self.gauge, FixLowModes) and self.gauge.values is not None:
            if len(self.gauge.values) != _n_low(self.n):
                raise ValueError(f"FixLowModes needs {_n_low(self.n)} values, got {len(self.gauge.values)}")

    @property
    def n(self) -> int:
        return self.model.n

    def grid(self):
        return SphereGrid(self.L) if self.n == 3 else ZonalGrid(self.n - 1, self.L)


def _n_low(n: int) -> int:
    return 4 if n == 3 else 2


def gauss_to_hsq(E_gauss: float, n: int = 3) -> float:
    """Conversion used by ``--target gauss``: ``E_hsq = (n-1) E_gauss``."""
    return (n - 1) * E_gauss


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------

def _check_profile(model: WarpingModel, u) -> np.ndarray:
    vals = u.values
    bad = ~(vals > 0)
    if np.any(bad):
        raise DomainError(f"u must be positive; nodes {np.argwhere(bad)[:5].tolist()} fail")
    r = 1.0 / vals
    out = ~model.in_domain(r)
    if np.any(out):
        raise DomainError(f"r = 1/u leaves ({model.r_lo}, {model.r_hi}) at nodes "
                          f"{np.argwhere(out)[:5].tolist()}")
    return r


def _check_field_for(model: WarpingModel, u):
    if isinstance(u, SphereField):
        if model.n != 3:
            raise ValueError("full-sphere fields need n = 3")
    elif isinstance(u, ZonalField):
        if u.grid.dim != model.n - 1:
            raise ValueError(f"zonal field on S^{u.grid.dim} does not match n = {model.n}")
    else:
        raise TypeError("u must be a SphereField or ZonalField")


def hsq_residual(problem: CmcProblem, u):
    """``(n-1) u^2 f^2(1/u) - (n-1)|grad u|^2 + 2 u Lap u - E`` as a field.

    Raises
    ------
    DomainError
        Listing nodes where ``u <= 0`` or ``1/u`` leaves the model's domain.
    """
    model = problem.model
    _check_field_for(model, u)
    r = _check_profile(model, u)
    n = problem.n
    uv = u.values
    val = ((n - 1) * uv**2 * model.fsq(r) - (n - 1) * u.grad_sq()
           + 2.0 * uv * u.laplacian().values - problem.E)
    return u.grid.field(val)


def liouville_residual(u, E: float) -> SphereField:
    """``u^2 + u Lap u - |grad u|^2 - E`` on ``S^2``."""
    uv = u.values
    return u.grid.field(uv**2 + uv * u.laplacian().values - u.grad_sq() - E)


def jacobian_apply(problem: CmcProblem, u, h) -> np.ndarray:
    """Frechet derivative of :func:`hsq_residual` at ``u`` in direction ``h``.

    ``J[h] = (n-1)(2u f^2(1/u) - (f^2)'(1/u)) h - 2(n-1) grad u . grad h
    + 2 h Lap u + 2 u Lap h``; ``h`` may be batched.
    """
    model = problem.model
    n = problem.n
    uv = u.values
    r = 1.0 / uv
    coef = (n - 1) * (2.0 * uv * model.fsq(r) - model.dfsq(r))
    gu = u.grad()
    return (coef * h.values - 2.0 * (n - 1) * h.grad_dot(gu)
            + 2.0 * h.values * u.laplacian().values + 2.0 * uv * h.laplacian().values)


def jacobian_matrix(problem: CmcProblem, u) -> np.ndarray:
    """Galerkin matrix ``A[i, j] = <Y_i, J[Y_j]>`` in packed coefficient order."""
    grid = u.grid
    cols = jacobian_apply(problem, u, grid.basis())
    return grid.pack(grid.analyze(cols)).T


@dataclass
class GradientCheck:
    max_relative_error: float
    errors: np.ndarray
    step: float


def gradient_check(problem: CmcProblem, u, directions: int = 10, seed: int = 0,
                   step: float = 1e-6) -> GradientCheck:
    """Compare ``J[h]`` with central differences along random unit directions."""
    rng = np.random.default_rng(seed)
    grid = u.grid
    scale = float(np.max(np.abs(u.values)))
    errs = []
    for _ in range(directions):
        c = np.where(grid.mask, rng.standard_normal(grid.mask.shape), 0.0)
        h = grid.from_coeffs(c)
        h = grid.from_coeffs(c * scale / float(np.max(np.abs(h.values))))
        Jh = jacobian_apply(problem, u, h)
        fd = (hsq_residual(problem, u + step * h).values
              - hsq_residual(problem, u - step * h).values) / (2 * step)
        errs.append(float(np.max(np.abs(fd - Jh)) / max(float(np.max(np.abs(Jh))), 1e-300)))
    errs = np.asarray(errs)
    return GradientCheck(float(errs.max()), errs, step)


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------

@dataclass
class NewtonResult:
    u: object
    iterations: int
    converged: bool
    residual_history: list
    gauge: str
    fallback: bool = False

    @property
    def residual(self) -> float:
        return self.residual_history[-1]


def _singular_report(s: np.ndarray, k: int = 6) -> str:
    tail = ", ".join(f"{x:.3e}" for x in s[-k:])
    return f"sigma_max = {s[0]:.3e}, smallest: [{tail}]"


def _newton_step(J, rc, gauge, low):
    """Solve for the coefficient update; returns ``(delta, used_fallback)``."""
    N = J.shape[1]
    if isinstance(gauge, NoGauge):
        s = np.linalg.svd(J, compute_uv=False)
        if s[-1] < SINGULAR_RCOND * s[0]:
            raise NumericGuardError("Jacobian singular without a gauge: " + _singular_report(s),
                                    guard="singular_jacobian")
        return np.linalg.solve(J, -rc), False
    if isinstance(gauge, FixLowModes):
        free = np.arange(low, N)
        Jf = J[:, free]
        s = np.linalg.svd(Jf, compute_uv=False)
        if s[-1] >= SINGULAR_RCOND * s[0]:
            delta = np.zeros(N)
            delta[free] = np.linalg.lstsq(Jf, -rc, rcond=None)[0]
            return delta, False
        return _lm_step(J, rc, LevenbergMarquardt().lam), True
    if isinstance(gauge, LevenbergMarquardt):
        return _lm_step(J, rc, gauge.lam), False
    raise TypeError(f"unknown gauge {gauge!r}")


def _lm_step(J, rc, lam):
    JtJ = J.T @ J
    mu = lam * float(np.max(np.diag(JtJ)))
    return np.linalg.solve(JtJ + mu * np.eye(JtJ.shape[0]), -J.T @ rc)


def newton_solve(problem: CmcProblem, u0, tol: float = CONVERGENCE_TOL,
                 max_iterations: int = MAX_ITERATIONS) -> NewtonResult:
    """Newton iteration on the packed coefficients of ``u``.

    The step is halved while the iterate leaves ``u > 0`` / the model domain
    or fails to reduce the coefficient residual.  Convergence means
    ``max |hsq_residual| < tol`` on the grid.

    Raises
    ------
    DomainError
        If ``u0`` itself is inadmissible.
    NumericGuardError
        ``singular_jacobian`` (no gauge), ``positivity`` (halving exhausted).
    """
    grid = problem.grid()
    if u0.grid.L != grid.L or type(u0.grid) is not type(grid):
        u0 = u0.to_grid(grid)
    else:
        grid = u0.grid
    low = _n_low(problem.n)
    c = grid.pack(u0.coeffs).copy()
    gauge = problem.gauge
    if isinstance(gauge, FixLowModes) and gauge.values is not None:
        c[:low] = np.asarray(gauge.values, dtype=float)
    u = grid.from_coeffs(grid.unpack(c))
    R = hsq_residual(problem, u)
    history = [float(np.max(np.abs(R.values)))]
    fallback = False
    it = 0
    while history[-1] >= tol and it < max_iterations:
        rc = grid.pack(grid.analyze(R.values))
        J = jacobian_matrix(problem, u)
        delta, fb = _newton_step(J, rc, gauge, low)
        fallback |= fb
        norm0 = float(np.linalg.norm(rc))
        t = 1.0
        for _ in range(MAX_HALVINGS):
            trial = grid.from_coeffs(grid.unpack(c + t * delta))
            try:
                Rt = hsq_residual(problem, trial)
            except DomainError:
                t *= 0.5
                continue
            if float(np.linalg.norm(grid.pack(grid.analyze(Rt.values)))) <= norm0 or t < 1e-3:
                break
            t *= 0.5
        else:
            raise NumericGuardError(f"step halving exhausted at iteration {it + 1}: iterate leaves "
                                    "u > 0 or the model domain", guard="positivity")
        c = c + t * delta
        u, R = trial, Rt
        it += 1
        history.append(float(np.max(np.abs(R.values))))
    return NewtonResult(u, it, history[-1] < tol, history, gauge.name, fallback)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    kind: str
    r0: float | None = None
    beta: float | None = None
    axis: np.ndarray | None = None
    distance: float = 0.0
    violation: bool = False

    def as_dict(self) -> dict:
        out = {"verdict": self.kind, "low_mode_distance": self.distance, "violation": self.violation}
        if self.r0 is not None:
            out["r0"] = self.r0
        if self.beta is not None:
            out["beta"] = self.beta
            out["axis"] = [float(a) for a in np.atleast_1d(self.axis)]
        return out


def classify(u, model: WarpingModel | None = None, tol: float = 1e-6) -> Verdict:
    """Sphere of symmetry, boosted sphere, or non-rigid profile.

    A boost with ``beta > tol`` found for a model that is not a space form is
    flagged with ``violation = True``.
    """
    fit = fit_boosted_sphere(u, tol=tol)
    if not isinstance(fit, BoostFit):
        return Verdict("NonRigid", distance=fit.distance)
    if fit.beta <= tol:
        return Verdict("SphereOfSymmetry", r0=fit.r0, distance=fit.distance)
    violation = model is not None and not model.is_space_form
    return Verdict("LowModeBoost", fit.r0, fit.beta, fit.axis, fit.distance, violation)


# ---------------------------------------------------------------------------
# Identities on S^2
# ---------------------------------------------------------------------------

@dataclass
class IdentityCheck:
    lhs: np.ndarray
    rhs: np.ndarray
    gap: float


def _relative_gap(lhs, rhs, terms, scale_floor: float) -> float:
    """Max pointwise discrepancy over the largest individual term."""
    diff = float(np.max(np.abs(lhs - rhs)))
    scale = max(float(np.max(np.abs(t))) for t in terms)
    if scale <= scale_floor:
        return 0.0
    return diff / scale


def _fine_grid(u, grid, factor: int):
    need = factor * u.grid.L
    if grid is None:
        return SphereGrid(need) if isinstance(u, SphereField) else ZonalGrid(u.grid.dim, need)
    if grid.L < need:
        raise NumericGuardError(f"working bandlimit {grid.L} below {need} needed to avoid aliasing",
                                guard="aliasing")
    return grid


def laplacian_bochner_identity(u, grid=None) -> IdentityCheck:
    """``Lap(u^2 + u Lap u - |grad u|^2)`` against its Bochner expansion.

    Both sides are evaluated on a grid of bandlimit ``2L`` so the quadratic
    expression is represented exactly before differentiating.
    """
    if not isinstance(u, SphereField):
        raise TypeError("the Bochner identity is implemented on S^2")
    g2 = _fine_grid(u, grid, 2)
    v = u.to_grid(g2)
    uv = v.values
    lap = v.laplacian()
    inner = g2.field(uv**2 + uv * lap.values - v.grad_sq())
    lhs = inner.laplacian().values
    terms = [2 * uv * lap.values, lap.values**2, uv * lap.laplacian().values, 2 * v.hessian_normsq()]
    rhs = terms[0] + terms[1] + terms[2] - terms[3]
    return IdentityCheck(lhs, rhs, _relative_gap(lhs, rhs, terms + [lhs], 1e-13 * float(np.max(uv**2))))


@dataclass
class MaxPrinciple:
    field: SphereField
    constant: float
    spread: float
    pointwise_gap: float
    residual: float

    @property
    def is_constant(self) -> bool:
        return self.spread < 1e-6


def max_principle_functional(u, E: float | None = None, tol: float = SOLUTION_TOL) -> MaxPrinciple:
    """``(Lap + 2) u`` for a Liouville solution, with the pointwise check.

    ``u Lap(Lap + 2) u = 2 |Hess u - (Lap u / 2) round|^2`` is verified at the
    nodes; ``E`` defaults to the mean of the Liouville scalar.

    Raises
    ------
    NumericGuardError
        ``not_a_solution`` if the Liouville residual exceeds ``tol * E``.
    """
    if not isinstance(u, SphereField):
        raise TypeError("the Liouville equation lives on S^2")
    uv = u.values
    if not np.all(uv > 0):
        raise DomainError("u must be positive")
    if E is None:
        scal = liouville_residual(u, 0.0)
        E = float(u.grid.integrate(scal.values)) / FOUR_PI
    res = float(np.max(np.abs(liouville_residual(u, E).values)))
    if res > tol * max(abs(E), 1e-300):
        raise NumericGuardError(f"input is not a Liouville solution: max residual {res:.3e} for E = {E:.6g}",
                                guard="not_a_solution")
    lap = u.laplacian()
    w = lap + 2.0 * u
    mean = float(np.mean(w.values))
    spread = float(np.std(w.values) / abs(mean)) if mean != 0 else math.inf
    lhs = uv * (w.laplacian().values)
    rhs = 2.0 * u.traceless_hessian_normsq()
    gap = float(np.max(np.abs(lhs - rhs))) / float(np.max(uv**2))
    return MaxPrinciple(w, mean, spread, gap, res)


# ---------------------------------------------------------------------------
# Mobius maps
# ---------------------------------------------------------------------------

@dataclass
class MobiusReport:
    u: SphereField
    fitted: np.ndarray
    printed: np.ndarray
    corrected: np.ndarray
    low_mode_distance: float

    def as_dict(self) -> dict:
        labels = ("1", "x1", "x2", "x3")
        return {
            "low_mode_distance": self.low_mode_distance,
            "coefficients": [
                {"term": t, "fitted": float(f), "printed": float(p), "corrected": float(c)}
                for t, f, p, c in zip(labels, self.fitted, self.printed, self.corrected)
            ],
        }


def mobius_coefficients(a, b, c, d, printed: bool = False) -> np.ndarray:
    """``l <= 1`` coefficients ``(const, x1, x2, x3)`` of ``u = 1/r``.

    With ``printed=True`` the expansion is returned as commonly written for
    ``ad - bc = 1`` (constant and ``x3`` terms without the factor ``1/2``);
    otherwise the exact values, divided by ``|ad - bc|``.
    """
    a, b, c, d = (complex(x) for x in (a, b, c, d))
    q = a * b.conjugate() + c * d.conjugate()
    tot = abs(a)**2 + abs(b)**2 + abs(c)**2 + abs(d)**2
    x3 = abs(a)**2 + abs(c)**2 - abs(b)**2 - abs(d)**2
    if printed:
        return np.array([tot, q.real, -q.imag, x3])
    return np.array([tot / 2, q.real, -q.imag, x3 / 2]) / abs(a * d - b * c)


def mobius_conformal_factor(a, b, c, d, grid: SphereGrid, tol: float = 1e-9) -> MobiusReport:
    """``u = 1/r`` for the pull-back of the round metric by ``w = (az+b)/(cz+d)``.

    ``z = (x1 + i x2)/(1 - x3)`` and ``r = |dw/dz| (1+|z|^2)/(1+|w|^2)``,
    evaluated in homogeneous coordinates ``z = zeta1/zeta2`` so poles and
    ``w = infinity`` need no special casing.

    Raises
    ------
    DomainError
        If ``|ad - bc|`` is negligible against the entries.
    NumericGuardError
        ``not_low_mode`` when the sampled ``u`` leaves ``l <= 1`` beyond ``tol``.
    """
    a, b, c, d = (complex(x) for x in (a, b, c, d))
    det = a * d - b * c
    size = max(abs(a), abs(b), abs(c), abs(d))
    if size == 0 or abs(det) <= 1e-12 * size**2:
        raise DomainError("degenerate Mobius map: ad - bc = 0")
    X = grid.cartesian()
    # Two homogeneous charts; pick the better-conditioned one per node.
    z1a, z2a = X[0] + 1j * X[1], (1.0 - X[2]) + 0j
    z1b, z2b = (1.0 + X[2]) + 0j, X[0] - 1j * X[1]
    use_a = X[2] <= 0
    z1 = np.where(use_a, z1a, z1b)
    z2 = np.where(use_a, z2a, z2b)
    num = np.abs(c * z1 + d * z2)**2 + np.abs(a * z1 + b * z2)**2
    den = (np.abs(z1)**2 + np.abs(z2)**2) * abs(det)
    u = grid.field(num / den)
    dist = float(u.low_mode_distance())
    if dist >= tol:
        raise NumericGuardError(f"Mobius conformal factor left l <= 1: distance {dist:.3e}",
                                guard="not_low_mode")
    a0, bvec = u.low_mode_vector()
    fitted = np.concatenate([[float(a0)], np.asarray(bvec, dtype=float)])
    return MobiusReport(u, fitted, mobius_coefficients(a, b, c, d, printed=True),
                        mobius_coefficients(a, b, c, d), dist)


# ---------------------------------------------------------------------------
# Conformal scalar curvature on round spheres
# ---------------------------------------------------------------------------

def _base_dimension(u, n):
    dim = u.grid.dim
    if n is None:
        n = dim
    if n != dim:
        raise ValueError(f"field lives on S^{dim}, not S^{n}")
    return n


def _check_ricci(n, c):
    c = float(n - 1) if c is None else float(c)
    if n < 2 or abs(c - (n - 1)) > 1e-14 * max(1.0, n):
        raise ValueError(f"unsupported base: only the unit round S^{n} with Ric = {n - 1} is implemented")
    return c


def conformal_scalar_curvature(u, n: int | None = None, c: float | None = None):
    """``Rbar/(n-1) = (nc/(n-1)) u^2 + 2u Lap u - n|grad u|^2`` for ``r^2 round``, ``u = 1/r``."""
    n = _base_dimension(u, n)
    c = _check_ricci(n, c)
    uv = u.values
    val = n * c / (n - 1) * uv**2 + 2 * uv * u.laplacian().values - n * u.grad_sq()
    return u.grid.field(val)


@dataclass
class ObataIdentity:
    lhs: float
    traceless_term: float
    weighted_bochner: float
    gap: float
    scale: float


def obata_weighted_identity(u, n: int | None = None, c: float | None = None, grid=None) -> ObataIdentity:
    """Weighted integral identity behind conformal scalar-curvature rigidity.

    ``lhs = int u^{1-n}[(2-n) grad u . grad Lap u + u Lap^2 u
    + (nc/(n-1))(u Lap u + (2-n)|grad u|^2)]`` vanishes for every ``u > 0``;
    ``weighted_bochner = int u^{1-n} Lap(Rbar/(n-1))/2`` then equals
    ``traceless_term = -n int u^{1-n}|Hess u - (Lap u/n) round|^2``.
    ``gap`` is the larger discrepancy over the largest individual term.

    Raises
    ------
    NumericGuardError
        ``aliasing`` when ``grid`` is coarser than ``4L``.
    DomainError
        If ``u`` is not positive.
    """
    n = _base_dimension(u, n)
    c = _check_ricci(n, c)
    g = _fine_grid(u, grid, 4)
    v = u.to_grid(g)
    uv = v.values
    if not np.all(uv > 0):
        raise DomainError("u must be positive")
    wgt = uv ** (1 - n)
    lap = v.laplacian()
    k = n * c / (n - 1)
    terms = [
        (2 - n) * v.grad_dot(lap.grad()),
        uv * lap.laplacian().values,
        k * uv * lap.values,
        k * (2 - n) * v.grad_sq(),
    ]
    ints = [float(g.integrate(wgt * t)) for t in terms]
    lhs = sum(ints)
    tl = -n * float(g.integrate(wgt * v.traceless_hessian_normsq()))
    # Rbar is degree 2L; g has bandlimit 4L so its Laplacian is exact.
    scal = conformal_scalar_curvature(v, n, c)
    wb = float(g.integrate(wgt * 0.5 * scal.laplacian().values))
    scale = max([abs(x) for x in ints] + [abs(tl), abs(wb)])
    floor = 1e-13 * float(g.integrate(wgt * uv**2))
    gap = 0.0 if scale <= floor else max(abs(lhs), abs(wb - tl)) / scale
    return ObataIdentity(lhs, tl, wb, gap, scale)
