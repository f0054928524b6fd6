"""Linearized constant-norm null-cone operator and its kernel.

For a surface with profile ``r`` and a variation ``u`` of the conformal
factor, the linearized 1-form is::

    T(u) = (n-1)(f^2/r - f f') grad u + grad(Lap u / r)
           + (n-1) Hess u(grad r, .) / r^2

with round-sphere operators throughout.  ``u = 1`` is always in the kernel;
on space forms the whole ``l <= 1`` family is.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericGuardError
from .spectral import SphereGrid, ZonalGrid

MAX_BANDLIMIT = 64
KERNEL_THRESHOLD = 1e-7
MIN_AUDIT_GAP = 1e2


def linearized_residual(surface, u) -> np.ndarray:
    """``T(u)`` in orthonormal round-frame components (component axis ``-1 - grid dims``).

    ``u`` may be batched; ``Lap u / r`` is differentiated by the product rule
    so only band-limited fields are differentiated spectrally.
    """
    model = surface.model
    n = surface.n
    up = surface.u
    r = surface.r
    F = surface.fsq
    ffp = model.f_fprime(r)
    grad_up = up.grad()
    grad_r = -grad_up / up.values**2
    lap = u.laplacian()
    lap_vals = np.expand_dims(lap.values, axis=-1 - len(surface.grid.shape))
    return ((n - 1) * (F / r - ffp) * u.grad() + up.values * lap.grad() + lap_vals * grad_up
            + (n - 1) * u.hess_apply(grad_r) / r**2)


def ricci_coefficient(surface) -> np.ndarray:
    """``f^2 - 1 - r f f'`` at the nodes (zero for space forms, ``-3m/r`` for Schwarzschild)."""
    r = surface.r
    return surface.fsq - 1.0 - r * surface.model.f_fprime(r)


@dataclass
class LinearizedOperator:
    """Dense matrix of ``T`` acting on spectral coefficients of ``u``.

    Rows are orthonormal components of ``T`` at the nodes weighted by the
    square root of the quadrature weight, so the matrix 2-norm approximates
    the ``L^2`` operator norm.
    """

    surface: object
    grid: object
    matrix: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray
    threshold: float = KERNEL_THRESHOLD
    lm: list = field(default_factory=list)

    @property
    def bandlimit(self) -> int:
        return self.grid.L

    def apply(self, coeffs) -> np.ndarray:
        return self.matrix @ self.grid.pack(coeffs)

    def sample(self, u) -> np.ndarray:
        """Weighted grid samples of ``T(u)``, flattened like the matrix rows."""
        T = linearized_residual(self.surface, u)
        return (T * np.sqrt(self.grid.weights)).reshape(-1)


def _row_weights(grid):
    return np.sqrt(grid.weights)


def assemble(surface, L: int | None = None, threshold: float = KERNEL_THRESHOLD) -> LinearizedOperator:
    """Column-by-column assembly of ``T`` on harmonics of degree ``<= L``.

    The surface is resampled on a grid of bandlimit ``L`` (de-aliased sizing);
    ``L`` must not be below the profile's own bandlimit.

    Raises
    ------
    NumericGuardError
        For ``L > 64`` (dense memory guard).
    """
    L = surface.grid.L if L is None else int(L)
    if L > MAX_BANDLIMIT:
        raise NumericGuardError(f"bandlimit {L} exceeds the dense-assembly limit {MAX_BANDLIMIT}",
                                guard="memory")
    if surface.grid.L == L:
        grid = surface.grid
    else:
        grid = ZonalGrid(surface.grid.dim, L) if isinstance(surface.grid, ZonalGrid) else SphereGrid(L)
        surface = surface.with_grid(grid)
    basis = grid.basis()
    T = linearized_residual(surface, basis)
    w = _row_weights(grid)
    A = (T * w).reshape(T.shape[0], -1).T
    _, s, Vt = np.linalg.svd(A, full_matrices=False)
    lm = grid.lm_list() if isinstance(grid, SphereGrid) else [(l, 0) for l in range(L + 1)]
    return LinearizedOperator(surface, grid, A, s, Vt, threshold, lm)


@dataclass
class Kernel:
    dimension: int
    basis_coeffs: np.ndarray
    singular_values: np.ndarray
    gap: float
    threshold: float
    constant_direction: float
    low_mode_distances: np.ndarray

    def basis_fields(self, grid):
        return grid.from_coeffs(grid.unpack(self.basis_coeffs))

    def as_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "gap": self.gap,
            "threshold": self.threshold,
            "constant_direction": self.constant_direction,
            "low_mode_distances": [float(x) for x in self.low_mode_distances],
            "singular_values": [float(x) for x in self.singular_values],
        }


def kernel(op: LinearizedOperator) -> Kernel:
    """Right singular vectors with ``sigma < threshold * sigma_max``.

    ``gap`` is the smallest retained singular value divided by the largest
    rejected one.  A gap below 100 triggers a ``RuntimeWarning`` naming both
    candidate dimensions.
    """
    s = op.singular_values
    smax = float(s[0])
    k = int(np.sum(s < op.threshold * smax))
    N = s.size
    if k == 0:
        gap = math.inf
    elif k == N:
        gap = 0.0
    else:
        gap = float(s[N - k - 1] / max(s[N - k], 1e-300))
    if gap < MIN_AUDIT_GAP:
        alt = int(np.argmax(s[:-1] / np.maximum(s[1:], 1e-300)))
        warnings.warn(f"ill-separated singular spectrum: threshold gives dimension {k}, largest "
                      f"ratio suggests {N - alt - 1}", RuntimeWarning, stacklevel=2)
    basis = op.right_vectors[N - k:]
    e0 = np.zeros(N)
    e0[0] = 1.0  # packed index of (0, 0)
    const = float(np.linalg.norm(op.matrix @ e0) / smax)
    fields = op.grid.from_coeffs(op.grid.unpack(basis)) if k else None
    lmd = np.atleast_1d(fields.low_mode_distance()) if k else np.zeros(0)
    return Kernel(k, basis, s, gap, op.threshold, const, lmd)


@dataclass
class QuadraticFormIdentity:
    lhs: float
    rhs: float
    relative_gap: float
    ricci_term: float
    hessian_term: float


def quadratic_form_identity(surface, u, atol: float = 1e-14) -> QuadraticFormIdentity:
    """Integrated identity for ``int r^{n-1} <grad u, T(u)>``.

    ``rhs = int (n-1) r^{n-2} (f^2 - 1 - r f f') |grad u|^2
            - ((n-1)/(n-2)) r^{n-2} |Hess u - (Lap u/(n-1)) round|^2``

    holds for every ``u``; ``relative_gap`` is ``|lhs - rhs|`` over the larger
    of the two magnitudes (0 when both fall below ``atol``).

    Raises
    ------
    NumericGuardError
        If ``u`` lives on a grid coarser than the de-aliasing rule.
    """
    n = surface.n
    if n < 3:
        raise ValueError("the identity needs n >= 3")
    grid = surface.grid
    if u.grid is not grid:
        u = u.to_grid(grid)
    if isinstance(grid, SphereGrid):
        if grid.n_theta < math.ceil(3 * grid.L / 2) + 1 or grid.n_phi < 3 * grid.L + 1:
            raise NumericGuardError("quadrature grid below 3L de-aliasing", guard="aliasing")
    r = surface.r
    T = linearized_residual(surface, u)
    lhs = float(grid.integrate(r ** (n - 1) * u.grad_dot(T)))
    ric = float(grid.integrate((n - 1) * r ** (n - 2) * ricci_coefficient(surface) * u.grad_sq()))
    hess = float(grid.integrate(r ** (n - 2) * u.traceless_hessian_normsq()))
    rhs = ric - (n - 1) / (n - 2) * hess
    scale = max(abs(lhs), abs(rhs))
    gap = 0.0 if scale < atol else abs(lhs - rhs) / scale
    return QuadraticFormIdentity(lhs, rhs, gap, ric, hess)
