"""Spectral calculus on round spheres.

Two discretizations share one field interface:

``SphereGrid`` / ``SphereField``
    Real orthonormal spherical harmonics on ``S^2`` sampled on a
    Gauss-Legendre (colatitude) x uniform (longitude) grid.
``ZonalGrid`` / ``ZonalField``
    Axisymmetric functions ``u(theta)`` on ``S^d`` expanded in normalized
    Gegenbauer polynomials of ``cos(theta)``.

Basis convention (fixed; used in every coefficient file)::

    Y_{l0}  = Pbar_l^0(cos t)
    Y_{lm}  = sqrt(2) Pbar_l^m(cos t) cos(m p)      m > 0
    Y_{l,-m}= sqrt(2) Pbar_l^m(cos t) sin(m p)      m > 0

with ``Pbar_l^m = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m`` and no
Condon-Shortley phase, so ``Y_{11}, Y_{1,-1}, Y_{10}`` are positive multiples
of ``x1, x2, x3``.  Fields may carry leading batch axes; a batch of basis
functions is how operator matrices are assembled.

Vectors and Hessians are returned in the orthonormal frame ``(e_theta,
e_phi)``; Gauss nodes never include the poles.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np
from scipy import special

FOUR_PI = 4.0 * math.pi
# Y_{1m} = ELL1 * x_i
ELL1 = math.sqrt(3.0 / FOUR_PI)


def normalized_legendre(L: int, theta):
    """``Pbar_l^m(cos theta)`` and its first two theta-derivatives.

    Returns three arrays of shape ``(L+1, L+1, len(theta))`` indexed ``[l, m]``;
    entries with ``m > l`` are zero.  Stable three-term recurrence in ``l``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.cos(theta)
    s = np.sin(theta)
    P = np.zeros((L + 1, L + 1, theta.size))
    P[0, 0] = 1.0 / math.sqrt(FOUR_PI)
    for m in range(1, L + 1):
        P[m, m] = math.sqrt((2 * m + 1) / (2 * m)) * s * P[m - 1, m - 1]
    for m in range(L):
        P[m + 1, m] = math.sqrt(2 * m + 3) * x * P[m, m]
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            P[l, m] = a * (x * P[l - 1, m] - b * P[l - 2, m])

    dP = np.zeros_like(P)
    ls = np.arange(L + 1)[:, None, None]
    ms = np.arange(L + 1)[None, :, None]
    c = np.sqrt(np.clip((2 * ls + 1) * (ls**2 - ms**2), 0, None) / np.maximum(2 * ls - 1, 1))
    Pm1 = np.zeros_like(P)
    Pm1[1:] = P[:-1]
    dP = (ls * x * P - c * Pm1) / s
    dP[ms[0, :, 0][None, :] > ls[:, 0, 0][:, None]] = 0.0
    d2P = -(x / s) * dP - (ls * (ls + 1) - ms**2 / s**2) * P
    return P, dP, d2P


def _trig(L: int, phi):
    """Longitude factors and their phi-derivatives, shape ``(2L+1, len(phi))``."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    m = np.arange(-L, L + 1)[:, None]
    am = np.abs(m)
    T = np.where(m > 0, np.cos(am * phi), np.where(m < 0, np.sin(am * phi), 1.0))
    dT = np.where(m > 0, -am * np.sin(am * phi), np.where(m < 0, am * np.cos(am * phi), 0.0))
    d2T = -(m**2) * T
    return T, dT, d2T


def _signed_legendre(L: int, P):
    """Expand ``[l, |m|]`` tables to ``[l, m + L]`` with the sqrt(2) factor."""
    out = np.zeros((L + 1, 2 * L + 1) + P.shape[2:])
    for m in range(-L, L + 1):
        fac = 1.0 if m == 0 else math.sqrt(2.0)
        out[:, m + L] = fac * P[:, abs(m)]
    return out


def lm_mask(L: int) -> np.ndarray:
    l = np.arange(L + 1)[:, None]
    m = np.arange(-L, L + 1)[None, :]
    return np.abs(m) <= l


class SphereGrid:
    """Gauss-Legendre x uniform grid carrying harmonics up to degree ``L``.

    The default sizes ``n_theta = ceil(3L/2) + 1`` and ``n_phi = 3L + 1``
    integrate degree-``3L`` integrands exactly, which de-aliases the
    quadratic and cubic products that appear in the nonlinear equations.
    """

    dim = 2

    def __init__(self, L: int, n_theta: int | None = None, n_phi: int | None = None):
        if L < 0:
            raise ValueError("bandlimit must be non-negative")
        self.L = int(L)
        self.n_theta = int(n_theta) if n_theta else math.ceil(3 * L / 2) + 1
        self.n_phi = int(n_phi) if n_phi else 3 * L + 1
        if self.n_theta < L + 1 or self.n_phi < 2 * L + 1:
            raise ValueError("grid too coarse for the requested bandlimit")
        x, w = special.roots_legendre(self.n_theta)
        order = np.argsort(-x)
        self.x = x[order]
        self.theta = np.arccos(self.x)
        self.sin = np.sin(self.theta)
        self.gl_weights = w[order]
        self.phi = 2 * math.pi * np.arange(self.n_phi) / self.n_phi
        self.shape = (self.n_theta, self.n_phi)
        self.weights = np.outer(self.gl_weights, np.full(self.n_phi, 2 * math.pi / self.n_phi))
        P, dP, d2P = normalized_legendre(self.L, self.theta)
        self._P = (_signed_legendre(L, P), _signed_legendre(L, dP), _signed_legendre(L, d2P))
        # (j, l, i) layout for batched products
        self._Pj = tuple(np.ascontiguousarray(p.transpose(1, 0, 2)) for p in self._P)
        self._T = _trig(L, self.phi)
        self.mask = lm_mask(L)
        l = np.arange(L + 1)[:, None] * np.ones((1, 2 * L + 1), dtype=int)
        self.degree = np.where(self.mask, l, 0)

    def __repr__(self):
        return f"SphereGrid(L={self.L}, n_theta={self.n_theta}, n_phi={self.n_phi})"

    @classmethod
    def exact_for_degree(cls, L: int, degree: int) -> "SphereGrid":
        """Grid for bandlimit ``L`` whose quadrature is exact to ``degree``."""
        return cls(L, max(L + 1, math.ceil((degree + 1) / 2)), max(2 * L + 1, degree + 1))

    # -- coefficient layout -------------------------------------------------
    @property
    def ncoeffs(self) -> int:
        return (self.L + 1) ** 2

    def lm_list(self):
        return [(l, m) for l in range(self.L + 1) for m in range(-l, l + 1)]

    def pack(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs)
        return coeffs[..., self.mask]

    def unpack(self, vec) -> np.ndarray:
        vec = np.asarray(vec, dtype=float)
        out = np.zeros(vec.shape[:-1] + self.mask.shape)
        out[..., self.mask] = vec
        return out

    @cached_property
    def packed_degree(self) -> np.ndarray:
        return self.degree[self.mask]

    def eigenvalues(self) -> np.ndarray:
        """Laplacian eigenvalues ``-l(l+1)`` in the dense coefficient layout."""
        return -(self.degree * (self.degree + 1)).astype(float)

    # -- transforms ---------------------------------------------------------
    def synthesize(self, coeffs, d_theta: int = 0, d_phi: int = 0) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-2:] != self.mask.shape:
            raise ValueError(f"coefficient array has shape {coeffs.shape[-2:]}, expected {self.mask.shape}")
        batch = coeffs.shape[:-2]
        C = coeffs.reshape((-1,) + self.mask.shape)
        # per-m Legendre sums as a batched matmul over j = m + L
        G = np.matmul(C.transpose(2, 0, 1), self._Pj[d_theta])      # (j, B, i)
        vals = G.reshape(G.shape[0], -1).T @ self._T[d_phi]          # (B*i, k)
        return vals.reshape(batch + self.shape)

    def analyze(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[-2:] != self.shape:
            raise ValueError(f"value array has shape {values.shape[-2:]}, expected {self.shape}")
        batch = values.shape[:-2]
        V = values.reshape((-1,) + self.shape)
        Fm = (V.reshape(-1, self.n_phi) @ self._T[0].T) * (2 * math.pi / self.n_phi)   # (B*i, j)
        Fm = Fm.reshape(V.shape[0], self.n_theta, -1).transpose(2, 0, 1)              # (j, B, i)
        C = np.matmul(Fm * self.gl_weights, self._Pj[0].transpose(0, 2, 1))          # (j, B, l)
        return C.transpose(1, 2, 0).reshape(batch + self.mask.shape)

    def integrate(self, values) -> np.ndarray:
        return np.einsum("...ik,ik->...", np.asarray(values, dtype=float), self.weights)

    # -- fields -------------------------------------------------------------
    def field(self, values) -> "SphereField":
        return SphereField(self, values=values)

    def from_coeffs(self, coeffs) -> "SphereField":
        return SphereField(self, coeffs=coeffs)

    def from_function(self, fun) -> "SphereField":
        """Sample ``fun(x1, x2, x3)`` on the nodes."""
        X = self.cartesian()
        return self.field(fun(X[0], X[1], X[2]))

    def basis(self) -> "SphereField":
        """Batch of all basis functions, packed order (leading axis ``(L+1)^2``)."""
        return self.from_coeffs(self.unpack(np.eye(self.ncoeffs)))

    def cartesian(self) -> np.ndarray:
        """Unit-sphere coordinates ``X~^i`` at the nodes, shape ``(3, n_theta, n_phi)``."""
        st = self.sin[:, None]
        return np.stack([
            st * np.cos(self.phi)[None, :],
            st * np.sin(self.phi)[None, :],
            np.repeat(self.x[:, None], self.n_phi, axis=1),
        ])

    def constant(self, c: float = 1.0) -> "SphereField":
        C = np.zeros(self.mask.shape)
        C[0, self.L] = float(c) * math.sqrt(FOUR_PI)
        return self.from_coeffs(C)

    def harmonic(self, l: int, m: int) -> "SphereField":
        C = np.zeros(self.mask.shape)
        C[l, m + self.L] = 1.0
        return self.from_coeffs(C)

    def evaluate(self, coeffs, theta, phi, d_theta: int = 0, d_phi: int = 0) -> np.ndarray:
        """Evaluate a coefficient array at scattered points."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        P = normalized_legendre(self.L, theta)[d_theta]
        Ps = _signed_legendre(self.L, P)
        T = _trig(self.L, phi)[d_phi]
        return np.einsum("lj,ljp,jp->p", np.asarray(coeffs, dtype=float), Ps, T)


class _FieldOps:
    """Arithmetic and shared derived quantities for both field types."""

    grid = None

    def _wrap(self, values):
        return type(self)(self.grid, values=values)

    def __add__(self, other):
        return self._wrap(self.values + _vals(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - _vals(other))

    def __rsub__(self, other):
        return self._wrap(_vals(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * _vals(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / _vals(other))

    def __neg__(self):
        return self._wrap(-self.values)

    @property
    def dim(self) -> int:
        return self.grid.dim

    def grad_sq(self) -> np.ndarray:
        g = self.grad()
        return np.sum(g * g, axis=-1 - len(self.grid.shape))

    def grad_dot(self, vec) -> np.ndarray:
        return np.sum(self.grad() * vec, axis=-1 - len(self.grid.shape))

    def traceless_hessian_normsq(self) -> np.ndarray:
        """``|Hess u - (Lap u / d) metric|^2`` pointwise."""
        lap = self.laplacian().values
        return self.hessian_normsq() - lap**2 / self.dim

    def integrate(self) -> np.ndarray:
        return self.grid.integrate(self.values)

    def low_mode_energy(self):
        """Squared coefficient energy in degrees ``<= 1`` and in total."""
        c = self.coeffs
        deg = self.grid.degree
        low = np.sum(np.where(deg <= 1, c * c, 0.0), axis=tuple(range(-deg.ndim, 0)))
        total = np.sum(c * c, axis=tuple(range(-deg.ndim, 0)))
        return low, total

    def low_mode_distance(self):
        """Relative coefficient norm above ``l = 1`` (0 when the field vanishes)."""
        c = self.coeffs
        deg = self.grid.degree
        axes = tuple(range(-deg.ndim, 0))
        high = np.sum(np.where(deg > 1, c * c, 0.0), axis=axes)
        total = np.sum(c * c, axis=axes)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.where(total > 0, np.sqrt(high / np.where(total > 0, total, 1.0)), 0.0)
        return float(d) if np.ndim(d) == 0 else d

    def project_low_modes(self):
        c = np.where(self.grid.degree <= 1, self.coeffs, 0.0)
        return type(self)(self.grid, coeffs=c)

    def project(self):
        """Band-limited projection onto degrees ``<= L``."""
        return type(self)(self.grid, coeffs=self.coeffs)

    def to_grid(self, grid, tol: float = 1e-12):
        """Same function on another grid of the same kind.

        Coefficients are copied by ``(l, m)``; dropping non-negligible energy
        above the target bandlimit raises ``ValueError``.
        """
        if type(grid) is not type(self.grid) or getattr(grid, "dim", 2) != self.dim:
            raise ValueError("target grid is of a different kind")
        src = self.coeffs
        out = np.zeros(src.shape[:-self.grid.mask.ndim] + grid.mask.shape)
        Ls, Lt = self.grid.L, grid.L
        Lc = min(Ls, Lt)
        if self.grid.mask.ndim == 2:
            out[..., :Lc + 1, Lt - Lc:Lt + Lc + 1] = src[..., :Lc + 1, Ls - Lc:Ls + Lc + 1]
            dropped = src[..., Lc + 1:, :]
        else:
            out[..., :Lc + 1] = src[..., :Lc + 1]
            dropped = src[..., Lc + 1:]
        total = float(np.sqrt(np.sum(src * src)))
        if dropped.size and float(np.sqrt(np.sum(dropped * dropped))) > tol * max(total, 1e-300):
            raise ValueError("field has energy above the target bandlimit")
        return type(self)(grid, coeffs=out)


def _vals(other):
    return other.values if isinstance(other, _FieldOps) else other


class SphereField(_FieldOps):
    """Real scalar field on ``S^2`` stored as grid samples and/or coefficients."""

    def __init__(self, grid: SphereGrid, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ValueError("need values or coefficients")
        self.grid = grid
        self._values = None if values is None else np.asarray(values, dtype=float)
        self._coeffs = None if coeffs is None else np.asarray(coeffs, dtype=float)

    def __repr__(self):
        return f"SphereField({self.grid!r}, batch={self.values.shape[:-2]})"

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.grid.synthesize(self._coeffs)
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = self.grid.analyze(self._values)
        return self._coeffs

    def deriv(self, d_theta: int, d_phi: int) -> np.ndarray:
        return self.grid.synthesize(self.coeffs, d_theta, d_phi)

    def laplacian(self) -> "SphereField":
        return SphereField(self.grid, coeffs=self.coeffs * self.grid.eigenvalues())

    def grad(self) -> np.ndarray:
        """Orthonormal components ``(u_theta, u_phi / sin theta)``; axis ``-3``."""
        s = self.grid.sin[:, None]
        return np.stack([self.deriv(1, 0), self.deriv(0, 1) / s], axis=-3)

    def hessian(self) -> np.ndarray:
        """Covariant Hessian in the orthonormal frame, axes ``(-4, -3)``."""
        s = self.grid.sin[:, None]
        cot = (self.grid.x / self.grid.sin)[:, None]
        ut = self.deriv(1, 0)
        up = self.deriv(0, 1)
        h11 = self.deriv(2, 0)
        h12 = (self.deriv(1, 1) - cot * up) / s
        h22 = self.deriv(0, 2) / s**2 + cot * ut
        return np.stack([np.stack([h11, h12], axis=-3), np.stack([h12, h22], axis=-3)], axis=-4)

    def hessian_normsq(self) -> np.ndarray:
        H = self.hessian()
        return np.sum(H * H, axis=(-4, -3))

    def hess_apply(self, vec) -> np.ndarray:
        """``Hess u (vec, .)`` for an orthonormal-frame vector ``vec``."""
        H = self.hessian()
        return np.einsum("...abij,...bij->...aij", H, np.broadcast_to(vec, H.shape[:-4] + vec.shape[-3:]))

    def evaluate(self, theta, phi, d_theta: int = 0, d_phi: int = 0):
        if self.coeffs.ndim != 2:
            raise ValueError("scattered evaluation requires an unbatched field")
        return self.grid.evaluate(self.coeffs, theta, phi, d_theta, d_phi)

    def low_mode_vector(self):
        """``(a, b)`` with ``u_low = a + b . X~`` on the unit sphere."""
        C = self.coeffs
        L = self.grid.L
        a = C[..., 0, L] / math.sqrt(FOUR_PI)
        if L == 0:
            return a, np.zeros(a.shape + (3,))
        b = np.stack([C[..., 1, L + 1], C[..., 1, L - 1], C[..., 1, L]], axis=-1) * ELL1
        return a, b


# ---------------------------------------------------------------------------
# Zonal calculus on S^d
# ---------------------------------------------------------------------------

def sphere_area(d: int) -> float:
    """Volume of the unit ``S^d``."""
    return 2 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def _gegenbauer_norm(l, alpha):
    """``int_{-1}^{1} C_l^alpha(x)^2 (1-x^2)^{alpha-1/2} dx``."""
    l = np.asarray(l, dtype=float)
    logh = (math.log(math.pi) + (1 - 2 * alpha) * math.log(2.0) + special.gammaln(l + 2 * alpha)
            - special.gammaln(l + 1) - np.log(l + alpha) - 2 * special.gammaln(alpha))
    return np.exp(logh)


def _zonal_tables(L: int, d: int, x):
    alpha = (d - 1) / 2.0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ls = np.arange(L + 1)
    norm = np.sqrt(_gegenbauer_norm(ls, alpha) * sphere_area(d - 1))
    Q = np.array([special.eval_gegenbauer(l, alpha, x) for l in ls]) / norm[:, None]
    Qx = np.zeros_like(Q)
    Qxx = np.zeros_like(Q)
    for l in ls:
        if l >= 1:
            Qx[l] = 2 * alpha * special.eval_gegenbauer(l - 1, alpha + 1, x) / norm[l]
        if l >= 2:
            Qxx[l] = 4 * alpha * (alpha + 1) * special.eval_gegenbauer(l - 2, alpha + 2, x) / norm[l]
    return Q, Qx, Qxx


class ZonalGrid:
    """Gauss-Gegenbauer nodes in ``x = cos(theta)`` for zonal fields on ``S^d``.

    The nodes carry the weight ``(1 - x^2)^{(d-2)/2}`` of the sphere's volume
    element, so quadrature of polynomial integrands in ``x`` is exact.
    """

    def __init__(self, d: int, L: int, n_nodes: int | None = None):
        if d < 2:
            raise ValueError("zonal calculus needs sphere dimension >= 2")
        self.dim = int(d)
        self.L = int(L)
        self.n_nodes = int(n_nodes) if n_nodes else math.ceil(3 * L / 2) + 1
        if self.n_nodes < L + 1:
            raise ValueError("too few nodes for the requested bandlimit")
        alpha = (d - 1) / 2.0
        if d == 2:
            x, w = special.roots_legendre(self.n_nodes)
        else:
            x, w = special.roots_gegenbauer(self.n_nodes, alpha)
        order = np.argsort(-x)
        self.x = x[order]
        self.theta = np.arccos(self.x)
        self.sin = np.sin(self.theta)
        self.weights = w[order] * sphere_area(d - 1)
        self.shape = (self.n_nodes,)
        self._Q = _zonal_tables(self.L, d, self.x)
        self.degree = np.arange(L + 1)
        self.mask = np.ones(L + 1, dtype=bool)

    def __repr__(self):
        return f"ZonalGrid(d={self.dim}, L={self.L}, n_nodes={self.n_nodes})"

    @classmethod
    def exact_for_degree(cls, d: int, L: int, degree: int) -> "ZonalGrid":
        return cls(d, L, max(L + 1, math.ceil((degree + 1) / 2)))

    @property
    def ncoeffs(self) -> int:
        return self.L + 1

    def pack(self, coeffs):
        return np.asarray(coeffs)

    def unpack(self, vec):
        return np.asarray(vec, dtype=float)

    @property
    def packed_degree(self):
        return self.degree

    def eigenvalues(self) -> np.ndarray:
        l = self.degree
        return -(l * (l + self.dim - 1)).astype(float)

    def synthesize(self, coeffs, d_x: int = 0) -> np.ndarray:
        return np.einsum("...l,li->...i", np.asarray(coeffs, dtype=float), self._Q[d_x])

    def analyze(self, values) -> np.ndarray:
        return np.einsum("...i,li,i->...l", np.asarray(values, dtype=float), self._Q[0], self.weights)

    def integrate(self, values):
        return np.einsum("...i,i->...", np.asarray(values, dtype=float), self.weights)

    def field(self, values) -> "ZonalField":
        return ZonalField(self, values=values)

    def from_coeffs(self, coeffs) -> "ZonalField":
        return ZonalField(self, coeffs=coeffs)

    def from_function(self, fun) -> "ZonalField":
        """Sample ``fun(cos theta)`` on the nodes."""
        return self.field(fun(self.x))

    def basis(self) -> "ZonalField":
        return self.from_coeffs(np.eye(self.L + 1))

    def constant(self, c: float = 1.0) -> "ZonalField":
        coeffs = np.zeros(self.L + 1)
        coeffs[0] = float(c) / self._Q[0][0, 0]
        return self.from_coeffs(coeffs)

    def harmonic(self, l: int) -> "ZonalField":
        c = np.zeros(self.L + 1)
        c[l] = 1.0
        return self.from_coeffs(c)

    def evaluate(self, coeffs, x, d_x: int = 0):
        Q = _zonal_tables(self.L, self.dim, x)[d_x]
        return np.einsum("l,lp->p", np.asarray(coeffs, dtype=float), Q)

    @property
    def ell1(self) -> float:
        """Coefficient of ``cos(theta)`` in the normalized degree-1 basis function."""
        return float(self._Q[0][1, 0] / self.x[0])


class ZonalField(_FieldOps):
    """Axisymmetric field ``u(theta)`` on ``S^d``."""

    def __init__(self, grid: ZonalGrid, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ValueError("need values or coefficients")
        self.grid = grid
        self._values = None if values is None else np.asarray(values, dtype=float)
        self._coeffs = None if coeffs is None else np.asarray(coeffs, dtype=float)

    def __repr__(self):
        return f"ZonalField({self.grid!r}, batch={self.values.shape[:-1]})"

    @property
    def values(self):
        if self._values is None:
            self._values = self.grid.synthesize(self._coeffs)
        return self._values

    @property
    def coeffs(self):
        if self._coeffs is None:
            self._coeffs = self.grid.analyze(self._values)
        return self._coeffs

    def _ux(self, k: int):
        return self.grid.synthesize(self.coeffs, k)

    def d_theta(self) -> np.ndarray:
        return -self.grid.sin * self._ux(1)

    def d_theta2(self) -> np.ndarray:
        return self.grid.sin**2 * self._ux(2) - self.grid.x * self._ux(1)

    def laplacian(self) -> "ZonalField":
        return ZonalField(self.grid, coeffs=self.coeffs * self.grid.eigenvalues())

    def laplacian_direct(self) -> np.ndarray:
        """``u'' + (d-1) cot(theta) u'`` evaluated from theta-derivatives."""
        return self.d_theta2() - (self.dim - 1) * self.grid.x * self._ux(1)

    def grad(self) -> np.ndarray:
        return self.d_theta()[..., None, :]

    def hessian_diag(self):
        """``(u_tt, cot(theta) u_t)``; the second entry has multiplicity ``d-1``."""
        return self.d_theta2(), -self.grid.x * self._ux(1)

    def hessian_normsq(self) -> np.ndarray:
        htt, hang = self.hessian_diag()
        return htt**2 + (self.dim - 1) * hang**2

    def hess_apply(self, vec) -> np.ndarray:
        return (self.d_theta2() * vec[..., 0, :])[..., None, :]

    def evaluate(self, x, d_x: int = 0):
        return self.grid.evaluate(self.coeffs, x, d_x)

    def low_mode_vector(self):
        """``(a, b)`` with ``u_low = a + b cos(theta)``."""
        c = self.coeffs
        a = c[..., 0] * self.grid._Q[0][0, 0]
        b = c[..., 1] * self.grid.ell1 if self.grid.L >= 1 else np.zeros_like(a)
        return a, b
