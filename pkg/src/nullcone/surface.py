"""Spacelike surfaces in a standard null cone ``w = w0``.

A surface is the graph ``x -> (v(x), w0, x)`` over the unit sphere.  It is
stored through ``u = 1/r`` as a band-limited field; ``v = w0 + 2 r*(r)`` so
that ``t = w0 + r*`` on the cone.

Frame conventions (coordinate components ordered ``(v, w, theta, phi)``)::

    L    = (2r/F) d_v
    Lbar = (1/r) (2 d_w + (F/2)|grad v|^2 d_v + F sigma^{ab} v_a d_b)
    d_a F = v_a d_v + d_a

with ``sigma = r^2 * round``.  This equals the compact form
``(1/r)(2 d_w + F grad v - (F/2)|grad v|^2 d_v)`` with ``grad v`` read as
the tangent vector ``sigma^{ab} v_a dF/dtheta^b``.  Then ``<L, L> = <Lbar,
Lbar> = 0``, ``<L, Lbar> = -2`` and ``tr chi = n - 1``.

The quantity ``hsq`` is ``E = -tr chibar``; the mean curvature vector
``H = (tr chibar L + tr chi Lbar)/2`` has ``<H, H> = (n-1) hsq``.

Frames, torsion and Killing pairings are implemented for ``n = 3`` (surfaces
in ``S^2``-symmetric spacetimes); higher ``n`` is supported through zonal
profiles for the scalar quantities only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curvature import ef_christoffels
from .errors import DomainError, NotSpacelikeError, NullConeError
from .spacetime import WarpingModel, default_r_ref, tortoise
from .spectral import ELL1, FOUR_PI, SphereField, SphereGrid, ZonalField, ZonalGrid

DEFAULT_R0 = {"minkowski": 2.0, "schwarzschild": 4.0, "desitter": 0.5, "antidesitter": 1.0}


def default_radius(model: WarpingModel) -> float:
    """A comfortable sphere-of-symmetry radius inside the model's chart."""
    base = DEFAULT_R0.get(model.kind)
    if base is None:
        lo, hi = model.r_lo, model.r_hi
        return 2 * max(lo, 0.5) if math.isinf(hi) else 0.5 * (lo + hi)
    if model.kind == "schwarzschild":
        return base * model.mass
    if model.kind in ("desitter", "antidesitter"):
        return base * model.radius_l
    return base


def _ef_metric_arrays(F, r, theta):
    shape = np.broadcast(F, r, theta).shape
    g = np.zeros((4, 4) + shape)
    g[0, 1] = g[1, 0] = -0.5 * F
    g[2, 2] = r**2
    g[3, 3] = (r * np.sin(theta)) ** 2
    return g


@dataclass
class _Local:
    """Frame data at a set of points, all components in EF coordinates."""

    theta: np.ndarray
    r: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    dr: np.ndarray       # [a] coordinate derivatives of r
    dv: np.ndarray       # [a]
    d2v: np.ndarray      # [a, b] coordinate second derivatives of v
    grad_v_sq: np.ndarray
    metric: np.ndarray   # [mu, nu]
    sigma: np.ndarray    # [a, b]
    L: np.ndarray        # [mu]
    Lbar: np.ndarray     # [mu]
    tangents: np.ndarray  # [a, mu]


def _local_frame(model: WarpingModel, u, du, d2u, theta) -> _Local:
    """Frame quantities from ``u = 1/r`` and its coordinate derivatives."""
    u = np.asarray(u, dtype=float)
    r = 1.0 / u
    F = np.asarray(model.fsq(r), dtype=float)
    dF = np.asarray(model.dfsq(r), dtype=float)
    s2 = np.sin(theta) ** 2
    dr = -du / u**2
    d2r = -d2u / u**2 + 2 * du[:, None] * du[None, :] / u**3
    dv = (2.0 / F) * dr
    d2v = (2.0 / F) * d2r - (2.0 * dF / F**2) * dr[:, None] * dr[None, :]
    inv_round = np.stack([np.ones_like(s2), 1.0 / s2])
    grad_v_sq = (inv_round[0] * dv[0] ** 2 + inv_round[1] * dv[1] ** 2) / r**2
    shape = u.shape
    L = np.zeros((4,) + shape)
    L[0] = 2 * r / F
    Lbar = np.zeros((4,) + shape)
    Lbar[0] = 0.5 * F * grad_v_sq / r
    Lbar[1] = 2.0 / r
    Lbar[2] = F * inv_round[0] * dv[0] / r**3
    Lbar[3] = F * inv_round[1] * dv[1] / r**3
    T = np.zeros((2, 4) + shape)
    T[:, 0] = dv
    T[0, 2] = 1.0
    T[1, 3] = 1.0
    g = _ef_metric_arrays(F, r, theta)
    sigma = np.einsum("amx,mnx,bnx->abx", T.reshape(2, 4, -1), g.reshape(4, 4, -1),
                      T.reshape(2, 4, -1)).reshape((2, 2) + shape)
    return _Local(theta, r, F, dF, dr, dv, d2v, grad_v_sq, g, sigma, L, Lbar, T)


def _pair(g, X, Y):
    return np.einsum("mn...,m...,n...->...", g, X, Y)


def _inv2(S):
    det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    return np.stack([np.stack([S[1, 1], -S[0, 1]]), np.stack([-S[1, 0], S[0, 0]])]) / det


@dataclass
class NullFrame:
    """Null normals and tangents at the grid nodes.

    Components are EF-coordinate arrays; tangents are ``dF/dtheta^a`` for
    ``a = theta, phi``.
    """

    L: np.ndarray
    Lbar: np.ndarray
    tangents: np.ndarray
    metric: np.ndarray
    sigma: np.ndarray
    r: np.ndarray
    theta: np.ndarray

    def pairings(self) -> dict:
        g = self.metric
        out = {
            "<L,L>": _pair(g, self.L, self.L),
            "<Lbar,Lbar>": _pair(g, self.Lbar, self.Lbar),
            "<L,Lbar>": _pair(g, self.L, self.Lbar),
        }
        for a, name in enumerate(("theta", "phi")):
            out[f"<L,d_{name}>"] = _pair(g, self.L, self.tangents[a])
            out[f"<Lbar,d_{name}>"] = _pair(g, self.Lbar, self.tangents[a])
        return out

    def pairing_residuals(self) -> dict:
        """Max deviation of each pairing from its prescribed value.

        Normalized by the frame scale so the numbers are dimensionless.
        """
        res = {}
        scale_t = self.r  # tangents have length ~ r
        for key, val in self.pairings().items():
            target = -2.0 if key == "<L,Lbar>" else 0.0
            if "d_" in key:
                norm = scale_t * (1.0 if key.endswith("theta>") else np.sin(self.theta))
            else:
                norm = 1.0
            res[key] = float(np.max(np.abs((val - target) / norm)))
        return res

    def induced_metric_residual(self) -> float:
        """``max |sigma - r^2 round| / r^2`` with sigma assembled from tangents."""
        s2 = np.sin(self.theta) ** 2
        expected = np.zeros_like(self.sigma)
        expected[0, 0] = self.r**2
        expected[1, 1] = self.r**2 * s2
        norm = self.r**2 * np.stack([np.stack([np.ones_like(s2), np.sin(self.theta)]),
                                      np.stack([np.sin(self.theta), s2])])
        return float(np.max(np.abs(self.sigma - expected) / norm))


@dataclass
class PointFrame:
    """Frame data at a single point of the surface (coordinate components)."""

    theta: float
    phi: float
    r: float
    v: float
    dr: np.ndarray
    L: np.ndarray
    Lbar: np.ndarray
    tangents: np.ndarray
    sigma: np.ndarray
    metric: np.ndarray


@dataclass
class MeanCurvature:
    H: np.ndarray
    hh: np.ndarray
    psi: np.ndarray
    tr_chi: np.ndarray
    tr_chibar: np.ndarray
    ratio_to_hsq: float
    h_dot_l: np.ndarray
    h_dot_tangent: float


@dataclass
class KillingPairing:
    which: str
    index: int | None
    computed: np.ndarray
    closed_form: np.ndarray
    max_rel_error: float
    tangency_residual: float


KILLING_FAMILIES = ("time", "boost", "ads_k", "ads_kprime", "ds_k")
_KILLING_MODELS = {"boost": "minkowski", "ads_k": "antidesitter", "ads_kprime": "antidesitter",
                   "ds_k": "desitter"}


class NullConeSurface:
    """Surface in the standard null cone ``w = w0`` of ``model``.

    Parameters
    ----------
    model : WarpingModel
    u : SphereField or ZonalField
        ``1/r`` sampled on a spectral grid.  A :class:`SphereField` requires
        ``model.n == 3``; a :class:`ZonalField` must live on ``S^{n-1}``.
    w0 : float
        Retarded time labelling the cone.
    r_ref : float, optional
        Tortoise reference radius (defaults per :func:`default_r_ref`).

    Raises
    ------
    DomainError
        If ``u`` is not positive or ``1/u`` leaves the model's chart.
    """

    def __init__(self, model: WarpingModel, u, w0: float = 0.0, r_ref: float | None = None):
        if isinstance(u, SphereField):
            if model.n != 3:
                raise ValueError("full 2D profiles require n = 3; use a ZonalField for n > 3")
        elif isinstance(u, ZonalField):
            if u.grid.dim != model.n - 1:
                raise ValueError(f"zonal grid is S^{u.grid.dim}, model needs S^{model.n - 1}")
        else:
            raise TypeError("u must be a SphereField or ZonalField")
        if u.values.ndim != len(u.grid.shape):
            raise ValueError("surface profile must be a single (unbatched) field")
        vals = u.values
        if not np.all(vals > 0):
            bad = np.argwhere(~(vals > 0))
            raise DomainError(f"u = 1/r must be positive; {len(bad)} nodes fail, first {bad[:3].tolist()}")
        model.check_domain(1.0 / vals, what="r = 1/u")
        self.model = model
        self.u = u
        self.w0 = float(w0)
        self.r_ref = default_r_ref(model) if r_ref is None else float(r_ref)

    def __repr__(self):
        return f"NullConeSurface({self.model.kind}, n={self.n}, w0={self.w0}, grid={self.grid!r})"

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_r(cls, model: WarpingModel, grid, r_values, w0: float = 0.0, r_ref=None):
        """Build from samples of ``r``; ``u = 1/r`` is projected onto the grid's bandlimit."""
        r_values = np.asarray(r_values, dtype=float)
        if not np.all(r_values > 0):
            raise DomainError("r must be positive")
        return cls(model, grid.field(1.0 / r_values).project(), w0, r_ref)

    @classmethod
    def round(cls, model: WarpingModel, grid, r0: float | None = None, w0: float = 0.0, r_ref=None):
        r0 = default_radius(model) if r0 is None else float(r0)
        return cls(model, grid.constant(1.0 / r0), w0, r_ref)

    def with_grid(self, grid) -> "NullConeSurface":
        """The same surface resampled on ``grid`` (coefficients copied by degree)."""
        return NullConeSurface(self.model, self.u.to_grid(grid), self.w0, self.r_ref)

    # -- basic fields -------------------------------------------------------
    @property
    def grid(self):
        return self.u.grid

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def is_zonal(self) -> bool:
        return isinstance(self.u, ZonalField)

    @property
    def r(self) -> np.ndarray:
        return 1.0 / self.u.values

    @property
    def fsq(self) -> np.ndarray:
        return np.asarray(self.model.fsq(self.r), dtype=float)

    @property
    def v(self) -> np.ndarray:
        return self.w0 + 2.0 * np.asarray(tortoise(self.model, self.r, self.r_ref))

    def grad_r(self) -> np.ndarray:
        """Round-frame gradient of ``r``."""
        return -self.u.grad() / self.u.values**2

    def grad_v(self) -> np.ndarray:
        """Round-frame gradient of ``v``, equal to ``(2/f^2) grad r``."""
        return (2.0 / self.fsq) * self.grad_r()

    def grad_r_sq(self) -> np.ndarray:
        """``|grad r|^2`` in the round metric."""
        return self.u.grad_sq() / self.u.values**4

    def laplacian_r(self) -> np.ndarray:
        """Round Laplacian of ``r`` from ``u``: ``-Lap u/u^2 + 2|grad u|^2/u^3``."""
        u = self.u.values
        return -self.u.laplacian().values / u**2 + 2 * self.u.grad_sq() / u**3

    # -- expansions ---------------------------------------------------------
    def tr_chi_bar(self):
        """``-(1/r^2)[(n-1)(f^2 + |grad r|_sigma^2) - 2 r Lap_sigma r]`` as a field."""
        return self.grid.field(-self._sigma_form())

    def _sigma_form(self) -> np.ndarray:
        n = self.n
        r = self.r
        gsq = self.grad_r_sq()
        grad_sigma_sq = gsq / r**2
        lap_sigma = (self.laplacian_r() + (n - 3) * gsq / r) / r**2
        return ((n - 1) * (self.fsq + grad_sigma_sq) - 2 * r * lap_sigma) / r**2

    def hsq(self):
        """``E = -tr chibar`` (the constant-mean-curvature-norm scalar) as a field."""
        return self.grid.field(self._sigma_form())

    def hsq_u_form(self):
        """``u^2 [(n-1) f^2 - (n-1)|grad u|^2/u^2 + (2/u) Lap u]``, an independent route."""
        u = self.u.values
        n = self.n
        val = u**2 * ((n - 1) * self.fsq - (n - 1) * self.u.grad_sq() / u**2
                      + 2.0 * self.u.laplacian().values / u)
        return self.grid.field(val)

    def gauss_curvature(self):
        """Gauss curvature ``(1 - Lap log r)/r^2`` of ``sigma = r^2 round`` (``n = 3``)."""
        self._require_2d("Gauss curvature")
        log_r = self.grid.field(np.log(self.r))
        return self.grid.field((1.0 - log_r.laplacian().values) / self.r**2)

    # -- frames ---------------------------------------------------------------
    def _require_2d(self, what: str):
        if self.is_zonal:
            raise NullConeError(f"{what} is implemented for n = 3 full-sphere profiles only")

    def _local_nodes(self) -> _Local:
        u = self.u
        du = np.stack([u.deriv(1, 0), u.deriv(0, 1)])
        d2u = np.stack([np.stack([u.deriv(2, 0), u.deriv(1, 1)]),
                        np.stack([u.deriv(1, 1), u.deriv(0, 2)])])
        theta = np.broadcast_to(self.grid.theta[:, None], self.grid.shape)
        return _local_frame(self.model, u.values, du, d2u, theta)

    def _local_points(self, theta, phi) -> _Local:
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        ev = self.u.evaluate
        u = ev(theta, phi)
        du = np.stack([ev(theta, phi, 1, 0), ev(theta, phi, 0, 1)])
        uxy = ev(theta, phi, 1, 1)
        d2u = np.stack([np.stack([ev(theta, phi, 2, 0), uxy]), np.stack([uxy, ev(theta, phi, 0, 2)])])
        return _local_frame(self.model, u, du, d2u, theta)

    def frame(self) -> NullFrame:
        """Null frame ``(L, Lbar)`` and tangents at every grid node."""
        self._require_2d("the null frame")
        loc = self._local_nodes()
        theta = np.broadcast_to(self.grid.theta[:, None], self.grid.shape)
        return NullFrame(loc.L, loc.Lbar, loc.tangents, loc.metric, loc.sigma, loc.r, theta)

    def frame_at(self, theta: float, phi: float) -> PointFrame:
        self._require_2d("the null frame")
        loc = self._local_points(np.array([theta]), np.array([phi]))
        r = float(loc.r[0])
        v = self.w0 + 2.0 * float(tortoise(self.model, r, self.r_ref))
        return PointFrame(float(theta), float(phi), r, v, loc.dr[:, 0], loc.L[:, 0], loc.Lbar[:, 0],
                          loc.tangents[:, :, 0], loc.sigma[:, :, 0], loc.metric[:, :, 0])

    def random_points(self, count: int, rng) -> list:
        """Random ``(theta, phi)`` away from the coordinate poles."""
        return [(float(rng.uniform(0.3, math.pi - 0.3)), float(rng.uniform(0.0, 2 * math.pi)))
                for _ in range(count)]

    def _christoffels(self, loc: _Local, phi_like):
        return ef_christoffels(self.model, loc.r, [loc.theta, phi_like])

    def _second_fundamental_traces(self, loc: _Local):
        """``tr chi`` and ``tr chibar`` from ``-sigma^{ab} <N, D_a dF_b>``."""
        G = self._christoffels(loc, np.zeros_like(loc.r))
        T = loc.tangents
        DT = np.einsum("mpq...,ap...,bq...->abm...", G, T, T)
        DT[:, :, 0] += loc.d2v
        sig_inv = _inv2(loc.sigma)
        out = []
        for N in (loc.L, loc.Lbar):
            h = np.einsum("mn...,m...,abn...->ab...", loc.metric, N, DT)
            out.append(-np.einsum("ab...,ab...->...", sig_inv, h))
        return out[0], out[1]

    def tr_chi_frame(self):
        """``(tr chi, tr chibar)`` at the nodes from the frame and exact Christoffels."""
        self._require_2d("frame traces")
        return self._second_fundamental_traces(self._local_nodes())

    def tr_chi_bar_fd(self, points, step: float = 1e-4) -> np.ndarray:
        """``sigma^{ab} <D_a Lbar, dF_b>`` with ``d_a Lbar`` by central differences.

        Evaluated at scattered ``points`` ``[(theta, phi), ...]``; a check on
        the closed-form expression that shares no derivative algebra with it.
        """
        self._require_2d("finite-difference tr chibar")
        pts = np.asarray(points, dtype=float)
        th, ph = pts[:, 0], pts[:, 1]
        loc = self._local_points(th, ph)
        dLbar = []
        for k in range(2):
            acc = 0.0
            for off, wgt in ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)):
                tt = th + (off * step if k == 0 else 0.0)
                pp = ph + (off * step if k == 1 else 0.0)
                acc = acc + wgt * self._local_points(tt, pp).Lbar
            dLbar.append(acc / (12 * step))
        dLbar = np.stack(dLbar)
        G = ef_christoffels(self.model, loc.r, [loc.theta, ph])
        DL = dLbar + np.einsum("mpq...,ap...,q...->am...", G, loc.tangents, loc.Lbar)
        h = np.einsum("mn...,am...,bn...->ab...", loc.metric, DL, loc.tangents)
        return np.einsum("ab...,ab...->...", _inv2(loc.sigma), h)

    def tr_chi_bar_at(self, points) -> np.ndarray:
        """Closed-form ``tr chibar`` at scattered points."""
        self._require_2d("pointwise tr chibar")
        pts = np.asarray(points, dtype=float)
        th, ph = pts[:, 0], pts[:, 1]
        u = self.u.evaluate(th, ph)
        ut = self.u.evaluate(th, ph, 1, 0)
        up = self.u.evaluate(th, ph, 0, 1)
        lap = self.grid.evaluate(self.u.coeffs * self.grid.eigenvalues(), th, ph)
        gsq = ut**2 + up**2 / np.sin(th) ** 2
        F = self.model.fsq(1.0 / u)
        return -u**2 * (2 * F - 2 * gsq / u**2 + 2 * lap / u)

    # -- mean curvature and torsion -----------------------------------------
    def mean_curvature_vector(self) -> MeanCurvature:
        """``H = (tr chibar L + tr chi Lbar)/2`` with its norms and pairings."""
        self._require_2d("the mean curvature vector")
        loc = self._local_nodes()
        tr_chi, tr_chibar = self._second_fundamental_traces(loc)
        H = 0.5 * (tr_chibar * loc.L + tr_chi * loc.Lbar)
        hh = _pair(loc.metric, H, H)
        hsq = self.hsq().values
        ratio = hh / hsq
        h_dot_t = max(float(np.max(np.abs(_pair(loc.metric, H, loc.tangents[a]) / loc.r))) for a in range(2))
        return MeanCurvature(H, hh, tr_chibar / tr_chi, tr_chi, tr_chibar, float(np.mean(ratio)),
                             _pair(loc.metric, H, loc.L), h_dot_t)

    def _spectral_coord_grad(self, values) -> np.ndarray:
        g = self.grid.field(values).grad()
        return np.stack([g[0], g[1] * self.grid.sin[:, None]])

    def alpha_H(self) -> np.ndarray:
        """Torsion ``<D_a e_n, e_{n+1}>`` in the orthonormal round frame ``(e_theta, e_phi)``.

        ``e_n = -H/|H|`` and ``e_{n+1}`` is the future unit normal orthogonal
        to it.  Frame coefficients are differentiated spectrally; covariant
        terms use the exact EF Christoffel symbols.

        Raises
        ------
        NotSpacelikeError
            If ``H`` fails to be spacelike at some node.
        """
        self._require_2d("the torsion 1-form")
        loc = self._local_nodes()
        tr_chi, tr_chibar = self._second_fundamental_traces(loc)
        a = 0.5 * tr_chibar
        b = 0.5 * tr_chi
        hh = -4.0 * a * b
        if not np.all(hh > 0):
            nodes = np.argwhere(~(hh > 0))
            raise NotSpacelikeError(f"H is not spacelike at {len(nodes)} nodes, first {nodes[:3].tolist()}",
                                    nodes=nodes)
        Hn = np.sqrt(hh)
        p, q = -a / Hn, -b / Hn
        s, t = -a / Hn, b / Hn
        dp = self._spectral_coord_grad(p)
        dq = self._spectral_coord_grad(q)
        G = self._christoffels(loc, np.zeros_like(loc.r))
        zeros = np.zeros_like(loc.r)
        dL = np.stack([np.stack([c, zeros, zeros, zeros]) for c in self._spectral_coord_grad(loc.L[0])])
        dLb = np.stack([np.stack([cv, cw, zeros, zeros])
                        for cv, cw in zip(self._spectral_coord_grad(loc.Lbar[0]),
                                          self._spectral_coord_grad(loc.Lbar[1]))])
        DL = dL + np.einsum("mpq...,ap...,q...->am...", G, loc.tangents, loc.L)
        # Angular partials of Lbar pair to zero against L (g_{v, angle} = 0).
        DLb = dLb + np.einsum("mpq...,ap...,q...->am...", G, loc.tangents, loc.Lbar)
        dl_lb = np.einsum("mn...,am...,n...->a...", loc.metric, DL, loc.Lbar)
        dlb_l = np.einsum("mn...,am...,n...->a...", loc.metric, DLb, loc.L)
        alpha = -2 * t * dp - 2 * s * dq + p * t * dl_lb + q * s * dlb_l
        alpha[1] = alpha[1] / self.grid.sin[:, None]
        return alpha

    def dlog_abs_H(self) -> np.ndarray:
        """Round-frame gradient of ``log|H|`` with ``|H|^2 = (n-1) hsq``."""
        self._require_2d("d log|H|")
        hsq = self.hsq_u_form().values
        if not np.all(hsq > 0):
            nodes = np.argwhere(~(hsq > 0))
            raise NotSpacelikeError("H is not spacelike", nodes=nodes)
        return self.grid.field(0.5 * np.log((self.n - 1) * hsq)).grad()

    def cnnc_residual(self) -> np.ndarray:
        """``alpha_H + d log|H|``, which vanishes for surfaces in a standard null cone."""
        return self.alpha_H() + self.dlog_abs_H()

    # -- Killing pairings -----------------------------------------------------
    def killing_pairing(self, which: str, index: int | None = None) -> KillingPairing:
        """``<K, L>`` for a Killing field, computed and in closed form.

        ``which`` is one of ``time``, ``boost`` (Minkowski), ``ads_k``,
        ``ads_kprime`` (anti-de Sitter) or ``ds_k`` (de Sitter); ``index``
        selects the Cartesian direction 1..3 for the non-time families.

        The computed route pulls an ambient Killing field of the embedding
        (or ``d_t`` in Schwarzschild) back to static coordinates by least
        squares, converts to EF components and contracts with ``L`` using the
        EF metric.
        """
        self._require_2d("Killing pairings")
        if which not in KILLING_FAMILIES:
            raise ValueError(f"unknown Killing family {which!r}")
        need = _KILLING_MODELS.get(which)
        if need is not None and self.model.kind != need:
            raise ValueError(f"Killing family {which!r} requires a {need} model, got {self.model.kind}")
        if which != "time":
            if index not in (1, 2, 3):
                raise ValueError("index must be 1, 2 or 3")
        if which == "time" and self.model.kind not in ("schwarzschild", "minkowski", "desitter",
                                                       "antidesitter"):
            raise ValueError("time translation pairing needs a built-in model")
        loc = self._local_nodes()
        grid = self.grid
        theta = np.broadcast_to(grid.theta[:, None], grid.shape)
        phi = np.broadcast_to(grid.phi[None, :], grid.shape)
        r = loc.r
        F = loc.F
        t = self.w0 + np.asarray(tortoise(self.model, r, self.r_ref))
        X = grid.cartesian()
        comps, tang = _killing_static_components(self.model, which, index, t, r, theta, phi)
        K = np.zeros_like(loc.L)
        K[0] = comps[0] + comps[1] / F
        K[1] = comps[0] - comps[1] / F
        K[2:] = comps[2:]
        computed = _pair(loc.metric, K, loc.L)
        if which == "time":
            closed = -r
        else:
            Xi = X[index - 1]
            # t - r* measured from the center
            w_c = self.w0 - (float(tortoise(self.model, self.r_ref, 0.0)) if self.r_ref != 0 else 0.0)
            l = self.model.radius_l
            factor = {"boost": w_c,
                      "ads_k": None if l is None else l * math.sin(w_c / l),
                      "ads_kprime": None if l is None else l * math.cos(w_c / l),
                      "ds_k": None if l is None else l * math.sinh(w_c / l)}[which]
            closed = r * factor * Xi
        scale = np.maximum(np.max(np.abs(closed)), np.max(r) * 1e-3)
        err = float(np.max(np.abs(computed - closed)) / scale)
        return KillingPairing(which, index, computed, closed, err, tang)


def _killing_static_components(model, which, index, t, r, theta, phi):
    """Static-chart components ``(K^t, K^r, K^theta, K^phi)`` of a Killing field.

    Returns the components and the relative least-squares residual, which
    measures how tangent the ambient field is to the embedded spacetime.
    """
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    Xt = np.stack([st * cp, st * sp, ct])
    Xth = np.stack([ct * cp, ct * sp, -st])
    Xph = np.stack([-st * sp, st * cp, np.zeros_like(st)])
    kind = model.kind
    if kind == "schwarzschild":
        if which != "time":
            raise ValueError("Schwarzschild admits only the time translation here")
        comps = np.stack([np.ones_like(r), np.zeros_like(r), np.zeros_like(r), np.zeros_like(r)])
        return comps, 0.0
    zeros = np.zeros_like(r)
    ones = np.ones_like(r)
    # Embedding X(t, r, theta, phi) and its Jacobian columns; ambient coordinates
    # are (time-like..., spatial x1..x3).
    if kind == "minkowski":
        emb = [t, *(r * Xt)]
        cols = [np.stack([ones, *(zeros * Xt)]), np.stack([zeros, *Xt]),
                np.stack([zeros, *(r * Xth)]), np.stack([zeros, *(r * Xph)])]
        if which == "time":
            V = np.stack([ones, zeros, zeros, zeros])
        else:
            V = np.stack([emb[index]] + [emb[0] if k == index else zeros for k in (1, 2, 3)])
    else:
        l = model.radius_l
        if kind == "antidesitter":
            rho = np.sqrt(l * l + r * r)
            c, s = np.cos(t / l), np.sin(t / l)
            X0, X4 = rho * c, rho * s
            dX0 = (-rho * s / l, r / rho * c)
            dX4 = (rho * c / l, r / rho * s)
        else:
            rho = np.sqrt(l * l - r * r)
            c, s = np.cosh(t / l), np.sinh(t / l)
            X0, X4 = rho * s, rho * c
            dX0 = (rho * c / l, -r / rho * s)
            dX4 = (rho * s / l, -r / rho * c)
        Xs = r * Xt
        cols = [np.stack([dX0[0], dX4[0], zeros, zeros, zeros]),
                np.stack([dX0[1], dX4[1], *Xt]),
                np.stack([zeros, zeros, *(r * Xth)]),
                np.stack([zeros, zeros, *(r * Xph)])]
        if which == "time":
            V = (np.stack([-X4, X0, zeros, zeros, zeros]) if kind == "antidesitter"
                 else np.stack([X4, X0, zeros, zeros, zeros])) / l
        else:
            i = index - 1
            sp_comp = [X0 if k == i else zeros for k in range(3)]
            if which in ("ads_kprime", "ds_k"):
                V = np.stack([Xs[i], zeros, *sp_comp])
            else:  # ads_k rotates the second time-like axis into x_i
                V = np.stack([zeros, Xs[i], *[X4 if k == i else zeros for k in range(3)]])
    J = np.stack(cols, axis=1)  # [ambient, coord, ...]
    Jf = np.moveaxis(J.reshape(J.shape[0], 4, -1), -1, 0)
    Vf = np.moveaxis(V.reshape(V.shape[0], -1), -1, 0)
    sol = np.linalg.solve(np.einsum("pai,paj->pij", Jf, Jf), np.einsum("pai,pa->pi", Jf, Vf)[..., None])[..., 0]
    resid = np.einsum("paj,pj->pa", Jf, sol) - Vf
    tang = float(np.max(np.abs(resid)) / max(np.max(np.abs(Vf)), 1e-300))
    comps = np.moveaxis(sol, 0, -1).reshape((4,) + r.shape)
    return comps, tang


# ---------------------------------------------------------------------------
# Boosted spheres
# ---------------------------------------------------------------------------

def _axis_vector(axis) -> np.ndarray:
    if isinstance(axis, (int, np.integer)):
        if axis not in (1, 2, 3):
            raise ValueError("axis must be 1, 2, 3 or a 3-vector")
        e = np.zeros(3)
        e[axis - 1] = 1.0
        return e
    e = np.asarray(axis, dtype=float)
    nrm = np.linalg.norm(e)
    if e.shape != (3,) or nrm == 0:
        raise ValueError("axis vector must be a non-zero 3-vector")
    return e / nrm


def boost_sphere(model: WarpingModel, grid, r0: float, beta: float, axis=3, w0: float = 0.0,
                 r_ref=None) -> NullConeSurface:
    """Surface ``r = r0 / (cosh(beta) - sinh(beta) X.axis)`` in a space form.

    On a :class:`ZonalGrid` the axis is the polar axis (``axis`` may be ``+1``
    or ``-1`` to flip it).
    """
    if not model.is_space_form:
        raise ValueError(f"boosted spheres need a space form, got {model.kind}")
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    ch, sh = math.cosh(beta), math.sinh(beta)
    if isinstance(grid, ZonalGrid):
        sgn = -1.0 if axis == -1 else 1.0
        c = np.zeros(grid.L + 1)
        c[0] = ch / r0 / grid._Q[0][0, 0]
        if grid.L >= 1:
            c[1] = -sgn * sh / r0 / grid.ell1
        elif beta != 0:
            raise ValueError("bandlimit 0 cannot carry a boost")
        u = grid.from_coeffs(c)
    else:
        e = _axis_vector(axis)
        C = np.zeros(grid.mask.shape)
        L = grid.L
        C[0, L] = ch / r0 * math.sqrt(FOUR_PI)
        if L >= 1:
            b = -sh / r0 * e / ELL1
            C[1, L + 1], C[1, L - 1], C[1, L] = b
        elif beta != 0:
            raise ValueError("bandlimit 0 cannot carry a boost")
        u = grid.from_coeffs(C)
    return NullConeSurface(model, u, w0, r_ref)


@dataclass(frozen=True)
class BoostFit:
    r0: float
    beta: float
    axis: np.ndarray
    degenerate_axis: bool
    distance: float

    def as_dict(self) -> dict:
        return {"r0": self.r0, "beta": self.beta, "axis": [float(a) for a in np.atleast_1d(self.axis)],
                "degenerate_axis": self.degenerate_axis, "low_mode_distance": self.distance}


@dataclass(frozen=True)
class NotLowMode:
    distance: float

    def as_dict(self) -> dict:
        return {"low_mode_distance": self.distance}


def fit_boosted_sphere(u, tol: float = 1e-8, degenerate_tol: float = 1e-14):
    """Recover ``(r0, beta, axis)`` from an ``l <= 1`` profile ``u = a + b.X``.

    Returns :class:`NotLowMode` when the relative energy above ``l = 1``
    exceeds ``tol``.

    Raises
    ------
    DomainError
        If ``a <= |b|``: such a profile is not positive on the sphere.
    """
    dist = float(u.low_mode_distance())
    if dist >= tol:
        return NotLowMode(dist)
    a, b = u.low_mode_vector()
    a = float(a)
    b = np.atleast_1d(np.asarray(b, dtype=float))
    nb = float(np.linalg.norm(b))
    if not a > nb:
        raise DomainError("profile not a boosted sphere: need a > |b| for u = a + b.X to stay positive")
    r0 = 1.0 / math.sqrt(a * a - nb * nb)
    beta = math.atanh(nb / a)
    degenerate = nb <= degenerate_tol * abs(a)
    if degenerate:
        axis = np.zeros_like(b)
        axis[-1] = 1.0
    else:
        axis = -b / nb
    return BoostFit(r0, beta, axis, degenerate, dist)


# ---------------------------------------------------------------------------
# Random profiles
# ---------------------------------------------------------------------------

def random_profile_u(model: WarpingModel, grid, rng, r0: float | None = None, amplitude: float = 0.01,
                     max_degree: int = 4, min_degree: int = 1):
    """``u = (1 + p)/r0`` with ``p`` a random field in degrees ``min..max`` and ``max|p| = amplitude``."""
    r0 = default_radius(model) if r0 is None else float(r0)
    deg = grid.degree
    pert = np.where((deg >= min_degree) & (deg <= max_degree) & grid.mask,
                    rng.standard_normal(grid.mask.shape), 0.0)
    p = grid.from_coeffs(pert)
    peak = float(np.max(np.abs(p.values)))
    scale = amplitude / peak if peak > 0 else 0.0
    coeffs = pert * scale / r0
    if isinstance(grid, SphereGrid):
        coeffs[0, grid.L] += math.sqrt(FOUR_PI) / r0
    else:
        coeffs[0] += 1.0 / r0 / grid._Q[0][0, 0]
    return grid.from_coeffs(coeffs)


def random_surface(model: WarpingModel, grid, rng, r0: float | None = None, amplitude: float = 0.01,
                   max_degree: int = 4, w0: float = 0.0, min_degree: int = 1) -> NullConeSurface:
    """A random perturbation of the round sphere of radius ``r0``."""
    u = random_profile_u(model, grid, rng, r0, amplitude, max_degree, min_degree)
    return NullConeSurface(model, u, w0)
