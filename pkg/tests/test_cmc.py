import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nullcone import cmc
from nullcone.errors import DomainError, NumericGuardError
from nullcone.spacetime import WarpingModel
from nullcone.spectral import SphereGrid, ZonalGrid
from nullcone.surface import NullConeSurface, boost_sphere, random_profile_u

from conftest import MODELS

MINK = MODELS["minkowski"]
SCHW = MODELS["schwarzschild"]


def _schwarzschild_start(L, seed, r0=4.0, amplitude=0.01):
    rng = np.random.default_rng(seed)
    return random_profile_u(SCHW, SphereGrid(L), rng, r0=r0, amplitude=amplitude, min_degree=1)


class TestProblem:
    @pytest.mark.parametrize("E", [0.0, -1.0, math.inf])
    def test_rejects_bad_target(self, E):
        with pytest.raises(ValueError):
            cmc.CmcProblem(MINK, E, 8)

    def test_rejects_bad_bandlimit(self):
        with pytest.raises(ValueError):
            cmc.CmcProblem(MINK, 1.0, 0)

    def test_fixed_values_length(self):
        with pytest.raises(ValueError):
            cmc.CmcProblem(MINK, 1.0, 8, cmc.FixLowModes(values=(1.0, 0.0)))
        cmc.CmcProblem(WarpingModel.minkowski(4), 1.0, 8, cmc.FixLowModes(values=(1.0, 0.0)))

    def test_grid_kind(self):
        assert isinstance(cmc.CmcProblem(MINK, 1.0, 6).grid(), SphereGrid)
        assert isinstance(cmc.CmcProblem(WarpingModel.minkowski(5), 1.0, 6).grid(), ZonalGrid)

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_gauss_conversion(self, n):
        assert cmc.gauss_to_hsq(0.25, n) == pytest.approx((n - 1) * 0.25)


class TestResidual:
    def test_agrees_with_surface_hsq(self, model, grid16):
        u = random_profile_u(model, grid16, np.random.default_rng(0), amplitude=0.05)
        surf = NullConeSurface(model, u)
        res = cmc.hsq_residual(cmc.CmcProblem(model, 1.0, 16), u).values + 1.0
        np.testing.assert_allclose(res, surf.hsq().values, rtol=1e-10)

    @pytest.mark.parametrize("kind,beta", [("minkowski", 0.7), ("desitter", 0.3), ("antidesitter", 1.0)])
    def test_boosted_spheres_solve_the_space_form_equation(self, kind, beta):
        model = MODELS[kind]
        r0 = {"minkowski": 2.0, "desitter": 0.5, "antidesitter": 1.0}[kind]
        kappa = float(model.fsq(1.0)) - 1.0
        surf = boost_sphere(model, SphereGrid(12), r0, beta, axis=(0.0, 1.0, 1.0))
        E = 2.0 * (1.0 / r0**2 + kappa)
        res = cmc.hsq_residual(cmc.CmcProblem(model, E, 12), surf.u)
        assert np.max(np.abs(res.values)) < 1e-10 * E

    def test_schwarzschild_constant_profile(self, grid16):
        res = cmc.hsq_residual(cmc.CmcProblem(SCHW, 1.0 / 16, 16), grid16.constant(0.25))
        assert np.max(np.abs(res.values)) < 1e-15

    def test_minkowski_residual_is_twice_liouville(self, grid16, rng):
        u = random_profile_u(MINK, grid16, rng, amplitude=0.1)
        lhs = cmc.hsq_residual(cmc.CmcProblem(MINK, 0.8, 16), u).values
        np.testing.assert_allclose(lhs / 2, cmc.liouville_residual(u, 0.4).values, atol=1e-12)

    def test_domain_error_lists_nodes(self, grid16):
        with pytest.raises(DomainError, match="nodes"):
            cmc.hsq_residual(cmc.CmcProblem(SCHW, 1.0, 16), grid16.constant(0.8))

    def test_field_kind_mismatch(self):
        with pytest.raises(ValueError):
            cmc.hsq_residual(cmc.CmcProblem(WarpingModel.minkowski(4), 1.0, 4), SphereGrid(4).constant(1.0))

    def test_liouville_on_low_modes(self, grid16):
        X = grid16.cartesian()
        u = grid16.field(2.0 + 0.3 * X[0] - 0.5 * X[2])
        res = cmc.liouville_residual(u, 4.0 - 0.09 - 0.25)
        assert np.max(np.abs(res.values)) < 1e-9


class TestJacobian:
    @pytest.mark.parametrize("kind", sorted(MODELS))
    def test_gradient_check(self, kind):
        model = MODELS[kind]
        u = random_profile_u(model, SphereGrid(10), np.random.default_rng(1), amplitude=0.05)
        gc = cmc.gradient_check(cmc.CmcProblem(model, 1.0, 10), u, directions=4)
        assert gc.max_relative_error < 1e-6

    def test_zonal_gradient_check(self):
        model = WarpingModel.schwarzschild(1.0, n=4)
        u = random_profile_u(model, ZonalGrid(3, 10), np.random.default_rng(2), amplitude=0.05)
        assert cmc.gradient_check(cmc.CmcProblem(model, 1.0, 10), u).max_relative_error < 1e-6

    def test_matrix_matches_apply(self, rng):
        g = SphereGrid(6)
        prob = cmc.CmcProblem(SCHW, 1.0, 6)
        u = _schwarzschild_start(6, 3)
        J = cmc.jacobian_matrix(prob, u)
        h = g.from_coeffs(np.where(g.mask, rng.standard_normal(g.mask.shape), 0.0))
        direct = g.pack(g.analyze(cmc.jacobian_apply(prob, u, h)))
        np.testing.assert_allclose(J @ g.pack(h.coeffs), direct, atol=1e-11)

    def test_space_form_round_sphere_is_degenerate(self):
        # boosts are free; the constant mode moves E and stays invertible
        prob = cmc.CmcProblem(MINK, 0.5, 6)
        s = np.linalg.svd(cmc.jacobian_matrix(prob, SphereGrid(6).constant(0.5)), compute_uv=False)
        assert np.sum(s < 1e-10 * s[0]) == 3


class TestNewton:
    @pytest.mark.parametrize("seed", range(4))
    def test_schwarzschild_converges_to_round_sphere(self, seed):
        E = 2 * float(SCHW.fsq(4.0)) / 16.0
        res = cmc.newton_solve(cmc.CmcProblem(SCHW, E, 10), _schwarzschild_start(10, seed))
        assert res.converged
        assert res.residual < 1e-10
        v = cmc.classify(res.u, SCHW)
        assert v.kind == "SphereOfSymmetry"
        assert v.r0 == pytest.approx(4.0, rel=1e-8)

    def test_perturbed_quarter_profile_returns_to_round(self):
        g = SphereGrid(12)
        u0 = 0.25 * (g.constant(1.0) + 0.05 * g.harmonic(2, 0))
        res = cmc.newton_solve(cmc.CmcProblem(SCHW, 1.0 / 16, 12), u0)
        assert res.converged
        np.testing.assert_allclose(res.u.values, 0.25, rtol=1e-10)
        assert res.u.low_mode_distance() < 1e-9

    def test_boosted_round_trip(self):
        g = SphereGrid(12)
        E = 0.25
        r0 = math.sqrt(2 / E)
        target = boost_sphere(MINK, g, r0, 0.5, axis=3).u
        u0 = target + 0.02 * g.harmonic(2, 0) / r0
        gauge = cmc.FixLowModes(tuple(g.pack(target.coeffs)[:4]))
        res = cmc.newton_solve(cmc.CmcProblem(MINK, E, 12, gauge), u0)
        assert res.converged
        assert np.max(np.abs(res.u.values - target.values)) < 1e-8 * np.max(target.values)

    def test_history_decreases(self):
        E = 2 * float(SCHW.fsq(4.0)) / 16.0
        res = cmc.newton_solve(cmc.CmcProblem(SCHW, E, 8), _schwarzschild_start(8, 9))
        assert res.residual_history[-1] < res.residual_history[0]
        assert res.iterations == len(res.residual_history) - 1

    def test_minkowski_fixed_low_modes_gives_boost(self):
        g = SphereGrid(10)
        base = boost_sphere(MINK, g, 2.0, 0.4, axis=3).u
        noise = random_profile_u(MINK, g, np.random.default_rng(4), r0=1.0, amplitude=0.003, min_degree=2)
        u0 = base + noise - g.constant(1.0)
        prob = cmc.CmcProblem(MINK, 0.5, 10, cmc.FixLowModes())
        res = cmc.newton_solve(prob, u0)
        assert res.converged
        v = cmc.classify(res.u, MINK)
        assert v.kind == "LowModeBoost"
        assert v.beta == pytest.approx(0.4, rel=1e-8)
        assert not v.violation

    def test_fixed_values_override_start(self):
        g = SphereGrid(8)
        a = 0.5 * math.cosh(0.2) * math.sqrt(4 * math.pi)
        vals = (a, 0.0, -0.5 * math.sinh(0.2) / 0.4886025119029199, 0.0)
        prob = cmc.CmcProblem(MINK, 0.5, 8, cmc.FixLowModes(values=vals))
        res = cmc.newton_solve(prob, g.constant(0.5))
        assert res.converged
        assert cmc.classify(res.u).beta == pytest.approx(0.2, rel=1e-8)

    def test_no_gauge_singular(self):
        prob = cmc.CmcProblem(MINK, 0.5, 6)
        with pytest.raises(NumericGuardError) as exc:
            cmc.newton_solve(prob, SphereGrid(6).constant(0.45))
        assert exc.value.guard == "singular_jacobian"

    def test_levenberg_marquardt(self):
        prob = cmc.CmcProblem(MINK, 0.5, 6, cmc.LevenbergMarquardt())
        res = cmc.newton_solve(prob, SphereGrid(6).constant(0.45))
        assert res.converged
        assert cmc.classify(res.u).kind == "SphereOfSymmetry"

    def test_resamples_initial_guess(self):
        E = 2 * float(SCHW.fsq(4.0)) / 16.0
        res = cmc.newton_solve(cmc.CmcProblem(SCHW, E, 10), _schwarzschild_start(6, 1))
        assert res.u.grid.L == 10 and res.converged

    def test_inadmissible_start(self):
        with pytest.raises(DomainError):
            cmc.newton_solve(cmc.CmcProblem(SCHW, 0.1, 6), SphereGrid(6).constant(0.9))

    def test_zonal_solve(self):
        model = WarpingModel.schwarzschild(1.0, n=4)
        # r = 3m is the photon sphere, where E(r) is stationary; stay clear of it
        r0 = 5.0
        E = 3 * float(model.fsq(r0)) / r0**2
        u0 = random_profile_u(model, ZonalGrid(3, 8), np.random.default_rng(5), r0=r0)
        res = cmc.newton_solve(cmc.CmcProblem(model, E, 8), u0)
        assert res.converged
        np.testing.assert_allclose(1.0 / res.u.values, r0, rtol=1e-8)


class TestClassify:
    def test_non_rigid(self, grid16):
        v = cmc.classify(grid16.constant(1.0) + 0.1 * grid16.harmonic(2, 0))
        assert v.kind == "NonRigid"
        assert v.distance == pytest.approx(0.0282, abs=5e-5)

    def test_constant_is_sphere_of_symmetry(self, grid16):
        v = cmc.classify(grid16.constant(0.25))
        assert v.kind == "SphereOfSymmetry"
        assert v.r0 == pytest.approx(4.0, rel=1e-13)

    def test_violation_flagged_outside_space_forms(self):
        u = boost_sphere(MINK, SphereGrid(6), 4.0, 0.3).u
        v = cmc.classify(u, SCHW)
        assert v.kind == "LowModeBoost" and v.violation
        assert v.as_dict()["verdict"] == "LowModeBoost"


class TestBochner:
    @given(seed=st.integers(0, 2**31 - 1))
    def test_identity(self, seed):
        u = random_profile_u(MINK, SphereGrid(8), np.random.default_rng(seed), amplitude=0.3)
        assert cmc.laplacian_bochner_identity(u).gap < 1e-8

    def test_low_mode_solution(self):
        X = SphereGrid(4).cartesian()
        u = SphereGrid(4).field(1.0 + 0.2 * X[2])
        assert cmc.laplacian_bochner_identity(u).gap < 1e-10

    def test_aliasing_guard(self):
        u = SphereGrid(8).constant(1.0)
        with pytest.raises(NumericGuardError) as exc:
            cmc.laplacian_bochner_identity(u, grid=SphereGrid(12))
        assert exc.value.guard == "aliasing"


class TestMaxPrinciple:
    def test_low_mode_solution(self):
        g = SphereGrid(8)
        X = g.cartesian()
        u = g.field(1.5 + 0.3 * X[0] - 0.4 * X[1])
        mp = cmc.max_principle_functional(u)
        assert mp.is_constant
        assert mp.constant == pytest.approx(3.0, rel=1e-12)
        assert mp.pointwise_gap < 1e-10

    def test_refuses_non_solutions(self):
        g = SphereGrid(8)
        u = g.constant(1.0) + 0.05 * g.harmonic(3, 2)
        with pytest.raises(NumericGuardError) as exc:
            cmc.max_principle_functional(u)
        assert exc.value.guard == "not_a_solution"


class TestMobius:
    @given(coeffs=st.lists(st.floats(-2, 2), min_size=8, max_size=8))
    def test_conformal_factor_is_low_mode(self, coeffs):
        a, b, c, d = (complex(coeffs[2 * i], coeffs[2 * i + 1]) for i in range(4))
        det = abs(a * d - b * c)
        size = max(abs(a), abs(b), abs(c), abs(d))
        if size == 0 or det < 0.1 * size**2:
            return
        rep = cmc.mobius_conformal_factor(a, b, c, d, SphereGrid(8))
        assert rep.low_mode_distance < 1e-9
        np.testing.assert_allclose(rep.fitted, rep.corrected, rtol=1e-9, atol=1e-10 * rep.fitted[0])
        res = cmc.liouville_residual(rep.u, 1.0)
        assert np.max(np.abs(res.values)) < 1e-8

    def test_identity_map(self):
        rep = cmc.mobius_conformal_factor(1, 0, 0, 1, SphereGrid(4))
        np.testing.assert_allclose(rep.u.values, 1.0, rtol=1e-14)
        np.testing.assert_allclose(rep.corrected, [1, 0, 0, 0], atol=1e-15)

    def test_printed_differs_by_half(self):
        p = cmc.mobius_coefficients(2, 1j, 0.5, 1, printed=True)
        e = cmc.mobius_coefficients(2, 1j, 0.5, 1)
        det = abs(2 * 1 - 1j * 0.5)
        np.testing.assert_allclose(p[[0, 3]] / det, 2 * e[[0, 3]])
        np.testing.assert_allclose(p[[1, 2]] / det, e[[1, 2]])

    def test_degenerate(self):
        with pytest.raises(DomainError):
            cmc.mobius_conformal_factor(1, 2, 2, 4, SphereGrid(4))


class TestObata:
    @pytest.mark.parametrize("d,L", [(2, 8), (3, 10), (4, 6)])
    def test_weighted_identity(self, d, L):
        rng = np.random.default_rng(d)
        grid = SphereGrid(L) if d == 2 else ZonalGrid(d, L)
        u = random_profile_u(WarpingModel.minkowski(d + 1), grid, rng, amplitude=0.4)
        # the weight u^(1-n) is not band-limited; refine the quadrature beyond 4L
        fine = SphereGrid(8 * L) if d == 2 else ZonalGrid(d, 8 * L)
        ob = cmc.obata_weighted_identity(u, d, grid=fine)
        assert ob.gap < 1e-7
        assert ob.traceless_term < 0

    def test_low_mode_traceless_term_vanishes(self):
        g = ZonalGrid(3, 4)
        u = g.from_coeffs([1.0, 0.3, 0, 0, 0])
        ob = cmc.obata_weighted_identity(u, 3)
        assert abs(ob.traceless_term) < 1e-12 * ob.scale

    def test_n2_scalar_curvature_is_twice_liouville(self):
        u = random_profile_u(MINK, SphereGrid(10), np.random.default_rng(0), amplitude=0.4)
        lv = cmc.conformal_scalar_curvature(u, 2).values
        np.testing.assert_allclose(lv, 2 * cmc.liouville_residual(u, 0.0).values, rtol=1e-10)

    def test_unsupported_base(self):
        with pytest.raises(ValueError, match="unsupported base"):
            cmc.conformal_scalar_curvature(SphereGrid(4).constant(1.0), 2, c=3.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cmc.obata_weighted_identity(SphereGrid(4).constant(1.0), 3)

    def test_needs_positive(self):
        g = SphereGrid(4)
        with pytest.raises(DomainError):
            cmc.obata_weighted_identity(g.field(g.cartesian()[2]), 2)
