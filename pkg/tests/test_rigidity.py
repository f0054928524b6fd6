import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nullcone import rigidity
from nullcone.errors import NumericGuardError
from nullcone.spacetime import WarpingModel
from nullcone.spectral import SphereGrid, ZonalGrid
from nullcone.surface import NullConeSurface, boost_sphere, random_profile_u, random_surface

from conftest import MODELS, random_field

EXPECTED_DIM = {"minkowski": 4, "schwarzschild": 1, "desitter": 4, "antidesitter": 4}


class TestLinearizedResidual:
    def test_constants_are_in_the_kernel(self, model, grid16):
        surf = random_surface(model, grid16, np.random.default_rng(0))
        T = rigidity.linearized_residual(surf, grid16.constant(1.0))
        assert np.max(np.abs(T)) < 1e-12

    @pytest.mark.parametrize("kind", ["minkowski", "desitter", "antidesitter"])
    def test_degree_one_in_space_form_kernel(self, kind, grid16):
        surf = random_surface(MODELS[kind], grid16, np.random.default_rng(1))
        X = grid16.field(grid16.cartesian())
        T = rigidity.linearized_residual(surf, X)
        scale = np.max(np.abs(rigidity.linearized_residual(surf, grid16.harmonic(2, 1))))
        assert np.max(np.abs(T)) < 1e-10 * scale

    def test_degree_one_not_in_schwarzschild_kernel(self, grid16):
        surf = NullConeSurface.round(MODELS["schwarzschild"], grid16)
        T = rigidity.linearized_residual(surf, grid16.field(grid16.cartesian()[2]))
        assert np.max(np.abs(T)) > 1e-3

    def test_batched_matches_single(self, grid16, rng):
        surf = random_surface(MODELS["desitter"], grid16, rng)
        u = random_field(grid16, rng, max_degree=6)
        batch = grid16.from_coeffs(np.stack([u.coeffs, 2 * u.coeffs]))
        Tb = rigidity.linearized_residual(surf, batch)
        T1 = rigidity.linearized_residual(surf, u)
        np.testing.assert_allclose(Tb[0], T1, atol=1e-12)
        np.testing.assert_allclose(Tb[1], 2 * T1, atol=1e-12)

    def test_ricci_coefficient(self, grid16):
        surf = NullConeSurface.round(MODELS["schwarzschild"], grid16, r0=5.0)
        np.testing.assert_allclose(rigidity.ricci_coefficient(surf), -3.0 / 5.0, rtol=1e-12)
        surf = NullConeSurface.round(MODELS["antidesitter"], grid16)
        assert np.max(np.abs(rigidity.ricci_coefficient(surf))) < 1e-14


class TestKernel:
    @pytest.mark.parametrize("kind", sorted(MODELS))
    def test_kernel_dimension(self, kind):
        surf = random_surface(MODELS[kind], SphereGrid(12), np.random.default_rng(2))
        ker = rigidity.kernel(rigidity.assemble(surf))
        assert ker.dimension == EXPECTED_DIM[kind]
        assert ker.gap > 1e4
        assert ker.constant_direction < 1e-10

    @pytest.mark.parametrize("kind", ["minkowski", "desitter", "antidesitter"])
    def test_space_form_kernel_is_low_mode(self, kind):
        surf = random_surface(MODELS[kind], SphereGrid(12), np.random.default_rng(3))
        ker = rigidity.kernel(rigidity.assemble(surf))
        assert np.max(ker.low_mode_distances) < 1e-6

    def test_boosted_sphere_kernel(self):
        surf = boost_sphere(MODELS["minkowski"], SphereGrid(10), 2.0, 0.6, axis=2)
        assert rigidity.kernel(rigidity.assemble(surf)).dimension == 4

    def test_assemble_on_larger_bandlimit(self):
        surf = random_surface(MODELS["minkowski"], SphereGrid(8), np.random.default_rng(4))
        op = rigidity.assemble(surf, L=12)
        assert op.bandlimit == 12
        assert op.matrix.shape[1] == 13**2

    def test_apply_matches_sample(self, rng):
        surf = random_surface(MODELS["antidesitter"], SphereGrid(8), rng)
        op = rigidity.assemble(surf)
        u = random_field(op.grid, rng)
        np.testing.assert_allclose(op.apply(u.coeffs), op.sample(u), atol=1e-11)

    def test_memory_guard(self):
        surf = NullConeSurface.round(MODELS["minkowski"], SphereGrid(4))
        with pytest.raises(NumericGuardError) as exc:
            rigidity.assemble(surf, L=65)
        assert exc.value.guard == "memory"

    def test_ill_separated_spectrum_warns(self):
        surf = random_surface(MODELS["schwarzschild"], SphereGrid(6), np.random.default_rng(5))
        op = rigidity.assemble(surf, threshold=0.5)
        with pytest.warns(RuntimeWarning, match="ill-separated"):
            rigidity.kernel(op)

    def test_as_dict(self):
        surf = NullConeSurface.round(MODELS["schwarzschild"], SphereGrid(6))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            d = rigidity.kernel(rigidity.assemble(surf)).as_dict()
        assert d["dimension"] == 1
        assert len(d["singular_values"]) == 49

    def test_zonal_kernel(self):
        model = WarpingModel.minkowski(4)
        u = random_profile_u(model, ZonalGrid(3, 10), np.random.default_rng(6))
        ker = rigidity.kernel(rigidity.assemble(NullConeSurface(model, u)))
        # zonal restriction keeps the constant and the polar degree-one mode
        assert ker.dimension == 2


class TestQuadraticForm:
    @given(seed=st.integers(0, 2**31 - 1))
    def test_identity_schwarzschild(self, seed):
        r = np.random.default_rng(seed)
        g = SphereGrid(12)
        surf = random_surface(MODELS["schwarzschild"], g, r)
        u = random_field(g, r, max_degree=6)
        assert rigidity.quadratic_form_identity(surf, u).relative_gap < 1e-8

    @pytest.mark.parametrize("kind", sorted(MODELS))
    def test_identity_each_model(self, kind, grid16, rng):
        surf = random_surface(MODELS[kind], grid16, rng)
        u = random_field(grid16, rng, max_degree=8)
        q = rigidity.quadratic_form_identity(surf, u)
        assert q.relative_gap < 1e-8
        assert q.hessian_term > 0

    def test_identity_zonal(self, rng):
        model = WarpingModel.schwarzschild(1.0, n=5)
        grid = ZonalGrid(4, 12)
        surf = NullConeSurface(model, random_profile_u(model, grid, rng))
        u = grid.from_coeffs(np.r_[rng.standard_normal(7), np.zeros(6)])
        assert rigidity.quadratic_form_identity(surf, u).relative_gap < 1e-8

    def test_space_form_sign(self, grid16, rng):
        surf = random_surface(MODELS["minkowski"], grid16, rng)
        q = rigidity.quadratic_form_identity(surf, random_field(grid16, rng, max_degree=8))
        assert q.lhs < 0
        assert abs(q.ricci_term) < 1e-12 * abs(q.lhs)

    def test_aliasing_guard(self):
        g = SphereGrid(12, n_theta=14, n_phi=30)
        surf = NullConeSurface.round(MODELS["minkowski"], g)
        with pytest.raises(NumericGuardError) as exc:
            rigidity.quadratic_form_identity(surf, g.harmonic(2, 0))
        assert exc.value.guard == "aliasing"

    def test_zero_variation(self, grid16):
        surf = NullConeSurface.round(MODELS["minkowski"], grid16)
        assert rigidity.quadratic_form_identity(surf, grid16.constant(1.0)).relative_gap == 0.0
