import json

import numpy as np
import pytest

from nullcone import cli, io
from nullcone.samples import sample_surfaces
from nullcone.spacetime import WarpingModel
from nullcone.spectral import SphereGrid, ZonalGrid
from nullcone.surface import NullConeSurface, random_surface

from conftest import MODELS


class TestCoefficientFiles:
    def test_sphere_round_trip_is_exact(self, tmp_path, rng):
        g = SphereGrid(8)
        u = g.from_coeffs(np.where(g.mask, rng.standard_normal(g.mask.shape), 0.0))
        io.save_coefficients(tmp_path / "u.json", u)
        v = io.load_coefficients(tmp_path / "u.json")
        np.testing.assert_array_equal(v.coeffs, u.coeffs)

    def test_zonal_round_trip(self, tmp_path, rng):
        u = ZonalGrid(3, 6).from_coeffs(rng.standard_normal(7))
        io.save_coefficients(tmp_path / "z.json", u)
        v = io.load_coefficients(tmp_path / "z.json")
        assert v.grid.dim == 3
        np.testing.assert_array_equal(v.coeffs, u.coeffs)

    def test_packed_order(self):
        g = SphereGrid(2)
        recs = io.coefficient_records(g.harmonic(1, -1))
        assert [r[:2] for r in recs[:4]] == [[0, 0], [1, -1], [1, 0], [1, 1]]
        assert recs[1][2] == 1.0

    @pytest.mark.parametrize("records", [[[3, 0, 1.0]], [[1, 2, 1.0]], [[0, 0, "x"]], [[0, 0, float("nan")]],
                                         [[0, 0]]])
    def test_bad_records(self, records):
        with pytest.raises(io.InputError):
            io.field_from_records(2, records)

    def test_missing_file(self, tmp_path):
        with pytest.raises(io.InputError, match="no such file"):
            io.load_coefficients(tmp_path / "absent.json")

    def test_bad_json(self, tmp_path):
        (tmp_path / "bad.json").write_text("{")
        with pytest.raises(io.InputError, match="not valid JSON"):
            io.load_coefficients(tmp_path / "bad.json")


class TestSurfaceFiles:
    def test_round_trip(self, tmp_path, model):
        s = random_surface(model, SphereGrid(8), np.random.default_rng(0), w0=0.25)
        io.save_surface(tmp_path / "s.json", s)
        t = io.load_surface(tmp_path / "s.json")
        assert t.model.descriptor() == model.descriptor()
        assert t.w0 == 0.25
        np.testing.assert_array_equal(t.u.coeffs, s.u.coeffs)

    def test_zonal_round_trip(self, tmp_path):
        model = WarpingModel.anti_de_sitter(2.0, n=5)
        s = NullConeSurface.round(model, ZonalGrid(4, 4), r0=1.0)
        io.save_surface(tmp_path / "s.json", s)
        assert io.load_surface(tmp_path / "s.json").is_zonal

    def test_document_keys(self):
        doc = io.surface_document(NullConeSurface.round(MODELS["minkowski"], SphereGrid(2)))
        assert set(doc) == {"model", "w0", "bandlimit", "u_coeffs", "represents"}
        assert doc["represents"] == "u"

    def test_refuses_r_profiles(self):
        doc = io.surface_document(NullConeSurface.round(MODELS["minkowski"], SphereGrid(2)))
        doc["represents"] = "r"
        with pytest.raises(io.InputError):
            io.surface_from_document(doc)

    def test_bad_model(self):
        with pytest.raises(io.InputError):
            io.model_from_descriptor({"kind": "kerr"})


class TestFixtures:
    def test_index_lists_all_files(self):
        idx = io.fixture_index()
        assert len(idx) == 11
        assert "schwarzschild_boosted" not in idx

    @pytest.mark.parametrize("name", sorted(io.fixture_index()))
    def test_fixture_matches_generator(self, name):
        surf, expected = sample_surfaces()[name]
        loaded = io.load_fixture(name)
        np.testing.assert_array_equal(loaded.u.coeffs, surf.u.coeffs)
        assert io.fixture_index()[name]["verdict"] == expected["verdict"]

    def test_unknown_fixture(self):
        with pytest.raises(io.InputError, match="unknown fixture"):
            io.load_fixture("kerr_round")


class TestRunReport:
    def test_sections_are_append_only(self):
        rep = io.RunReport("x", {}, {})
        rep.add("a", {"v": np.float64(1.0)})
        with pytest.raises(KeyError):
            rep.add("a", {})

    def test_numeric_part_drops_timings(self):
        rep = io.RunReport("x", {}, {})
        rep.timings["wall_seconds"] = 1.0
        assert "timings" not in rep.numeric_part()
        assert "timings" in rep.as_dict()

    def test_jsonable(self):
        out = io.jsonable({"a": np.arange(2), "b": 1 + 2j, "c": np.bool_(True), "d": float("inf")})
        assert out == {"a": [0, 1], "b": {"re": 1.0, "im": 2.0}, "c": True, "d": "inf"}
        json.dumps(out)


def _run(tmp_path, *argv, name="report.json"):
    path = tmp_path / name
    code = cli.run(list(argv) + ["--report", str(path)])
    return code, json.loads(path.read_text())


class TestCli:
    def test_unknown_command(self, capsys):
        assert cli.run(["frobnicate"]) == cli.EXIT_INPUT

    def test_no_command(self):
        assert cli.run([]) == cli.EXIT_INPUT

    def test_bad_tolerance(self):
        assert cli.run(["ncc-check", "--tol", "nonsense=1"]) == cli.EXIT_INPUT

    @pytest.mark.parametrize("kind", sorted(MODELS))
    def test_ncc_check(self, tmp_path, kind):
        code, rep = _run(tmp_path, "ncc-check", "--model", kind)
        assert code == 0
        assert rep["results"]["ncc"]["holds"]

    def test_ncc_check_explicit_range(self, tmp_path):
        code, rep = _run(tmp_path, "ncc-check", "--model", "schwarzschild", "--mass", "1", "--r-min", "2.1",
                         "--r-max", "50")
        assert code == 0
        assert rep["results"]["ncc"]["min_flux"] >= 0
        assert rep["tolerances"]["ncc"] == 1e-12

    def test_tolerance_override_recorded(self, tmp_path):
        code, rep = _run(tmp_path, "ncc-check", "--tol", "ncc=1e-9")
        assert code == 0
        assert rep["tolerances"]["ncc"] == 1e-9

    def test_custom_descriptor_is_an_input_error(self, tmp_path):
        desc = tmp_path / "m.json"
        desc.write_text(json.dumps({"kind": "custom", "n": 3}))
        assert cli.run(["ncc-check", "--model", str(desc)]) == cli.EXIT_INPUT

    def test_ncc_failure_is_a_guard(self, tmp_path, monkeypatch):
        bad = WarpingModel.custom(lambda r: 1 - r**3, lambda r: -3 * r**2, lambda r: -6 * r, 0.0, 1.0)
        monkeypatch.setattr(cli, "_model", lambda args, report=None: bad)
        monkeypatch.setattr(WarpingModel, "descriptor", lambda self: {"kind": self.kind})
        code, rep = _run(tmp_path, "ncc-check", "--r-min", "0.1", "--r-max", "0.9")
        assert code == cli.EXIT_GUARD
        assert rep["status"]["guard"] == "ncc"

    def test_surface_report_with_plots(self, tmp_path):
        code, rep = _run(tmp_path, "surface-report", "--fixture", "minkowski_boosted", "--plots",
                         str(tmp_path / "plots"))
        assert code == 0
        assert rep["results"]["surface"]["classification"]["verdict"] == "LowModeBoost"
        assert (tmp_path / "plots" / "profile.svg").exists()
        assert (tmp_path / "plots" / "profile.csv").read_text().startswith("theta,")

    def test_surface_file_is_digested(self, tmp_path):
        path = tmp_path / "s.json"
        io.save_surface(path, NullConeSurface.round(MODELS["schwarzschild"], SphereGrid(6)))
        code, rep = _run(tmp_path, "surface-report", "--surface", str(path))
        assert code == 0
        assert rep["inputs"][str(path)] == io.digest(path)

    def test_surface_args_required(self):
        assert cli.run(["surface-report"]) == cli.EXIT_INPUT

    @pytest.mark.parametrize("fixture,dim", [("schwarzschild_round", 1), ("minkowski_random", 4),
                                             ("antidesitter_random", 4)])
    def test_rigidity_kernel(self, tmp_path, fixture, dim):
        code, rep = _run(tmp_path, "rigidity-kernel", "--fixture", fixture, "--bandlimit", "10")
        assert code == 0
        assert rep["results"]["kernel"]["dimension"] == dim

    def test_solve_cmc_schwarzschild(self, tmp_path):
        code, rep = _run(tmp_path, "solve-cmc", "--model", "schwarzschild", "--E", "0.05",
                         "--bandlimit", "8", "--noise", "0.01")
        assert code == 0
        assert rep["results"]["classification"]["verdict"] == "SphereOfSymmetry"

    def test_solve_cmc_gauss_target(self, tmp_path):
        code, rep = _run(tmp_path, "solve-cmc", "--E", "0.25", "--target", "gauss", "--bandlimit", "8")
        assert code == 0
        assert rep["results"]["problem"]["E_hsq"] == pytest.approx(0.5)
        assert rep["results"]["classification"]["verdict"] in ("LowModeBoost", "SphereOfSymmetry")

    def test_solve_cmc_without_round_solution(self):
        assert cli.run(["solve-cmc", "--model", "antidesitter", "--E", "1.0"]) == cli.EXIT_INPUT

    def test_solve_cmc_determinism(self, tmp_path):
        args = ("solve-cmc", "--model", "antidesitter", "--E", "3.0", "--bandlimit", "8", "--seed", "3")
        c1, r1 = _run(tmp_path, *args, name="a.json")
        c2, r2 = _run(tmp_path, *args, name="b.json")
        assert c1 == c2 == 0
        r1.pop("timings"), r2.pop("timings")
        r1["arguments"].pop("report"), r2["arguments"].pop("report")
        assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)

    def test_solve_cmc_plots(self, tmp_path):
        code, _ = _run(tmp_path, "solve-cmc", "--model", "schwarzschild", "--E", "0.05", "--bandlimit", "6",
                       "--plots", str(tmp_path / "p"))
        assert code == 0
        names = {p.name for p in (tmp_path / "p").iterdir()}
        assert {"residual_history.svg", "residual_history.csv", "solution_profile.svg"} <= names

    @pytest.mark.parametrize("suite", ["frames", "bochner", "obata"])
    def test_verify_identities(self, tmp_path, suite, capsys):
        code, rep = _run(tmp_path, "verify-identities", "--suite", suite)
        assert code == 0
        assert all(row["pass"] for row in rep["results"][suite])
        assert "PASS" in capsys.readouterr().out

    def test_verify_identities_empty_profiles(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert cli.run(["verify-identities", "--suite", "cnnc", "--profiles", str(tmp_path / "empty")]) == 1

    def test_impossible_tolerance_fails_with_guard(self, tmp_path):
        code, rep = _run(tmp_path, "verify-identities", "--suite", "frames", "--tol", "frames=1e-30")
        assert code == cli.EXIT_GUARD
        assert rep["status"]["guard"] == "identity"

    @pytest.mark.parametrize("chart", ["static", "ef"])
    def test_curvature_oracle(self, tmp_path, chart, capsys):
        code, rep = _run(tmp_path, "curvature-oracle", "--model", "schwarzschild", "--points", "3",
                         "--chart", chart)
        assert code == 0
        assert rep["results"]["oracle"]["pass"]
        assert rep["errata"]
        assert "erratum" in capsys.readouterr().out

    def test_mobius(self, tmp_path):
        code, rep = _run(tmp_path, "mobius", "--a", "1+1j", "--b", "0.5", "--c=-0.3j", "--d", "2")
        assert code == 0
        cf = rep["results"]["conformal_factor"]
        assert cf["low_mode_distance"] < 1e-9
        assert cf["lap_plus_2_spread"] < 1e-6

    def test_mobius_degenerate(self):
        assert cli.run(["mobius", "--a", "1", "--b", "2", "--c", "2", "--d", "4"]) == cli.EXIT_INPUT

    def test_boost_sphere(self, tmp_path):
        out = tmp_path / "b.json"
        code, rep = _run(tmp_path, "boost-sphere", "--beta", "0.4", "--axis", "0", "1", "0", "--out", str(out))
        assert code == 0
        assert rep["results"]["boosted_sphere"]["max_hsq_deviation"] < 1e-8
        assert io.load_surface(out).grid.L == 32

    def test_boost_sphere_rejects_schwarzschild(self):
        assert cli.run(["boost-sphere", "--model", "schwarzschild"]) == cli.EXIT_INPUT

    def test_thread_limit(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NULLCONE_THREADS", "1")
        assert cli.run(["ncc-check"]) == 0

    def test_main_exits(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["ncc-check"])
        assert exc.value.code == 0
