"""Deterministic sample surfaces (the bundled fixtures are generated from here)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .io import save_surface
from .spacetime import WarpingModel
from .spectral import SphereGrid
from .surface import NullConeSurface, boost_sphere, default_radius, random_surface

FIXTURE_BANDLIMIT = 24

SAMPLE_MODELS = {
    "minkowski": WarpingModel.minkowski(),
    "schwarzschild": WarpingModel.schwarzschild(1.0),
    "desitter": WarpingModel.de_sitter(1.0),
    "antidesitter": WarpingModel.anti_de_sitter(1.0),
}

# Boost rapidities chosen so the boosted sphere stays inside each chart.
SAMPLE_BOOSTS = {"minkowski": 0.5, "desitter": 0.3, "antidesitter": 0.5}


def sample_surfaces(L: int = FIXTURE_BANDLIMIT, seed: int = 2024) -> dict:
    """``{name: (surface, expected)}`` for every bundled sample.

    ``expected`` holds the kernel dimension of the linearized operator and
    the classification verdict of the profile.
    """
    grid = SphereGrid(L)
    out = {}
    for k, (kind, model) in enumerate(SAMPLE_MODELS.items()):
        kdim = 4 if model.is_space_form else 1
        out[f"{kind}_round"] = (NullConeSurface.round(model, grid),
                                {"kernel_dimension": kdim, "verdict": "SphereOfSymmetry",
                                 "constant_hsq": True})
        if kind in SAMPLE_BOOSTS:
            surf = boost_sphere(model, grid, default_radius(model), SAMPLE_BOOSTS[kind], axis=(1.0, 2.0, 2.0))
            out[f"{kind}_boosted"] = (surf, {"kernel_dimension": kdim, "verdict": "LowModeBoost",
                                             "constant_hsq": True})
        rng = np.random.default_rng(seed + k)
        out[f"{kind}_random"] = (random_surface(model, grid, rng, min_degree=2),
                                 {"kernel_dimension": kdim, "verdict": "NonRigid",
                                  "constant_hsq": False})
    return out


def write_fixtures(directory, L: int = FIXTURE_BANDLIMIT, seed: int = 2024) -> dict:
    """Write every sample as a surface file plus ``index.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    index = {}
    for name, (surf, expected) in sample_surfaces(L, seed).items():
        fname = f"{name}.json"
        save_surface(directory / fname, surf)
        index[name] = {"file": fname, **expected}
    (directory / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    return index
