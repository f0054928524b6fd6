"""File formats: model descriptors, coefficient files, surface profiles, run reports.

Everything is JSON.  Floats go through ``repr`` (shortest round-trip form),
so coefficients survive a save/load cycle bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .spacetime import WarpingModel
from .spectral import SphereField, SphereGrid, ZonalField, ZonalGrid
from .surface import NullConeSurface

FIXTURE_PACKAGE = "nullcone.fixtures"


class InputError(ValueError):
    """Malformed or inconsistent input file."""


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------

def coefficient_records(u) -> list:
    """``[[l, m, value], ...]`` in packed order (zonal fields use ``m = 0``)."""
    grid = u.grid
    vec = grid.pack(u.coeffs)
    if isinstance(grid, SphereGrid):
        lm = grid.lm_list()
    else:
        lm = [(l, 0) for l in range(grid.L + 1)]
    return [[int(l), int(m), float(v)] for (l, m), v in zip(lm, vec)]


def field_from_records(L: int, records, dim: int = 2):
    """Inverse of :func:`coefficient_records` on a default grid of bandlimit ``L``."""
    L = int(L)
    if L < 0:
        raise InputError("bandlimit must be non-negative")
    if dim == 2:
        grid = SphereGrid(L)
        C = np.zeros(grid.mask.shape)
        for rec in records:
            l, m, val = _record(rec)
            if l > L or abs(m) > l:
                raise InputError(f"coefficient ({l}, {m}) outside bandlimit {L}")
            C[l, m + L] = val
        return SphereField(grid, coeffs=C)
    grid = ZonalGrid(dim, L)
    c = np.zeros(L + 1)
    for rec in records:
        l, m, val = _record(rec)
        if l > L or m != 0:
            raise InputError(f"zonal coefficient ({l}, {m}) invalid for bandlimit {L}")
        c[l] = val
    return ZonalField(grid, coeffs=c)


def _record(rec):
    try:
        l, m, val = rec
        l, m, val = int(l), int(m), float(val)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad coefficient record {rec!r}") from exc
    if not math.isfinite(val):
        raise InputError(f"non-finite coefficient {rec!r}")
    return l, m, val


def save_coefficients(path, u) -> None:
    doc = {"bandlimit": u.grid.L, "coeffs": coefficient_records(u)}
    if isinstance(u, ZonalField):
        doc["sphere_dim"] = u.grid.dim
    _write_json(path, doc)


def load_coefficients(path):
    doc = _read_json(path)
    try:
        return field_from_records(doc["bandlimit"], doc["coeffs"], int(doc.get("sphere_dim", 2)))
    except KeyError as exc:
        raise InputError(f"{path}: missing key {exc}") from exc


# ---------------------------------------------------------------------------
# Models and surfaces
# ---------------------------------------------------------------------------

def model_from_descriptor(desc: dict) -> WarpingModel:
    try:
        return WarpingModel.from_descriptor(desc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid model descriptor {desc!r}: {exc}") from exc


def load_model(path) -> WarpingModel:
    return model_from_descriptor(_read_json(path))


def surface_document(surface: NullConeSurface) -> dict:
    return {
        "model": surface.model.descriptor(),
        "w0": surface.w0,
        "bandlimit": surface.grid.L,
        "u_coeffs": coefficient_records(surface.u),
        "represents": "u",
    }


def save_surface(path, surface: NullConeSurface) -> None:
    _write_json(path, surface_document(surface))


def surface_from_document(doc: dict) -> NullConeSurface:
    """Build and validate a surface; ``DomainError`` if ``r`` is not admissible on the grid."""
    try:
        if doc.get("represents", "u") != "u":
            raise InputError("only profiles storing u = 1/r are supported")
        model = model_from_descriptor(doc["model"])
        u = field_from_records(doc["bandlimit"], doc["u_coeffs"], model.n - 1)
        return NullConeSurface(model, u, float(doc.get("w0", 0.0)))
    except KeyError as exc:
        raise InputError(f"surface file missing key {exc}") from exc


def load_surface(path) -> NullConeSurface:
    return surface_from_document(_read_json(path))


# ---------------------------------------------------------------------------
# Bundled fixtures
# ---------------------------------------------------------------------------

def fixture_index() -> dict:
    """Expected verdicts keyed by fixture name."""
    return json.loads(resources.files(FIXTURE_PACKAGE).joinpath("index.json").read_text())


def load_fixture(name: str) -> NullConeSurface:
    index = fixture_index()
    if name not in index:
        raise InputError(f"unknown fixture {name!r}; available: {sorted(index)}")
    text = resources.files(FIXTURE_PACKAGE).joinpath(index[name]["file"]).read_text()
    return surface_from_document(json.loads(text))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


@dataclass
class RunReport:
    """Structured record of one CLI invocation.

    Sections are append-only: adding an existing section name raises.
    Wall-clock timings are kept apart so the numeric sections of two runs with
    the same inputs and seed compare byte for byte.
    """

    command: str
    arguments: dict
    tolerances: dict
    inputs: dict = field(default_factory=dict)
    model: dict | None = None
    bandlimit: int | None = None
    sections: dict = field(default_factory=dict)
    errata: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    status: dict = field(default_factory=dict)

    def add(self, name: str, payload) -> None:
        if name in self.sections:
            raise KeyError(f"report section {name!r} already written")
        self.sections[name] = jsonable(payload)

    def add_input(self, path) -> None:
        self.inputs[str(path)] = digest(path)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "arguments": jsonable(self.arguments),
            "inputs": self.inputs,
            "model": self.model,
            "bandlimit": self.bandlimit,
            "tolerances": jsonable(self.tolerances),
            "results": self.sections,
            "errata": jsonable(self.errata),
            "status": jsonable(self.status),
            "timings": jsonable(self.timings),
        }

    def numeric_part(self) -> dict:
        d = self.as_dict()
        d.pop("timings")
        return d

    def write(self, path) -> None:
        _write_json(path, self.as_dict())


def _write_json(path, doc) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(doc), indent=2) + "\n")


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
