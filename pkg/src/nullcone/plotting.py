"""Optional SVG figures with CSV companions for CLI reports."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .spectral import SphereGrid  # noqa: E402

# Fixed salt and no timestamp keep the SVG output reproducible.
_SVG_META = {"Date": None}
matplotlib.rcParams["svg.hashsalt"] = "nullcone"


def _write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def colatitude_profile(u, out_dir, stem: str = "profile", samples: int = 181) -> list:
    """``r = 1/u`` against colatitude along the meridians ``phi = 0, pi/2, pi``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # Open interval: the pole rows of the derivative recurrences are singular.
    theta = np.linspace(0.0, np.pi, samples + 2)[1:-1]
    if isinstance(u.grid, SphereGrid):
        phis = (0.0, 0.5 * np.pi, np.pi)
        curves = [1.0 / u.evaluate(theta, np.full_like(theta, p)) for p in phis]
        labels = [f"phi={p:.4f}" for p in phis]
    else:
        curves = [1.0 / u.evaluate(np.cos(theta))]
        labels = ["zonal"]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for c, lab in zip(curves, labels):
        ax.plot(theta, c, label=lab)
    ax.set_xlabel("colatitude")
    ax.set_ylabel("r")
    ax.legend()
    fig.tight_layout()
    rows = zip(theta, *curves)
    return [_save(fig, out / f"{stem}.svg"),
            _write_csv(out / f"{stem}.csv", ["theta"] + labels, rows)]


def singular_values(s, threshold: float, out_dir, stem: str = "singular_values") -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s = np.asarray(s, dtype=float)
    idx = np.arange(s.size)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(idx, np.maximum(s, 1e-300), ".", ms=3)
    ax.axhline(threshold * s[0], color="k", lw=0.8, ls="--", label="kernel threshold")
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.legend()
    fig.tight_layout()
    return [_save(fig, out / f"{stem}.svg"),
            _write_csv(out / f"{stem}.csv", ["index", "sigma"], zip(idx, s))]


def residual_history(history, out_dir, stem: str = "residual_history") -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h = np.asarray(history, dtype=float)
    it = np.arange(h.size)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(it, np.maximum(h, 1e-300), "o-", ms=3)
    ax.set_xlabel("Newton iteration")
    ax.set_ylabel("max |residual|")
    fig.tight_layout()
    return [_save(fig, out / f"{stem}.svg"),
            _write_csv(out / f"{stem}.csv", ["iteration", "max_residual"], zip(it, h))]


def ncc_sweep(r, flux, deficit, out_dir, stem: str = "ncc_sweep") -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(5, 5), sharex=True)
    a1.plot(r, flux)
    a1.set_ylabel("flux")
    a2.plot(r, deficit)
    a2.set_ylabel("deficit")
    a2.set_xlabel("r")
    fig.tight_layout()
    return [_save(fig, out / f"{stem}.svg"),
            _write_csv(out / f"{stem}.csv", ["r", "flux", "deficit"], zip(r, flux, deficit))]
