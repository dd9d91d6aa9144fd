"""Render loggas run outputs into figures.

Consumes only the documented external formats: a run's ``manifest.json``
(whose content hashes are verified before anything is read) and the CSV
files it references.  Reference curves -- semicircle, Wigner surmise,
Poisson number-variance baseline, unit-slope MSD guide, the 1e-12 guide of
the frozen-tail table -- are recomputed here from closed forms, so the
overlays cross-check the primary pipeline rather than echoing it.

Rendering is read-only and, with the pinned style below, reproducible to
the byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURE_KINDS = ("density", "spacing", "msd", "ifc", "variance", "kernel-surface")

STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "loggas-report",
}


class ReportError(RuntimeError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    manifest: Path
    kind: str
    out: Path

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ReportError(f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")


# ---------------------------------------------------------------------------
# manifest access (standalone re-implementation: this package depends only
# on the documented file formats)
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def load_manifest(path: Path) -> tuple[dict, Path]:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    if not path.exists():
        raise ReportError(f"no manifest at {path}")
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    base = path.parent
    for entry in manifest.get("outputs", []):
        p = base / entry["path"]
        if not p.exists():
            raise ReportError(f"manifest references missing file {p}")
        if _sha256(p) != entry["sha256"]:
            raise ReportError(f"content hash mismatch for {p}")
    return manifest, base


def read_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = [[] for _ in header]
        for row in reader:
            for c, v in zip(cols, row):
                c.append(v)
    out = {}
    for name, col in zip(header, cols):
        try:
            out[name] = np.asarray([float(v) for v in col])
        except ValueError:
            out[name] = np.asarray(col, dtype=object)
    return out


def _csv_named(manifest: dict, base: Path, suffix: str) -> dict[str, np.ndarray]:
    hits = [e["path"] for e in manifest["outputs"] if e["path"].endswith(suffix)]
    if len(hits) != 1:
        raise ReportError(f"expected exactly one *{suffix} in the manifest, found {hits}")
    return read_csv(base / hits[0])


# ---------------------------------------------------------------------------
# closed-form reference curves (independent recomputation)
# ---------------------------------------------------------------------------

def semicircle_density(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) < 2.0,
                    np.sqrt(np.clip(4.0 - u**2, 0.0, None)) / (2.0 * math.pi), 0.0)


def surmise_density(s: np.ndarray) -> np.ndarray:
    return (32.0 / math.pi**2) * s**2 * np.exp(-4.0 * s**2 / math.pi)


SEMICIRCLE_MODE = 0.0
SURMISE_MODE = math.sqrt(math.pi) / 2.0    # argmax of the beta = 2 surmise


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _caption(fig, manifest: dict, note: str):
    fig.text(0.01, 0.01,
             f"source manifest {manifest['config_hash'][:12]}  |  {note}",
             fontsize=7, color="0.35")


def _histogram_overlay_check(edges_lo, edges_hi, density, ref_mode) -> dict:
    """Primary histogram mode vs recomputed overlay mode, within bin width.

    Flat-topped references (the semicircle) leave the argmax bin ambiguous
    among statistically tied neighbours, so the mode is read off as the
    centroid of the near-maximal bins (within 2% of the peak).
    """
    centers = 0.5 * (edges_lo + edges_hi)
    width = float(np.max(edges_hi - edges_lo))
    top = density >= 0.98 * density.max()
    data_mode = float(np.average(centers[top], weights=density[top]))
    return {
        "data_mode": data_mode,
        "overlay_mode": float(ref_mode),
        "bin_width": width,
        "consistent": abs(data_mode - ref_mode) <= width,
    }


def render(spec: FigureSpec) -> tuple[Path, dict]:
    """Write the figure; returns (path, info) with any overlay check."""
    manifest, base = load_manifest(spec.manifest)
    info: dict = {"kind": spec.kind}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if spec.kind == "density":
            d = _csv_named(manifest, base, "density.csv")
            centers = 0.5 * (d["bin_lo"] + d["bin_hi"])
            ax.bar(centers, d["density"], width=(d["bin_hi"] - d["bin_lo"]),
                   color="#9ecae1", edgecolor="none", label="sampled spectrum")
            grid = np.linspace(-2.2, 2.2, 400)
            ax.plot(grid, semicircle_density(grid), "k-", lw=1.5, label="semicircle")
            ax.set_xlabel("rescaled eigenvalue")
            ax.set_ylabel("density")
            ax.legend()
            info["overlay"] = _histogram_overlay_check(
                d["bin_lo"], d["bin_hi"], d["density"], SEMICIRCLE_MODE)
        elif spec.kind == "spacing":
            d = _csv_named(manifest, base, "spacing.csv")
            centers = 0.5 * (d["bin_lo"] + d["bin_hi"])
            ax.bar(centers, d["density"], width=(d["bin_hi"] - d["bin_lo"]),
                   color="#a1d99b", edgecolor="none", label="unfolded spacings")
            grid = np.linspace(0.0, 4.0, 400)
            ax.plot(grid, surmise_density(grid), "k-", lw=1.5, label="Wigner surmise (beta = 2)")
            ax.set_xlabel("spacing s")
            ax.set_ylabel("density")
            ax.legend()
            info["overlay"] = _histogram_overlay_check(
                d["bin_lo"], d["bin_hi"], d["density"], SURMISE_MODE)
        elif spec.kind == "msd":
            d = _csv_named(manifest, base, "msd.csv")
            ax.loglog(d["lag"], d["msd"], "o-", ms=3, label="tagged particle")
            guide = d["msd"][0] / d["lag"][0] * d["lag"]
            ax.loglog(d["lag"], guide, "k--", lw=1, label="slope-1 guide")
            slope = np.polyfit(np.log(d["lag"]), np.log(d["msd"]), 1)[0]
            info["fitted_slope"] = float(slope)
            ax.set_xlabel("lag")
            ax.set_ylabel("mean squared displacement")
            ax.set_title(f"fitted exponent {slope:.3f}")
            ax.legend()
        elif spec.kind == "ifc":
            d = _csv_named(manifest, base, "ifc.csv")
            ms = d["m"].astype(int)
            x = np.arange(ms.size)
            dev = np.maximum(d["max_dev"], 1e-18)
            pdev = np.maximum(np.nan_to_num(d["perturbed_dev"], nan=0.0), 1e-18)
            ax.bar(x - 0.2, dev, width=0.4, label="frozen tail", color="#3182bd")
            ax.bar(x + 0.2, pdev, width=0.4,
                   label=f"tail +{d['epsilon'][0]:.0e}", color="#fd8d3c")
            ax.axhline(1e-12, color="k", ls="--", lw=1, label="1e-12 guide")
            ax.set_yscale("log")
            ax.set_ylim(1e-18, max(1e-6, float(pdev.max()) * 10))
            ax.set_xticks(x, [str(m) for m in ms])
            ax.set_xlabel("head size m")
            ax.set_ylabel("max |head re-solve - reference|")
            ax.legend()
            info["max_dev"] = float(d["max_dev"].max())
        elif spec.kind == "variance":
            d = _csv_named(manifest, base, "variance.csv")
            ax.loglog(d["radius"], d["variance"], "o-", label="number variance")
            ax.loglog(d["radius"], d["radius"] ** 2, "k--", lw=1,
                      label="Poisson baseline R^2")
            slope = np.polyfit(np.log(d["radius"]), np.log(d["variance"]), 1)[0]
            info["fitted_slope"] = float(slope)
            ax.set_xlabel("disk radius R")
            ax.set_ylabel("Var N(R)")
            ax.set_title(f"growth exponent {slope:.3f}")
            ax.legend()
        else:  # kernel-surface
            d = _csv_named(manifest, base, "kernel.csv")
            xs = np.unique(d["x"])
            ys = np.unique(d["y"])
            grid = np.full((xs.size, ys.size), np.nan)
            xi = np.searchsorted(xs, d["x"])
            yi = np.searchsorted(ys, d["y"])
            grid[xi, yi] = d["value"]
            pc = ax.pcolormesh(ys, xs, grid, shading="nearest", cmap="RdBu_r")
            fig.colorbar(pc, ax=ax, label="K(s,x;t,y)")
            ax.set_xlabel("y")
            ax.set_ylabel("x")
            ax.set_title(f"s = {d['s'][0]:g}, t = {d['t'][0]:g}")
            info["points"] = int(d["value"].size)
        _caption(fig, manifest, spec.kind)
        spec.out.parent.mkdir(parents=True, exist_ok=True)
        save_kw = {}
        if spec.out.suffix == ".svg":
            save_kw["metadata"] = {"Date": None}
        fig.savefig(spec.out, **save_kw)
        plt.close(fig)
    info["manifest_hash"] = manifest["config_hash"]
    return spec.out, info
