"""CSV / JSON / manifest plumbing.

All numeric text output uses 17 significant digits ('.' decimal separator),
which round-trips float64 exactly: re-running a config reproduces files byte
for byte, and re-parsing reproduces the arrays bit for bit.  Every data file
a run writes is referenced by its manifest together with a SHA-256 content
hash.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError


def fmt(value) -> str:
    """Full-precision text form of one CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Columns of a loggas CSV keyed by header name.

    Numeric columns come back as float64 (exact round trip); non-numeric
    columns as object arrays of strings.
    """
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


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(
    outdir,
    subcommand: str,
    config: dict,
    outputs: list[Path],
    diagnostics: dict | None = None,
    incomplete: bool = False,
    wall_time_s: float | None = None,
) -> Path:
    outdir = Path(outdir)
    manifest = {
        "tool": "loggas",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "config_hash": config_hash(config),
        "outputs": [
            {"path": p.name, "sha256": sha256_file(p), "bytes": p.stat().st_size}
            for p in outputs
        ],
        "diagnostics": diagnostics or {},
        "incomplete": incomplete,
        "wall_time_s": wall_time_s,
        "created_unix": time.time(),
    }
    path = outdir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path) -> tuple[dict, Path]:
    """Load a manifest given its path or its directory; returns (manifest, dir)."""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    if not path.exists():
        raise DomainError(f"no manifest at {path}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh), path.parent


def verify_outputs(manifest: dict, base: Path) -> None:
    """Check every referenced output exists with the recorded hash."""
    for entry in manifest["outputs"]:
        p = Path(base) / entry["path"]
        if not p.exists():
            raise DomainError(f"manifest references missing file {p}")
        actual = sha256_file(p)
        if actual != entry["sha256"]:
            raise DomainError(
                f"content hash mismatch for {p}: manifest {entry['sha256'][:12]}..., "
                f"file {actual[:12]}..."
            )


def manifest_output(manifest: dict, base: Path, suffix: str) -> Path:
    """The unique output file of a manifest with the given suffix."""
    hits = [e["path"] for e in manifest["outputs"] if e["path"].endswith(suffix)]
    if len(hits) != 1:
        raise DomainError(f"expected exactly one *{suffix} output, found {hits}")
    return Path(base) / hits[0]
