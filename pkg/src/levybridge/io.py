"""Plain-text serialization: CSV tables with JSON metadata sidecars, JSON-lines reports.

Floats are written with 17 significant digits so that a write/read round
trip reproduces every value bit for bit, and all JSON is emitted with sorted
keys so that equal inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .charfn import LevyModel, model_from_config, model_to_config
from .pathsim import PathGrid
from .stats import ReportBundle, TestReport, jsonable

__all__ = [
    "FLOAT_FMT",
    "write_csv",
    "read_csv",
    "write_density",
    "read_density",
    "write_paths",
    "read_paths",
    "write_renewal",
    "read_renewal",
    "write_killed_density",
    "read_killed_density",
    "write_reports",
    "read_reports",
    "dump_json",
]

FLOAT_FMT = "%.17g"


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(jsonable(obj), sort_keys=True, indent=1) + "\n")


def write_csv(path, header: list[str], columns: Iterable, meta: dict | None = None) -> Path:
    """Write equal-length numeric columns; optional metadata goes to ``<file>.meta.json``."""
    path = Path(path)
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if len({c.size for c in cols}) > 1:
        raise ValueError("columns differ in length")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([FLOAT_FMT % v for v in row])
    if meta is not None:
        dump_json(meta, _sidecar(path))
    return path


def read_csv(path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    cols = {name: data[:, i].copy() for i, name in enumerate(header)}
    side = _sidecar(path)
    meta = json.loads(side.read_text()) if side.exists() else {}
    return cols, meta


def _model_meta(model: LevyModel | None) -> dict | None:
    return None if model is None else model_to_config(model)


def write_density(path, f, model: LevyModel | None = None) -> Path:
    """Density table ``x, f`` with metadata (model, t, spacing, mass)."""
    meta = {"model": _model_meta(model if model is not None else f.model), "t": f.t,
            "x_min": f.x_min, "spacing": f.spacing, "total_mass": f.total_mass,
            "tail_mass": f.tail_mass, "clamped": f.clamped}
    return write_csv(path, ["x", "f"], [f.x, f.values], meta)


def read_density(path):
    from .density import DensityGrid
    cols, meta = read_csv(path)
    model = model_from_config(meta["model"]) if meta.get("model") else None
    return DensityGrid(t=meta["t"], x_min=meta["x_min"], spacing=meta["spacing"],
                       values=cols["f"], total_mass=meta["total_mass"],
                       tail_mass=meta["tail_mass"], clamped=int(meta["clamped"]), model=model)


def write_paths(path, paths: PathGrid, model: LevyModel | None = None,
                seed: int | None = None) -> Path:
    """Long-format CSV ``path, time, value`` (one block per path)."""
    v = np.atleast_2d(paths.values)
    P, N = v.shape
    meta = {"model": _model_meta(model), "seed": seed, "n": paths.n, "t": paths.t,
            "kind": paths.kind, "n_paths": P, "batched": paths.batched,
            "extra": {k: val for k, val in paths.meta.items()}}
    return write_csv(path, ["path", "time", "value"],
                     [np.repeat(np.arange(P), N), np.tile(paths.times, P), v.ravel()], meta)


def read_paths(path) -> tuple[PathGrid, dict]:
    cols, meta = read_csv(path)
    P = int(meta.get("n_paths", 1))
    N = cols["time"].size // max(P, 1)
    times = cols["time"][:N]
    vals = cols["value"].reshape(P, N)
    if not meta.get("batched", P > 1):
        vals = vals[0]
    model = model_from_config(meta["model"]) if meta.get("model") else None
    meta = dict(meta, model=model)
    return PathGrid(times, vals, meta.get("kind", "free")), meta


def write_renewal(path, h, x=None, model: LevyModel | None = None) -> Path:
    """Renewal function table ``x, h, stderr``; analytic kinds are sampled on ``x``."""
    if x is None:
        if h.table_x is None:
            raise ValueError("analytic renewal function needs an x grid")
        x, vals = h.table_x, h.scale * h.table_h
        se = h.table_se if h.table_se is not None else np.zeros_like(x)
        se = h.scale * se
    else:
        x = np.asarray(x, dtype=float)
        vals = h(x)
        se = np.zeros_like(x)
    meta = {"model": _model_meta(model), "kind": h.kind.value, "exponent": h.exponent,
            "scale": h.scale, "extra": dict(h.meta)}
    return write_csv(path, ["x", "h", "stderr"], [x, vals, se], meta)


def read_renewal(path):
    from .ladder import RenewalFunction, RenewalKind
    cols, meta = read_csv(path)
    kind = RenewalKind(meta["kind"])
    if kind is RenewalKind.TABLE:
        return RenewalFunction(kind, table_x=cols["x"], table_h=cols["h"],
                               table_se=cols["stderr"], meta=meta.get("extra", {}))
    return RenewalFunction(kind, exponent=meta["exponent"], scale=meta["scale"])


def write_killed_density(path, q, model: LevyModel | None = None) -> Path:
    """Cell table ``x, y, q, stderr`` for a killed or conditioned density."""
    X, Y = np.meshgrid(q.x, q.y, indexing="ij")
    se = q.stderr if q.stderr is not None else np.zeros_like(q.values)
    meta = {"model": _model_meta(model), "t": q.t, "nx": len(q.x), "ny": len(q.y),
            "type": type(q).__name__}
    meta.update({k: v for k, v in getattr(q, "meta", {}).items()})
    return write_csv(path, ["x", "y", "q", "stderr"], [X, Y, q.values, se], meta)


def read_killed_density(path):
    from .conditioned import KilledDensity
    cols, meta = read_csv(path)
    nx, ny = int(meta["nx"]), int(meta["ny"])
    x = cols["x"].reshape(nx, ny)[:, 0]
    y = cols["y"].reshape(nx, ny)[0]
    return KilledDensity(meta["t"], x, y, cols["q"].reshape(nx, ny),
                         cols["stderr"].reshape(nx, ny), meta)


def write_reports(path, bundles: Iterable[ReportBundle], mode: str = "w") -> Path:
    """JSON lines: per bundle, one header record followed by one record per report."""
    path = Path(path)
    with path.open(mode) as fh:
        for b in bundles:
            fh.writelines(line + "\n" for line in b.to_json_lines())
    return path


def read_reports(path) -> list[TestReport]:
    """Individual reports from a JSON-lines file (bundle header lines are skipped)."""
    out = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if "bundle" not in rec:
            out.append(TestReport.from_dict(rec))
    return out
