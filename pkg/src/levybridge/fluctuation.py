"""Path transformations around the running minimum.

All functions act on :class:`PathGrid` skeletons with a uniform time grid
starting at 0 and accept a batch (2-d values, one path per row).  The
minimum is always located at its earliest grid node.

Segments whose length depends on the path (pre- and post-minimum pieces)
are returned NaN-padded in batch mode, with the per-path step counts in
``meta["n_steps"]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import GridAlignmentError, NotABridgeError
from .pathsim import PathGrid

__all__ = [
    "MinInfo",
    "MinDecomposition",
    "running_min",
    "cyclic_shift",
    "vervaat",
    "split_at_min",
    "reconstruct",
]


@dataclass(frozen=True)
class MinInfo:
    value: np.ndarray | float
    index: np.ndarray | int
    time: np.ndarray | float


@dataclass(frozen=True)
class MinDecomposition:
    """Pre-minimum piece (time-reversed, from the minimum back to 0) and post piece.

    Both pieces start at 0; ``pre`` ends at ``X_0 - min`` and ``post`` ends at
    ``X_t - min``.
    """

    minimum: MinInfo
    pre: PathGrid
    post: PathGrid


def _values2d(path: PathGrid) -> np.ndarray:
    return np.atleast_2d(path.values)


def _check_uniform(path: PathGrid) -> float:
    if path.n < 1:
        raise ValueError("path needs at least one step")
    d = np.diff(path.times)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        raise GridAlignmentError("time grid is not uniform")
    return float(d[0])


def running_min(path: PathGrid, nodes: slice | None = None) -> MinInfo:
    """Minimum over the grid, its earliest index and time."""
    v = _values2d(path)
    if nodes is not None:
        v = v[:, nodes]
    idx = np.argmin(v, axis=1)
    if nodes is not None and nodes.start:
        idx = idx + nodes.start
    val = _values2d(path)[np.arange(v.shape[0]), idx]
    t = path.times[idx] - path.times[0]
    if path.batched:
        return MinInfo(val, idx, t)
    return MinInfo(float(val[0]), int(idx[0]), float(t[0]))


def _shift_index(path: PathGrid, s: float) -> int:
    dt = _check_uniform(path)
    span = path.t - float(path.times[0])
    if not 0.0 <= s <= span * (1 + 1e-12):
        raise GridAlignmentError(f"shift {s} outside [0, {span}]")
    j = s / dt
    k = int(round(j))
    if abs(j - k) > 1e-9 * max(1.0, abs(j)):
        raise GridAlignmentError(f"shift {s} is not a multiple of the step {dt}")
    return k % path.n


def cyclic_shift(path: PathGrid, s: float) -> PathGrid:
    """Rotate the increments of the path by ``s`` (a grid multiple).

    The result starts at ``X_0``, follows the increments of ``X`` after ``s``
    and then those before ``s``, so it also ends at ``X_t``.  For a bridge
    this is ``X_0 + X_{(r+s) mod t} - X_s``.
    """
    k = _shift_index(path, s)
    v = _values2d(path)
    if k == 0:
        return PathGrid(path.times, path.values.copy(), path.kind, dict(path.meta))
    inc = np.roll(np.diff(v, axis=1), -k, axis=1)
    out = np.empty_like(v)
    out[:, 0] = v[:, 0]
    out[:, 1:] = v[:, :1] + np.cumsum(inc, axis=1)
    out[:, -1] = v[:, -1]
    return PathGrid(path.times, out if path.batched else out[0], path.kind, dict(path.meta))


def _bridge_check(v: np.ndarray, atol: float | None) -> None:
    gap = np.abs(v[:, -1] - v[:, 0])
    tol = atol if atol is not None else 1e-9 * np.maximum(1.0, np.abs(v).max(axis=1))
    bad = gap > tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NotABridgeError(f"path {i} has X_t - X_0 = {v[i, -1] - v[i, 0]!r}")


def vervaat(path: PathGrid, shift: bool = True, atol: float | None = None) -> PathGrid:
    """Vervaat transform ``V_r = X_{(rho + r) mod t} - min X`` of a bridge.

    ``rho`` is the earliest grid argmin over ``[0, t)``.  With
    ``shift=False`` the rotation is omitted and ``X - min X`` is returned;
    that variant is kept as a negative control for the verification suite.
    """
    _check_uniform(path)
    v = _values2d(path)
    _bridge_check(v, atol)
    n = path.n
    P = v.shape[0]
    r = np.argmin(v[:, :n], axis=1)
    m = v[np.arange(P), r]
    if shift:
        idx = (r[:, None] + np.arange(n + 1)[None, :]) % n
        out = v[np.arange(P)[:, None], idx] - m[:, None]
        out[:, -1] = 0.0
    else:
        out = v - m[:, None]
    meta = dict(path.meta)
    meta["rho_index"] = r if path.batched else int(r[0])
    return PathGrid(path.times - path.times[0], out if path.batched else out[0],
                    "excursion" if shift else "shifted", meta)


def split_at_min(path: PathGrid) -> MinDecomposition:
    """Split at the earliest grid argmin into reversed pre-piece and post-piece.

    ``pre_s = X_{rho - s} - min`` for ``s`` in ``[0, rho]`` and
    ``post_s = X_{rho + s} - min`` for ``s`` in ``[0, t - rho]``.
    """
    dt = _check_uniform(path)
    v = _values2d(path)
    P, N = v.shape
    n = N - 1
    info = running_min(path)
    r = np.atleast_1d(info.index)
    m = np.atleast_1d(info.value)
    j = np.arange(N)[None, :]
    pre = np.empty((P, N))
    post = np.empty((P, N))
    # row blocks keep the index temporaries small for long batches
    block = max(1, 2 ** 22 // N)
    for b0 in range(0, P, block):
        b1 = min(P, b0 + block)
        rows = np.arange(b0, b1)[:, None]
        rb, mb = r[b0:b1, None], m[b0:b1, None]
        idx = rb - j
        pre[b0:b1] = np.where(idx >= 0, v[rows, np.clip(idx, 0, n)] - mb, np.nan)
        idx = rb + j
        post[b0:b1] = np.where(idx <= n, v[rows, np.clip(idx, 0, n)] - mb, np.nan)
    times = dt * np.arange(N)
    if path.batched:
        pre_pg = PathGrid(times, pre, "pre-min", {"n_steps": r.copy()})
        post_pg = PathGrid(times, post, "post-min", {"n_steps": n - r})
    else:
        k = int(r[0])
        pre_pg = PathGrid(times[:k + 1], pre[0, :k + 1], "pre-min", {"n_steps": k})
        post_pg = PathGrid(times[:n - k + 1], post[0, :n - k + 1], "post-min", {"n_steps": n - k})
    return MinDecomposition(info, pre_pg, post_pg)


def reconstruct(dec: MinDecomposition, t0: float = 0.0) -> PathGrid:
    """Inverse of :func:`split_at_min` (single path): reverse pre, append post, add the minimum."""
    if dec.pre.batched:
        raise TypeError("reconstruct works on a single decomposition")
    m = dec.minimum.value
    vals = np.concatenate([dec.pre.values[::-1], dec.post.values[1:]]) + m
    n = vals.size - 1
    dt = dec.post.dt if dec.post.n else dec.pre.dt
    return PathGrid(t0 + dt * np.arange(n + 1), vals)
