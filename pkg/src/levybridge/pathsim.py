"""Discretized Lévy paths and Lévy bridges on a uniform time grid.

Free paths use exact increment samplers (Gaussian, Chambers-Mallows-Stuck for
stable laws, inverse CDF on a density table otherwise).  Bridges are sampled
step by step from the one-step conditional density

    z -> p_dt(x_k, z) p_{t - t_{k+1}}(z, y) / p_{t - t_k}(x_k, y)

which is exactly the finite-dimensional law of the bridge restricted to the
grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .charfn import Kind, LevyModel
from .density import DensityFamily, DensityGrid
from .exceptions import BridgeDegeneracyError, RequiresDensityError

__all__ = [
    "PathGrid",
    "RngStream",
    "make_rng",
    "as_rng",
    "time_grid",
    "sample_increments",
    "sample_path",
    "sample_bridge",
    "bridge_rn_weight",
    "StepKernel",
    "step_kernel",
    "Lookahead",
    "run_sequential",
    "stable_rvs",
    "DEN_FLOOR",
]

DEN_FLOOR = _kernels.DEN_FLOOR
CHUNK = 4096

RngStream = np.random.Generator


def make_rng(seed: int) -> np.random.Generator:
    """Reproducible stream: identical seed gives an identical sequence."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)


@dataclass(eq=False)
class PathGrid:
    """Grid skeleton of one path (``values`` 1-d) or a batch (2-d, one row per path)."""

    times: np.ndarray
    values: np.ndarray
    kind: str = "free"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[-1] != self.times.size:
            raise ValueError("values and times must have the same length")
        if self.times.size < 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be non-empty and strictly increasing")

    @property
    def n(self) -> int:
        return self.times.size - 1

    @property
    def t(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return (self.t - float(self.times[0])) / self.n if self.n else float("nan")

    @property
    def batched(self) -> bool:
        return self.values.ndim == 2

    def __len__(self):
        return self.values.shape[0] if self.batched else 1

    def __getitem__(self, idx) -> "PathGrid":
        if not self.batched:
            raise TypeError("single path is not indexable")
        return PathGrid(self.times, self.values[idx], self.kind, dict(self.meta))


def time_grid(t: float, n: int) -> np.ndarray:
    return t * np.arange(n + 1) / n


# -- increments -------------------------------------------------------------

def stable_rvs(alpha: float, beta: float, size, rng: np.random.Generator) -> np.ndarray:
    """Standard S1 stable variates (scale 1, location 0) by Chambers-Mallows-Stuck."""
    V = rng.uniform(-math.pi / 2, math.pi / 2, size)
    W = rng.standard_exponential(size)
    if alpha == 1.0:
        h = math.pi / 2 + beta * V
        return (2 / math.pi) * (h * np.tan(V) - beta * np.log((math.pi / 2) * W * np.cos(V) / h))
    zeta = beta * math.tan(math.pi * alpha / 2)
    B = math.atan(zeta) / alpha
    S = (1 + zeta ** 2) ** (1 / (2 * alpha))
    aVB = alpha * (V + B)
    return (S * np.sin(aVB) / np.cos(V) ** (1 / alpha)
            * (np.cos(V - aVB) / W) ** ((1 - alpha) / alpha))


def _inverse_cdf_draw(density: DensityGrid, size, rng) -> np.ndarray:
    cdf = density.cdf_table()
    cdf = cdf / cdf[-1]
    u = rng.uniform(0.0, 1.0, size)
    return np.interp(u, cdf, density.x)


def sample_increments(model: LevyModel, dt: float, size, rng,
                      density: DensityGrid | None = None) -> np.ndarray:
    """i.i.d. draws from the law of X_dt."""
    rng = as_rng(rng)
    if model.kind is Kind.BROWNIAN:
        return model.drift * dt + model.sigma * math.sqrt(dt) * rng.standard_normal(size)
    if model.is_stable:
        a, b = model.time_scaling(dt)
        c = model.sigma
        z = stable_rvs(model.alpha, model.beta_skew, size, rng)
        if model.alpha == 1.0:
            # S1 scale change at alpha = 1 carries a log term
            z = c * z + 2 / math.pi * model.beta_skew * c * math.log(c)
        else:
            z = c * z
        return a * z + b
    if density is None:
        raise RequiresDensityError(
            f"{model.kind.value} increments need a density table for inverse-CDF sampling")
    if not math.isclose(density.t, dt, rel_tol=1e-12):
        raise ValueError("density table horizon differs from the step size")
    return _inverse_cdf_draw(density, size, rng)


def sample_path(model: LevyModel, x: float, t: float, n: int, rng, n_paths: int | None = None,
                density: DensityGrid | None = None) -> PathGrid:
    """Free path(s) started at ``x`` on the grid ``k t / n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = as_rng(rng)
    shape = (n,) if n_paths is None else (n_paths, n)
    inc = sample_increments(model, t / n, shape, rng, density=density)
    vals = np.empty(shape[:-1] + (n + 1,))
    vals[..., 0] = 0.0
    np.cumsum(inc, axis=-1, out=vals[..., 1:])
    del inc
    vals += x
    return PathGrid(time_grid(t, n), vals, "free", {"t": t, "n": n})


# -- sequential sampling machinery -----------------------------------------

@dataclass(frozen=True)
class StepKernel:
    """One-step density tabulated at a fixed set of offsets."""

    dt: float
    offsets: np.ndarray
    weights: np.ndarray


def step_kernel(model: LevyModel, dt: float, reach: float, family: DensityFamily | None = None,
                per_scale: int = 8, core: float = 8.5, growth: float = 1.08) -> StepKernel:
    """Offsets: uniform core of ``core`` step-scales, geometric tails out to ``reach``.

    The Gaussian kind has no tails beyond the core.
    """
    family = family or DensityFamily(model)
    s = model.scale_at(dt)
    h = s / per_scale
    if model.kind is Kind.BROWNIAN:
        center = model.drift * dt
    elif model.is_self_similar:
        center = model.time_scaling(dt)[1]
    else:
        center = (model.drift + model.jump_rate * model.jump_mean) * dt
    k = int(math.ceil(core * per_scale))
    inner = center + h * np.arange(-k, k + 1)
    if model.kind is not Kind.BROWNIAN and reach > core * s:
        tail = [core * s]
        while tail[-1] < reach:
            tail.append(tail[-1] * growth + h)
        tail = np.asarray(tail[1:])
        offsets = np.concatenate([center - tail[::-1], inner, center + tail])
    else:
        offsets = inner
    weights = np.maximum(family(dt, offsets), 0.0)
    return StepKernel(dt, offsets, weights)


@dataclass(frozen=True)
class Lookahead:
    """Per-row look-ahead factors ``g_r(z) = amp_r * table[idx_r](scale_r * z + shift_r)``."""

    tables: np.ndarray
    tab_lo: np.ndarray
    tab_dx: np.ndarray
    tab_len: np.ndarray
    tab_idx: np.ndarray
    amp: np.ndarray
    scale: np.ndarray
    shift: np.ndarray
    flat: bool = False

    @classmethod
    def from_grids(cls, grids, idx, amp, scale, shift, flat=False):
        m = max(g.n for g in grids)
        tables = np.zeros((len(grids), m))
        for i, g in enumerate(grids):
            tables[i, :g.n] = g.values
        return cls(tables,
                   np.array([g.x_min for g in grids], dtype=float),
                   np.array([g.spacing for g in grids], dtype=float),
                   np.array([g.n for g in grids], dtype=np.int64),
                   np.asarray(idx, dtype=np.int64), np.asarray(amp, dtype=float),
                   np.asarray(scale, dtype=float), np.asarray(shift, dtype=float), flat)

    @classmethod
    def from_rows(cls, rows: np.ndarray, lo: float, dx: float, flat=False):
        """One lattice table per row, evaluated directly at ``z``."""
        rows = np.ascontiguousarray(rows, dtype=float)
        r, m = rows.shape
        return cls(rows, np.full(r, lo), np.full(r, dx), np.full(r, m, dtype=np.int64),
                   np.arange(r, dtype=np.int64), np.ones(r), np.ones(r), np.zeros(r), flat)


def run_sequential(start, n_steps, row0, lower: float, kernel: StepKernel, look: Lookahead,
                   rng, final=None, width: int | None = None) -> np.ndarray:
    """Sample a batch of sequential paths; returns an array padded with NaN."""
    rng = as_rng(rng)
    start = np.ascontiguousarray(start, dtype=float)
    N = start.size
    n_steps = np.broadcast_to(np.asarray(n_steps, dtype=np.int64), (N,)).copy()
    row0 = np.broadcast_to(np.asarray(row0, dtype=np.int64), (N,)).copy()
    if final is None:
        final = np.full(N, np.nan)
    final = np.broadcast_to(np.asarray(final, dtype=float), (N,)).copy()
    K = int(n_steps.max()) if width is None else width
    out = np.empty((N, K + 1))
    for c0 in range(0, N, CHUNK):
        c1 = min(N, c0 + CHUNK)
        u = rng.uniform(0.0, 1.0, (c1 - c0, max(K, 1)))
        status, bad = _kernels.sequential_sample(
            start[c0:c1], n_steps[c0:c1], row0[c0:c1], float(lower),
            kernel.offsets, kernel.weights, look.tables, look.tab_lo, look.tab_dx,
            look.tab_len, look.tab_idx, look.amp, look.scale, look.shift, look.flat,
            u, final[c0:c1], out[c0:c1])
        if status != _kernels.STATUS_OK:
            raise BridgeDegeneracyError(
                f"normalizing kernel below {DEN_FLOOR} on path {c0 + bad}")
    return out


# -- bridges ----------------------------------------------------------------

def _bridge_lookahead(model: LevyModel, family: DensityFamily, y: float, t: float, n: int):
    dt = t / n
    rem = [t - (k + 1) * dt for k in range(n - 1)]
    if family.master is not None:
        grids = [family.master]
        idx = np.zeros(max(n - 1, 1), dtype=np.int64)
        amp, scale, shift = [], [], []
        for r in rem:
            a, b, _ = family.affine(r)
            amp.append(1.0 / a)
            scale.append(-1.0 / a)
            shift.append((y - b) / a)
    else:
        grids, idx, amp, scale, shift = [], [], [], [], []
        for i, r in enumerate(rem):
            grids.append(family.grid(r))
            idx.append(i)
            amp.append(1.0)
            scale.append(-1.0)
            shift.append(y)
    if n == 1:
        amp, scale, shift = [1.0], [1.0], [0.0]
        if not grids:
            grids = [family.grid(t)]
        idx = [0]
    return Lookahead.from_grids(grids, idx, amp, scale, shift)


def _gaussian_bridge(model: LevyModel, x: float, y: float, t: float, n: int, rng,
                     n_paths: int | None) -> PathGrid:
    rng = as_rng(rng)
    times = time_grid(t, n)
    N = 1 if n_paths is None else n_paths
    out = np.empty((N, n + 1))
    frac = times / t
    sd = model.sigma * math.sqrt(t / n)
    for c0 in range(0, N, CHUNK):
        c1 = min(N, c0 + CHUNK)
        w = np.zeros((c1 - c0, n + 1))
        np.cumsum(sd * rng.standard_normal((c1 - c0, n)), axis=1, out=w[:, 1:])
        out[c0:c1] = x + w - frac * (w[:, -1:] - (y - x))
    out[:, -1] = y
    vals = out[0] if n_paths is None else out
    return PathGrid(times, vals, "bridge", {"t": t, "n": n, "x": x, "y": y})


def sample_bridge(model: LevyModel, x: float, y: float, t: float, n: int, rng,
                  n_paths: int | None = None, family: DensityFamily | None = None,
                  kernel: StepKernel | None = None, reach: float | None = None,
                  method: str = "auto") -> PathGrid:
    """Bridge(s) from ``x`` to ``y`` of length ``t`` on ``n`` steps.

    ``values[..., n]`` is set to ``y`` exactly.  ``method="auto"`` uses the
    closed-form Gaussian construction for Brownian models and the sequential
    inverse-CDF sampler otherwise; ``"sequential"`` forces the latter.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if method not in ("auto", "sequential"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and model.kind is Kind.BROWNIAN:
        return _gaussian_bridge(model, x, y, t, n, rng, n_paths)
    family = family or DensityFamily(model)
    p = float(family(t, y - x))
    if not p > DEN_FLOOR:
        raise BridgeDegeneracyError(f"p_t(x, y) = {p} is below the floor")
    times = time_grid(t, n)
    N = 1 if n_paths is None else n_paths
    if n == 1:
        vals = np.tile([x, y], (N, 1)).astype(float)
    else:
        if kernel is None:
            if reach is None:
                reach = 30.0 * model.scale_at(t) + abs(y - x)
            kernel = step_kernel(model, t / n, reach, family)
        look = _bridge_lookahead(model, family, y, t, n)
        vals = run_sequential(np.full(N, float(x)), n, 0, -math.inf, kernel, look, rng,
                              final=np.full(N, float(y)))
    if n_paths is None:
        vals = vals[0]
    return PathGrid(times, vals, "bridge", {"t": t, "n": n, "x": x, "y": y})


def bridge_rn_weight(family: DensityFamily, prefix: PathGrid | None, x: float, y: float,
                     t: float):
    """Density of the bridge law against the free law on the prefix sigma-field.

    ``p_{t-s}(X_s, y) / p_t(x, y)`` with ``s`` the last time of ``prefix``;
    ``prefix=None`` means ``s = 0`` and gives weight 1.
    """
    if prefix is None:
        prefix = PathGrid([0.0], [x])
    s = prefix.t - float(prefix.times[0]) if prefix.n else 0.0
    if not s < t:
        raise ValueError("prefix must end strictly before t")
    den = float(family(t, y - x))
    if not den > DEN_FLOOR:
        raise BridgeDegeneracyError(f"p_t(x, y) = {den} is below the floor")
    xs = prefix.values[..., -1]
    if s == 0.0:
        return np.ones_like(np.asarray(xs, dtype=float)) * (family(t, y - xs) / den)
    return family(t - s, y - xs) / den
