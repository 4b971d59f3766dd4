"""Killed and conditioned-to-stay-positive laws.

Two constructions live here.

* Hunt's formula: ``q_t(x, y) = P^t_{x,y}(min > 0) p_t(x, y)``, estimated by
  counting bridges whose grid minimum stays positive (:func:`hunt_q`), with a
  step-doubling correction for the discrete-monitoring bias.

* A positive lattice ``z_i = i dz`` carrying backward filters for the walk
  killed on entering ``(-inf, 0]``: survival rows ``G_j(z) = P_z(S_1..S_j > 0)``
  and pinned rows ``P_j(z) = `` density of ``S_j`` at a fixed endpoint on
  survival.  Feeding these as look-ahead factors to the sequential sampler
  gives skeleton-exact meanders, killed bridges and excursions.  These are
  precisely the laws produced, on the same grid, by splitting a random walk
  at its minimum or rotating a walk bridge at its minimum.

The process conditioned to stay positive, ``P^up``, is sampled as the
h-transformed chain with one-step weights ``p_dt(x, z) h(z) 1{z > 0}``.
Only ``h.shape`` enters, so rescaling ``h`` cannot change any draw.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .charfn import LevyModel
from .density import DensityFamily
from .exceptions import (GridCoverageError, InconsistencyError, InsufficientSampleError,
                         SuspiciousEstimateError)
from .ladder import RenewalFunction, renewal_analytic
from .pathsim import (CHUNK, Lookahead, PathGrid, StepKernel, as_rng, run_sequential,
                      sample_bridge, step_kernel, time_grid)

__all__ = [
    "KilledLattice",
    "killed_lattice",
    "HuntEstimate",
    "hunt_q",
    "KilledDensity",
    "hunt_q_table",
    "killed_density_lattice",
    "DualityMeasure",
    "ConditionedDensity",
    "conditioned_density",
    "ZeroBoundaryDensity",
    "conditioned_density_zero",
    "check_zero_consistency",
    "check_ck_conditioned",
    "WeightedPaths",
    "sample_conditioned",
    "sample_conditioned_bridge",
    "sample_meander",
    "meander_endpoints",
    "joint_law_check",
    "default_reach",
]

REL_FLOOR = 1e-18


def default_reach(model: LevyModel, t: float, *levels: float) -> float:
    """Upper edge of the positive lattice for paths of duration ``t``."""
    base = max((abs(v) for v in levels), default=0.0)
    k = 10.0 if not model.is_stable else 30.0
    return base + k * model.scale_at(t)


class KilledLattice:
    """Backward filters of the ``dt``-walk killed below 0 on ``z_i = i dz``, ``z <= reach``."""

    def __init__(self, model: LevyModel, dt: float, reach: float, dz: float | None = None,
                 family: DensityFamily | None = None, per_scale: int = 8):
        self.model = model
        self.dt = float(dt)
        self.family = family or DensityFamily(model)
        s = model.scale_at(dt)
        self.dz = float(dz) if dz is not None else s / per_scale
        L = int(math.ceil(reach / self.dz)) + 1
        if L > 2 ** 22:
            raise GridCoverageError(f"lattice of {L} nodes; raise dz or lower the reach")
        self.L = L
        self.z = self.dz * np.arange(L)
        d = self.dz * np.arange(-(L - 1), L)
        k = np.maximum(self.family(dt, d), 0.0)
        self.w = np.full(L, self.dz)
        self.w[0] = self.w[-1] = 0.5 * self.dz
        # mass that jumps above the top node from z_i, used to extend survival flat
        up = k[L - 1:]                       # k(m dz), m = 0..L-1
        cum = np.cumsum(up[::-1])[::-1]      # sum_{m' >= m}
        self.up_tail = np.clip(self.dz * (cum - 0.5 * up), 0.0, 1.0)[::-1]
        keep = np.nonzero(k > REL_FLOOR * k.max())[0]
        self._lo, self._hi = int(keep[0]), int(keep[-1]) + 1
        self._kernel_rev = k[self._lo:self._hi][::-1].copy()
        self._direct = (self._hi - self._lo) * L < 5e7
        self._surv: list[np.ndarray] = [np.ones(L)]
        self._pinned: dict[float, list[np.ndarray]] = {}

    # one backward step: out(z_i) = sum_l w_l k(z_l - z_i) g(z_l)
    def _apply(self, g: np.ndarray) -> np.ndarray:
        a = self.w * g
        L = self.L
        if self._direct:
            c = np.convolve(a, self._kernel_rev)
        else:
            c = signal.fftconvolve(a, self._kernel_rev)
        # index of displacement d = l - i in the truncated kernel is d + L - 1 - lo
        off = (L - 1) - self._lo
        start = (self._hi - self._lo - 1) - off
        out = np.zeros(L)
        # c[m] pairs a_l with kernel index (hi-lo-1) - (m - l) -> displacement l - i
        # where i = m - start; keep only i in [0, L)
        lo_i = max(0, -start)
        hi_i = min(L, c.size - start)
        out[lo_i:hi_i] = c[start + lo_i:start + hi_i]
        return np.maximum(out, 0.0)

    def survival(self, m: int) -> np.ndarray:
        """Rows ``G_0..G_m`` with ``G_0 = 1``; shape (m + 1, L)."""
        while len(self._surv) <= m:
            g = self._surv[-1]
            self._surv.append(np.minimum(self._apply(g) + g[-1] * self.up_tail, 1.0))
        return np.array(self._surv[:m + 1])

    def pinned(self, y: float, m: int) -> np.ndarray:
        """Rows ``P_1..P_m`` for endpoint ``y >= 0``; shape (m, L)."""
        rows = self._pinned.setdefault(float(y), [])
        if not rows:
            rows.append(np.maximum(self.family(self.dt, y - self.z), 0.0))
        while len(rows) < m:
            rows.append(self._apply(rows[-1]))
        return np.array(rows[:m])

    def killed_density(self, j: int, x, y: float) -> np.ndarray:
        """Skeleton killed density of ``S_j`` at ``y`` from ``x`` (interpolated in ``x``)."""
        row = self.pinned(y, j)[-1]
        return np.interp(np.asarray(x, dtype=float), self.z, row, right=0.0)

    def step_kernel(self) -> StepKernel:
        return step_kernel(self.model, self.dt, self.z[-1], self.family)


@functools.lru_cache(maxsize=4)
def killed_lattice(model: LevyModel, dt: float, reach: float, dz: float | None = None
                   ) -> KilledLattice:
    """Cached :class:`KilledLattice` (constructing the backward rows is the costly part)."""
    return KilledLattice(model, dt, reach, dz)


# -- Hunt's formula ---------------------------------------------------------

@dataclass(frozen=True)
class HuntEstimate:
    q: float
    stderr: float
    survival: float
    survival_coarse: float
    p: float
    n_bridges: int
    n_steps: int


def hunt_q(model: LevyModel, x: float, y: float, t: float, n_bridges: int, n_steps: int, rng,
           richardson: bool = True, family: DensityFamily | None = None) -> HuntEstimate:
    """Monte Carlo Hunt formula ``q_t(x, y) = P^t_{x,y}(grid min > 0) p_t(x, y)``.

    With ``richardson`` the survival frequency on ``n_steps`` and on every
    second node are combined as ``(sqrt2 S_n - S_{n/2}) / (sqrt2 - 1)``,
    removing the leading ``sqrt(dt)`` monitoring bias; the standard error is
    that of the paired per-bridge combination.
    """
    if not (x > 0 and y > 0 and t > 0):
        raise ValueError("x, y and t must be positive")
    if richardson and n_steps % 2:
        raise ValueError("step doubling needs an even n_steps")
    rng = as_rng(rng)
    family = family or DensityFamily(model)
    p = float(family(t, y - x))
    fine = coarse = 0
    acc = np.zeros(0)
    vals = []
    for c0 in range(0, n_bridges, CHUNK * 4):
        m = min(CHUNK * 4, n_bridges - c0)
        b = sample_bridge(model, x, y, t, n_steps, rng, n_paths=m, family=family).values
        i_f = b[:, 1:-1].min(axis=1) > 0
        i_c = b[:, 2:-1:2].min(axis=1) > 0 if richardson else i_f
        fine += int(i_f.sum())
        coarse += int(i_c.sum())
        if richardson:
            r2 = math.sqrt(2.0)
            vals.append((r2 * i_f - i_c) / (r2 - 1.0))
        else:
            vals.append(i_f.astype(float))
    acc = np.concatenate(vals)
    s = model.scale_at(t)
    if fine == 0 and min(x, y) > 2.0 * s:
        raise SuspiciousEstimateError(
            f"no surviving bridge out of {n_bridges} for x={x}, y={y}; q_t is strictly positive")
    surv = float(acc.mean())
    se = float(acc.std(ddof=1) / math.sqrt(acc.size)) if acc.size > 1 else float("inf")
    if fine in (0, n_bridges):
        # binomial rule-of-three bound when the sample is degenerate
        se = max(se, 3.0 / n_bridges)
    return HuntEstimate(surv * p, se * p, fine / n_bridges, coarse / n_bridges, p,
                        n_bridges, n_steps)


@dataclass(frozen=True, eq=False)
class KilledDensity:
    t: float
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    meta: dict = field(default_factory=dict)


def hunt_q_table(model: LevyModel, xs, ys, t: float, n_bridges: int, n_steps: int, rng,
                 richardson: bool = True) -> KilledDensity:
    """:func:`hunt_q` on every cell of ``xs x ys`` with independent child streams."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    rng = as_rng(rng)
    fam = DensityFamily(model)
    children = rng.spawn(xs.size * ys.size)
    q = np.empty((xs.size, ys.size))
    se = np.empty_like(q)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            est = hunt_q(model, x, y, t, n_bridges, n_steps, children[i * ys.size + j],
                         richardson=richardson, family=fam)
            q[i, j], se[i, j] = est.q, est.stderr
    return KilledDensity(t, xs, ys, q, se, {"n_bridges": n_bridges, "n_steps": n_steps,
                                            "method": "hunt-mc"})


def killed_density_lattice(model: LevyModel, t: float, xs, ys, n_steps: int,
                           reach: float | None = None) -> KilledDensity:
    """Deterministic skeleton killed density from the lattice recursion."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    reach = reach or default_reach(model, t, xs.max(), ys.max())
    lat = killed_lattice(model, t / n_steps, reach)
    q = np.array([lat.killed_density(n_steps, xs, y) for y in ys]).T
    return KilledDensity(t, xs, ys, q, np.zeros_like(q), {"n_steps": n_steps,
                                                        "method": "lattice"})


# -- conditioned densities ---------------------------------------------------

@dataclass(frozen=True)
class DualityMeasure:
    """Reference measure ``h(y) h_dual(y) dy`` of the conditioned semigroup."""

    h: RenewalFunction
    h_dual: RenewalFunction

    def __call__(self, y):
        return self.h(y) * self.h_dual(y)


@dataclass(frozen=True, eq=False)
class ConditionedDensity:
    t: float
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    beta: float | None = None
    beta_stderr: float | None = None


def conditioned_density(q: KilledDensity, h: RenewalFunction, h_dual: RenewalFunction
                        ) -> ConditionedDensity:
    """``p_up_t(x, y) = q_t(x, y) / (h(x) h_dual(y))``."""
    hx = np.asarray(h(q.x), dtype=float)[:, None]
    hy = np.asarray(h_dual(q.y), dtype=float)[None, :]
    if np.any(hx <= 0) or np.any(hy <= 0):
        raise ValueError("conditioned densities need x, y > 0")
    return ConditionedDensity(q.t, q.x, q.y, q.values / (hx * hy), q.stderr / (hx * hy))


def check_ck_conditioned(ps: ConditionedDensity, pu: ConditionedDensity,
                         pt: ConditionedDensity, lam: DualityMeasure) -> tuple[float, float]:
    """Chapman-Kolmogorov residual for conditioned tables, and its propagated stderr.

    ``ps.y`` must equal ``pu.x`` (the intermediate grid); the integral against
    ``lam`` is the trapezoid rule.  Returns (max residual, stderr at that cell).
    """
    w = np.asarray(ps.y, dtype=float)
    if not np.allclose(w, pu.x):
        raise ValueError("intermediate grids differ")
    lw = np.asarray(lam(w), dtype=float)
    tw = np.zeros_like(w)
    tw[1:] += 0.5 * np.diff(w)
    tw[:-1] += 0.5 * np.diff(w)
    a = ps.values * (lw * tw)[None, :]
    conv = a @ pu.values
    var = (ps.stderr * (lw * tw)[None, :]) ** 2 @ pu.values ** 2 \
        + (ps.values * (lw * tw)[None, :]) ** 2 @ pu.stderr ** 2
    res = np.abs(conv - pt.values)
    se = np.sqrt(var + pt.stderr ** 2)
    i = np.unravel_index(np.argmax(res), res.shape)
    return float(res[i]), float(se[i])


# -- P^up chain ---------------------------------------------------------------

def _h_lookahead(h: RenewalFunction, reach: float, dz: float, n_rows: int) -> Lookahead:
    L = int(math.ceil(reach / dz)) + 1
    if L > 2 ** 22:
        dz = reach / (2 ** 22 - 1)
        L = 2 ** 22
    z = dz * np.arange(L)
    tab = np.asarray(h.shape(z), dtype=float)[None, :]
    r = max(n_rows, 1)
    return Lookahead(tab, np.zeros(1), np.full(1, dz), np.array([L], dtype=np.int64),
                     np.zeros(r, dtype=np.int64), np.ones(r), np.ones(r), np.zeros(r), True)


def _chain(model: LevyModel, start: np.ndarray, dt: float, steps: int, h: RenewalFunction,
           reach: float, family: DensityFamily, rng) -> np.ndarray:
    kern = step_kernel(model, dt, reach, family)
    look = _h_lookahead(h, reach, model.scale_at(dt) / 8, steps)
    return run_sequential(start, steps, 0, 0.0, kern, look, rng)


def sample_conditioned(model: LevyModel, x: float, t: float, n: int, rng,
                       n_paths: int | None = None, h: RenewalFunction | None = None,
                       reach: float | None = None, refine: int = 10) -> PathGrid:
    """Paths of ``P^up_x`` on ``n`` steps of ``[0, t]``.

    From ``x = 0`` the first step is itself simulated by the chain on the
    geometric sub-grid ``dt 2^-refine, ..., dt/2, dt`` so the entrance law is
    resolved below the step scale; only the grid nodes are returned.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    rng = as_rng(rng)
    h = h or renewal_analytic(model)
    family = DensityFamily(model)
    reach = reach or default_reach(model, t, x)
    N = 1 if n_paths is None else n_paths
    dt = t / n
    start = np.full(N, float(x))
    first = None
    if x == 0.0:
        pos = start
        sub = [dt * 2.0 ** (-refine)] + [dt * 2.0 ** (-j) for j in range(refine, 0, -1)]
        for d in sub:
            pos = _chain(model, pos, d, 1, h, reach, family, rng)[:, 1]
        first = pos
        rest = _chain(model, first, dt, n - 1, h, reach, family, rng) if n > 1 else first[:, None]
        vals = np.concatenate([np.zeros((N, 1)), rest], axis=1)
    else:
        vals = _chain(model, start, dt, n, h, reach, family, rng)
    if n_paths is None:
        vals = vals[0]
    return PathGrid(time_grid(t, n), vals, "conditioned", {"t": t, "n": n, "x": x})


# -- lattice samplers ------------------------------------------------------------

def _pinned_look(lat: KilledLattice, y: float, m_max: int) -> Lookahead:
    # row r holds P_{m_max - 1 - r}; a path of m steps starts at row m_max - m
    rows = lat.pinned(y, max(m_max - 1, 1))[::-1]
    return Lookahead.from_rows(rows, 0.0, lat.dz, flat=False)


def _survival_look(lat: KilledLattice, m_max: int) -> Lookahead:
    # row r holds G_{m_max - 1 - r}
    rows = lat.survival(max(m_max - 1, 0))[::-1]
    return Lookahead.from_rows(rows, 0.0, lat.dz, flat=True)


def sample_conditioned_bridge(model: LevyModel, x: float, y: float, t: float, n: int, rng,
                              n_paths: int | None = None, reach: float | None = None,
                              lattice: KilledLattice | None = None, n_steps=None
                              ) -> PathGrid:
    """Bridges of the walk killed below 0, from ``x >= 0`` to ``y >= 0``.

    The path stays strictly positive at nodes ``1..n-1``.  ``x = y = 0``
    gives the normalized excursion on the grid.  ``n_steps`` (per-path step
    counts, at most ``n``) lets one call produce bridges of varying length
    with step ``t / n``; the output is then NaN-padded.
    """
    if x < 0 or y < 0:
        raise ValueError("endpoints must be nonnegative")
    rng = as_rng(rng)
    N = 1 if n_paths is None else n_paths
    dt = t / n
    if lattice is None:
        lattice = killed_lattice(model, dt, reach or default_reach(model, t, x, y))
    steps = np.full(N, n, dtype=np.int64) if n_steps is None else np.asarray(n_steps, np.int64)
    if steps.size != N or np.any(steps < 1) or np.any(steps > n):
        raise ValueError("n_steps must lie in [1, n]")
    look = _pinned_look(lattice, y, n)
    vals = run_sequential(np.full(N, float(x)), steps, n - steps, 0.0,
                          lattice.step_kernel(), look, rng, final=np.full(N, float(y)), width=n)
    if n_paths is None:
        vals = vals[0]
    kind = "excursion" if x == 0 and y == 0 else "conditioned-bridge"
    return PathGrid(time_grid(t, n), vals, kind, {"t": t, "n": n, "x": x, "y": y})


@dataclass(frozen=True, eq=False)
class WeightedPaths:
    paths: PathGrid
    weights: np.ndarray
    beta: float
    beta_stderr: float
    ess: float


def sample_meander(model: LevyModel, t: float, n: int, rng, n_paths: int = 1,
                   method: str = "lattice", h: RenewalFunction | None = None,
                   reach: float | None = None, n_steps=None):
    """Meanders of length ``t``: the walk from 0 conditioned to stay positive.

    ``method="lattice"`` samples the grid-skeleton meander directly (returns a
    PathGrid).  ``"weighted"`` returns ``P^up_0`` paths with self-normalized
    weights ``1 / h(X_t)`` and the estimate of ``beta_t = E^up_0[1/h(X_t)]``;
    ``"resampled"`` draws an unweighted sample from those weights.
    """
    rng = as_rng(rng)
    if method == "lattice":
        dt = t / n
        lat = killed_lattice(model, dt, reach or default_reach(model, t))
        steps = np.full(n_paths, n, dtype=np.int64) if n_steps is None \
            else np.asarray(n_steps, np.int64)
        if np.any(steps < 0) or np.any(steps > n):
            raise ValueError("n_steps must lie in [0, n]")
        look = _survival_look(lat, n)
        vals = run_sequential(np.zeros(steps.size), steps, n - steps, 0.0,
                              lat.step_kernel(), look, rng, width=n)
        return PathGrid(time_grid(t, n), vals, "meander", {"t": t, "n": n})
    if method not in ("weighted", "resampled"):
        raise ValueError(f"unknown method {method!r}")
    if n_steps is not None:
        raise ValueError("n_steps is only supported by the lattice method")
    h = h or renewal_analytic(model)
    paths = sample_conditioned(model, 0.0, t, n, rng, n_paths=n_paths, h=h, reach=reach)
    end = paths.values[:, -1]
    inv = 1.0 / np.asarray(h.shape(end), dtype=float)
    beta = float(inv.mean())
    beta_se = float(inv.std(ddof=1) / math.sqrt(inv.size)) if inv.size > 1 else float("nan")
    w = inv / inv.sum()
    ess = float(1.0 / np.sum(w ** 2))
    if ess < 0.1 * inv.size:
        warnings.warn(f"meander weights degenerate: ESS {ess:.0f} of {inv.size}",
                      RuntimeWarning, stacklevel=2)
    paths.kind = "meander"
    if method == "weighted":
        return WeightedPaths(paths, w, beta * h.scale ** -1, beta_se / h.scale, ess)
    idx = rng.choice(inv.size, size=inv.size, p=w)
    return PathGrid(paths.times, paths.values[idx], "meander", dict(paths.meta))


def meander_endpoints(model: LevyModel, dt: float, lengths, rng, reach: float | None = None
                      ) -> tuple[np.ndarray, np.ndarray]:
    """One lattice meander per entry of ``lengths`` (step counts).

    Returns the values at the last node and at node ``floor(m / 2)``.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    n = int(lengths.max()) if lengths.size else 0
    if n == 0:
        return np.zeros(lengths.size), np.zeros(lengths.size)
    pg = sample_meander(model, n * dt, n, rng, n_paths=lengths.size,
                        reach=reach, n_steps=lengths)
    rows = np.arange(lengths.size)
    return pg.values[rows, lengths], pg.values[rows, lengths // 2]


def joint_law_check(model: LevyModel, t: float, n_paths: int, rng, **kw):
    """See :func:`levybridge.verify.joint_law_check`."""
    from .verify import joint_law_check as run
    return run(model, t, n_paths, rng, **kw)


# -- boundary values at 0 -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ZeroBoundaryDensity:
    t: float
    s_split: float
    y: np.ndarray
    values: np.ndarray
    stderr: np.ndarray


def conditioned_density_zero(model: LevyModel, t: float, s_split: float, y_grid, n_mc: int,
                             rng, h: RenewalFunction | None = None,
                             h_dual: RenewalFunction | None = None, n_steps: int = 512,
                             reach: float | None = None, richardson: bool = True
                             ) -> ZeroBoundaryDensity:
    """``p_up_t(0, y)`` as the average of ``p_up_{t-s}(X_s, y)`` over ``X_s ~ P^up_0``.

    ``n_steps`` sets the grid step ``t / n_steps``; ``s_split`` must be a grid
    multiple.  The killed density over ``[s, t]`` comes from the lattice,
    whose discrete monitoring overstates survival by a term of order
    ``dt^(1/alpha)``; with ``richardson`` the lattice is also run at ``dt / 2``
    and the two are extrapolated to remove that term.
    """
    if not 0 < s_split < t:
        raise ValueError("need 0 < s_split < t")
    dt = t / n_steps
    j_s = int(round(s_split / dt))
    if abs(j_s * dt - s_split) > 1e-9 * t:
        raise ValueError("s_split must be a multiple of t / n_steps")
    rng = as_rng(rng)
    h = h or renewal_analytic(model)
    h_dual = h_dual or renewal_analytic(model.dual())
    y_grid = np.asarray(y_grid, dtype=float)
    reach = reach or default_reach(model, t, y_grid.max())
    xs = sample_conditioned(model, 0.0, s_split, j_s, rng, n_paths=n_mc, h=h,
                            reach=reach).values[:, -1]
    m = n_steps - j_s
    lat = killed_lattice(model, dt, reach)
    if richardson:
        fine = killed_lattice(model, dt / 2, reach)
        r = 2.0 ** (1.0 / model.index)

        def killed(y):
            return (r * fine.killed_density(2 * m, xs, y) - lat.killed_density(m, xs, y)) \
                / (r - 1.0)
    else:
        def killed(y):
            return lat.killed_density(m, xs, y)
    hx = np.asarray(h(xs), dtype=float)
    vals = np.empty(y_grid.size)
    se = np.empty(y_grid.size)
    for i, y in enumerate(y_grid):
        f = killed(y) / (hx * float(h_dual(y)))
        vals[i] = f.mean()
        se[i] = f.std(ddof=1) / math.sqrt(f.size)
    return ZeroBoundaryDensity(t, s_split, y_grid, vals, se)


def check_zero_consistency(a: ZeroBoundaryDensity, b: ZeroBoundaryDensity, k: float = 4.0
                           ) -> float:
    """Largest standardized gap between two splits; raises above ``k``."""
    if not np.allclose(a.y, b.y):
        raise ValueError("y grids differ")
    z = np.abs(a.values - b.values) / np.sqrt(a.stderr ** 2 + b.stderr ** 2)
    worst = float(np.nanmax(z))
    if worst > k:
        raise InconsistencyError(
            f"p_up(0, y) differs between s={a.s_split} and s={b.s_split}: {worst:.2f} stderr")
    return worst


def _require(n: int, minimum: int, what: str):
    if n < minimum:
        raise InsufficientSampleError(f"{what}: {n} < {minimum}")
