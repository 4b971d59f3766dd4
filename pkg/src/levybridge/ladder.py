"""Renewal function h of the downward ladder height process.

Closed forms cover Brownian motion without drift (``h(x) = x``) and strictly
stable laws (``h(x) = x^(alpha * rho_hat)`` with ``rho_hat = P(X_1 < 0)``).
Everything else goes through :func:`estimate_renewal_mc`, which counts strict
descending ladder epochs of a random-walk skeleton.

Only ratios of h ever enter a sampler, so the multiplicative constant (the
local-time normalization) is kept separate from the shape: ``h = scale *
shape`` and samplers read ``shape`` only.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .charfn import Kind, LevyModel
from .exceptions import InsufficientSampleError, RequiresMonteCarloError
from .pathsim import as_rng, sample_increments

__all__ = [
    "RenewalKind",
    "RenewalFunction",
    "renewal_analytic",
    "estimate_renewal_mc",
    "ladder_height_pool",
    "loglog_slope",
]


class RenewalKind(str, enum.Enum):
    LINEAR = "AnalyticLinear"
    POWER = "AnalyticPower"
    TABLE = "MonteCarloTable"


@dataclass(frozen=True, eq=False)
class RenewalFunction:
    kind: RenewalKind
    exponent: float = 1.0
    scale: float = 1.0
    table_x: np.ndarray | None = None
    table_h: np.ndarray | None = None
    table_se: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def shape(self, x):
        """h / scale; what the samplers use."""
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        if self.kind is RenewalKind.LINEAR:
            out = xp
        elif self.kind is RenewalKind.POWER:
            out = xp ** self.exponent
        else:
            tx, th = self.table_x, self.table_h
            out = np.interp(xp, tx, th)
            hi = xp > tx[-1]
            if np.any(hi):
                # continue with the log-log slope of the last two nodes
                k = math.log(th[-1] / th[-2]) / math.log(tx[-1] / tx[-2])
                out = np.where(hi, th[-1] * (xp / tx[-1]) ** k, out)
        return float(out) if out.ndim == 0 else out

    def __call__(self, x):
        return self.scale * self.shape(x)

    def scaled(self, c: float) -> "RenewalFunction":
        return replace(self, scale=self.scale * c)


def renewal_analytic(model: LevyModel) -> RenewalFunction:
    """Closed-form h (scale fixed to 1) for Brownian and strictly stable models."""
    if model.kind is Kind.BROWNIAN and model.drift == 0.0:
        return RenewalFunction(RenewalKind.LINEAR, 1.0)
    if model.is_stable and model.is_strictly_stable:
        rho_hat = 1.0 - model.positivity()
        return RenewalFunction(RenewalKind.POWER, model.alpha * rho_hat)
    raise RequiresMonteCarloError(
        f"no closed-form renewal function for {model.kind.value} with these parameters")


def ladder_height_pool(model: LevyModel, dt: float, size: int, rng, cap: int = 2 ** 14,
                       batch: int = 200000) -> tuple[np.ndarray, int]:
    """i.i.d. strict descending ladder height increments of the dt-skeleton.

    Each walker starts at 0 and runs until it first goes strictly below 0;
    the undershoot is one ladder height.  Walkers still positive after
    ``cap`` steps are censored and completed by :func:`_complete_censored`.
    Returns (heights, number censored).
    """
    rng = as_rng(rng)
    out = []
    censored = 0
    remaining = size
    while remaining > 0:
        m = min(batch, remaining)
        pos = np.zeros(m)
        alive = np.arange(m)
        got = np.full(m, np.nan)
        steps = 0
        chunk = 4
        while alive.size and steps < cap:
            inc = sample_increments(model, dt, (alive.size, chunk), rng)
            walk = pos[alive, None] + np.cumsum(inc, axis=1)
            below = walk < 0
            hit = below.any(axis=1)
            first = below.argmax(axis=1)
            idx = alive[hit]
            got[idx] = -walk[hit, first[hit]]
            pos[alive[~hit]] = walk[~hit, -1]
            alive = alive[~hit]
            steps += chunk
            chunk = min(2 * chunk, 1024, max(cap - steps, 1))
        censored += alive.size
        if alive.size:
            got[alive] = _complete_censored(model, pos[alive], got[~np.isnan(got)], rng)
        out.append(got)
        remaining -= m
    return np.concatenate(out), censored


def _complete_censored(model: LevyModel, pos: np.ndarray, finished: np.ndarray, rng) -> np.ndarray:
    """Undershoots for walkers still above 0 when the step cap is reached.

    Such walkers sit far above the boundary compared with the step scale, so
    for strictly stable models the continuum first-passage law applies: from
    height x the undershoot is x * W with W = B / (1 - B), B ~ Beta(1 - a, a),
    a = alpha * rho_hat.  Other models fall back to resampling finished
    undershoots (their ladder heights are light-tailed, so little is lost).
    """
    if model.is_stable and model.is_strictly_stable:
        a = model.alpha * (1.0 - model.positivity())
        if a >= 1.0:
            return np.zeros_like(pos)  # no downward jumps: the walk creeps
        b = rng.beta(1.0 - a, a, size=pos.size)
        return pos * b / (1.0 - b)
    return rng.choice(finished, pos.size)


def estimate_renewal_mc(model: LevyModel, x_grid, walk_step: float, n_paths: int, rng,
                        x_ref: float = 1.0, min_events: int = 100) -> RenewalFunction:
    """Monte Carlo renewal table normalized to ``h(x_ref) = 1``.

    ``h(x)`` is proportional to the expected number of ladder epochs (epoch 0
    included) whose cumulative height is at most ``x``; ``n_paths`` renewal
    sequences are assembled from an i.i.d. pool of ladder height increments.
    """
    rng = as_rng(rng)
    x_grid = np.sort(np.asarray(x_grid, dtype=float))
    if np.any(x_grid <= 0):
        raise ValueError("x_grid must be positive")
    x_eval = np.union1d(x_grid, [x_ref])
    x_max = x_eval[-1]

    counts = np.zeros((n_paths, x_eval.size))
    active = np.arange(n_paths)
    level = np.zeros(n_paths)
    # first guess of epochs per path from a pilot pool
    pilot, _ = ladder_height_pool(model, walk_step, 2000, rng)
    per = int(min(max(1.1 * x_max / max(pilot.mean(), 1e-12), 8), 100000))
    total_censored = 0
    counts += 1.0  # epoch 0 at height 0
    rounds = 0
    while active.size:
        pool, cens = ladder_height_pool(model, walk_step, active.size * per, rng)
        total_censored += cens
        H = pool.reshape(active.size, per)
        cum = level[active, None] + np.cumsum(H, axis=1)
        counts[active] += (cum[:, :, None] <= x_eval[None, None, :]).sum(axis=1)
        level[active] = cum[:, -1]
        active = active[level[active] <= x_max]
        per = max(per // 4, 8)
        rounds += 1
        if rounds > 1000:
            raise InsufficientSampleError("renewal sequences do not reach x_max")
    events = counts[:, -1].sum() - n_paths
    if events < min_events:
        raise InsufficientSampleError(
            f"only {int(events)} ladder events below x = {x_max}; need {min_events}")
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(n_paths)
    ref = mean[np.searchsorted(x_eval, x_ref)]
    keep = np.isin(x_eval, x_grid)
    h = mean / ref
    return RenewalFunction(
        RenewalKind.TABLE, scale=1.0,
        table_x=np.concatenate([[0.0], x_eval[keep]]),
        table_h=np.concatenate([[1.0 / ref], h[keep]]),
        table_se=np.concatenate([[0.0], se[keep] / ref]),
        meta={"walk_step": walk_step, "n_paths": n_paths, "x_ref": x_ref,
              "censored": int(total_censored), "events": int(events)})


def loglog_slope(h: RenewalFunction, x_lo: float, x_hi: float) -> float:
    """Least-squares slope of log h against log x over table nodes in [x_lo, x_hi]."""
    x = h.table_x
    m = (x >= x_lo) & (x <= x_hi) & (x > 0)
    return float(np.polyfit(np.log(x[m]), np.log(h.table_h[m]), 1)[0])
