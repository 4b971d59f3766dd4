"""Closed-form Brownian laws used as independent references.

A walk monitored on a grid of step ``dt`` behaves, to first order, like the
continuous process with the barrier moved down by ``BGK * sigma * sqrt(dt)``
(Broadie, Glasserman and Kou; Asmussen, Glynn and Pitman).  The ``shift``
arguments below apply that correction so grid-skeleton samples can be
compared with continuum formulas at Monte Carlo precision.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .pathsim import as_rng

__all__ = [
    "BGK",
    "grid_shift",
    "arcsine_cdf",
    "rayleigh_cdf",
    "maxwell_cdf",
    "brownian_min_cdf",
    "brownian_meander_end_cdf",
    "excursion_marginal_cdf",
    "sample_bessel3_bridge",
    "sample_bessel3",
    "killed_bridge_survival",
    "reflection_q",
]

ZETA_HALF = -1.4603545088095868  # Riemann zeta(1/2)
BGK = -ZETA_HALF / math.sqrt(2 * math.pi)


def grid_shift(sigma: float, dt: float) -> float:
    return BGK * sigma * math.sqrt(dt)


def arcsine_cdf(u):
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return 2.0 / math.pi * np.arcsin(np.sqrt(u))


def rayleigh_cdf(x, scale: float = 1.0):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return -np.expm1(-0.5 * (x / scale) ** 2)


def maxwell_cdf(x, scale: float = 1.0):
    return stats.maxwell.cdf(x, scale=scale)


def brownian_min_cdf(y, t: float = 1.0, sigma: float = 1.0, shift: float = 0.0):
    """``P(-min_{[0,t]} B <= y)``, optionally for a barrier lowered by ``shift``."""
    y = np.maximum(np.asarray(y, dtype=float), 0.0)
    return 2.0 * stats.norm.cdf((y + shift) / (sigma * math.sqrt(t))) - 1.0


def brownian_meander_end_cdf(y, t: float = 1.0, sigma: float = 1.0, shift: float = 0.0):
    """Endpoint CDF of Brownian motion started at ``shift`` and killed at 0, minus ``shift``.

    With ``shift = 0`` this is the Rayleigh law of the meander endpoint.
    """
    y = np.maximum(np.asarray(y, dtype=float), 0.0)
    if shift == 0.0:
        return rayleigh_cdf(y, sigma * math.sqrt(t))
    s = sigma * math.sqrt(t)
    a = shift
    u = y + a
    num = (stats.norm.cdf((u - a) / s) - stats.norm.cdf(-a / s)) \
        - (stats.norm.cdf((u + a) / s) - stats.norm.cdf(a / s))
    return num / (2.0 * stats.norm.cdf(a / s) - 1.0)


def excursion_marginal_cdf(y, u: float, t: float = 1.0, sigma: float = 1.0):
    """Brownian excursion of length ``t`` at time ``u``: Maxwell with scale sqrt(u (t-u) / t)."""
    return maxwell_cdf(y, sigma * math.sqrt(u * (t - u) / t))


def sample_bessel3_bridge(a: float, b: float, t: float, n: int, rng, n_paths: int,
                          sigma: float = 1.0, shift: float = 0.0) -> np.ndarray:
    """Norm of a 3-d Brownian bridge from ``(a + shift, 0, 0)`` to ``(b + shift, 0, 0)``,
    minus ``shift``, on ``n`` steps.  ``a = b = 0`` gives the excursion."""
    rng = as_rng(rng)
    u = np.arange(n + 1) / n
    sd = sigma * math.sqrt(t / n)
    out = np.zeros((n_paths, n + 1))
    for d in range(3):
        w = np.zeros((n_paths, n + 1))
        np.cumsum(sd * rng.standard_normal((n_paths, n)), axis=1, out=w[:, 1:])
        br = w - u * w[:, -1:]
        if d == 0:
            br = br + (a + shift) * (1 - u) + (b + shift) * u
        out += br ** 2
    return np.sqrt(out) - shift


def sample_bessel3(t: float, n: int, rng, n_paths: int, sigma: float = 1.0) -> np.ndarray:
    """Bessel(3) process from 0: norm of 3-d Brownian motion."""
    rng = as_rng(rng)
    sd = sigma * math.sqrt(t / n)
    out = np.zeros((n_paths, n + 1))
    for _ in range(3):
        w = np.zeros((n_paths, n + 1))
        np.cumsum(sd * rng.standard_normal((n_paths, n)), axis=1, out=w[:, 1:])
        out += w ** 2
    return np.sqrt(out)


def killed_bridge_survival(x: float, y: float, t: float, sigma: float = 1.0) -> float:
    """``P(min > 0)`` for a Brownian bridge from x > 0 to y > 0."""
    return -math.expm1(-2.0 * x * y / (sigma ** 2 * t))


def reflection_q(x: float, y: float, t: float, sigma: float = 1.0) -> float:
    """Killed density ``p_t(x, y) - p_t(x, -y)`` of Brownian motion."""
    s = sigma * math.sqrt(t)
    return float(stats.norm.pdf((y - x) / s) / s - stats.norm.pdf((y + x) / s) / s)
