"""Compiled inner loops for sequential inverse-CDF path sampling.

One step from ``x`` draws ``z = x + o`` where the offset ``o`` lives on a
fixed (possibly non-uniform) node set.  The unnormalized target is

    w(z) = step_w(o) * g_k(z) * 1{z > lower}

with ``step_w`` the one-step density at the offsets and ``g_k`` a tabulated
"look-ahead" factor (a transition density to the endpoint, a survival
probability, ...).  Between nodes the target is linear, so the draw is an
exact sample from the piecewise-linear interpolant.
"""
from __future__ import annotations

import math

import numba
import numpy as np

DEN_FLOOR = 1e-300

STATUS_OK = 0
STATUS_DEGENERATE = 1


@numba.njit(cache=True, inline="always")
def _lookup(tab, lo, dx, m, arg, flat):
    pos = (arg - lo) / dx
    if pos < 0.0:
        return 0.0
    if pos >= m - 1:
        if flat:
            return tab[m - 1]
        if pos > m - 1 + 1e-9:
            return 0.0
        return tab[m - 1]
    i = int(pos)
    fr = pos - i
    return tab[i] * (1.0 - fr) + tab[i + 1] * fr


@numba.njit(cache=True)
def sequential_sample(start, n_steps, row0, lower, offsets, step_w,
                      tables, tab_lo, tab_dx, tab_len, tab_idx,
                      g_amp, g_scale, g_shift, flat, uniforms, final, out):
    """Fill ``out[i, :n_steps[i] + 1]`` for every path ``i``.

    Path ``i`` uses look-ahead rows ``row0[i] + k`` for its steps ``k``.  When
    ``final[i]`` is finite the last step is pinned to it.  Returns a status
    code and the index of the offending path (or -1).
    """
    n_paths = start.shape[0]
    W = offsets.shape[0]
    w = np.empty(W + 1)
    zz = np.empty(W + 1)
    cum = np.empty(W + 1)
    for i in range(n_paths):
        x = start[i]
        out[i, 0] = x
        K = n_steps[i]
        pinned = math.isfinite(final[i])
        for k in range(K):
            if pinned and k == K - 1:
                x = final[i]
                out[i, k + 1] = x
                break
            r = row0[i] + k
            t = tab_idx[r]
            tab = tables[t]
            lo = tab_lo[t]
            dx = tab_dx[t]
            m = tab_len[t]
            amp = g_amp[r]
            sc = g_scale[r]
            sh = g_shift[r]
            # nodes, with the boundary point inserted where it cuts the window
            n = 0
            for j in range(W):
                z = x + offsets[j]
                if z <= lower:
                    if j + 1 < W and x + offsets[j + 1] > lower:
                        # boundary inside cell (j, j+1)
                        o = lower - x
                        fr = (o - offsets[j]) / (offsets[j + 1] - offsets[j])
                        sw = step_w[j] * (1.0 - fr) + step_w[j + 1] * fr
                        zz[n] = lower
                        w[n] = sw * amp * _lookup(tab, lo, dx, m, sc * lower + sh, flat)
                        n += 1
                    continue
                zz[n] = z
                w[n] = step_w[j] * amp * _lookup(tab, lo, dx, m, sc * z + sh, flat)
                n += 1
            total = 0.0
            cum[0] = 0.0
            for j in range(1, n):
                total += 0.5 * (w[j] + w[j - 1]) * (zz[j] - zz[j - 1])
                cum[j] = total
            if not (total > DEN_FLOOR):
                return STATUS_DEGENERATE, i
            target = uniforms[i, k] * total
            # binary search for the cell
            a, b = 0, n - 1
            while b - a > 1:
                mid = (a + b) // 2
                if cum[mid] <= target:
                    a = mid
                else:
                    b = mid
            v = target - cum[a]
            wa = w[a]
            wb = w[b]
            L = zz[b] - zz[a]
            disc = wa * wa + 2.0 * (wb - wa) * v / L
            if disc < 0.0:
                disc = 0.0
            den = wa + math.sqrt(disc)
            if den > 0.0:
                s = 2.0 * v / den
            else:
                s = 0.5 * L
            if s < 0.0:
                s = 0.0
            elif s > L:
                s = L
            x = zz[a] + s
            if x <= lower:
                x = math.nextafter(lower, math.inf)
            out[i, k + 1] = x
        for k in range(K + 1, out.shape[1]):
            out[i, k] = np.nan
    return STATUS_OK, -1
