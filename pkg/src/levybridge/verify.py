"""Verification experiments: each returns a :class:`ReportBundle`.

Every experiment compares two independent constructions of the same grid
law (sampler against sampler).  The Brownian cross-checks against closed
forms use the grid-monitoring correction from :mod:`levybridge.oracles`.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .charfn import LevyModel
from .conditioned import (default_reach, hunt_q_table, killed_lattice, meander_endpoints,
                          sample_conditioned_bridge)
from .exceptions import InsufficientSampleError
from .fluctuation import split_at_min, vervaat
from .ladder import estimate_renewal_mc, loglog_slope, renewal_analytic
from .pathsim import as_rng, sample_bridge, sample_increments, sample_path
from .stats import (EmpiricalSample, ReportBundle, TestReport, bundle, chi2_independence,
                    chisquare_uniform, energy_test, ks_distance, ks_one_sample, ks_two_sample)
from . import oracles

__all__ = [
    "verify_uniform_rho",
    "verify_vervaat",
    "verify_vervaat_oracle",
    "verify_dim",
    "verify_denisov",
    "verify_denisov_bridge",
    "verify_duality",
    "verify_hunt",
    "verify_renewal",
    "joint_law_check",
]


def _seed_of(rng) -> int | None:
    return int(rng) if isinstance(rng, (int, np.integer)) else None


def _meta(model: LevyModel, **kw) -> dict:
    from .charfn import model_to_config
    return dict(model=model_to_config(model), **kw)


# -- uniform argmin --------------------------------------------------------------

def verify_uniform_rho(model: LevyModel, t: float, n_steps: int, n_paths: int, rng,
                       free: bool = False) -> ReportBundle:
    """Chi-square of the grid argmin index over ``n_steps`` cells.

    Under the bridge the argmin over nodes ``0..n-1`` is exactly uniform on
    the grid.  ``free=True`` runs the same test on free paths (argmin over
    all nodes, the last one folded into cell ``n-1``), a negative control.
    """
    seed = _seed_of(rng)
    rng = as_rng(rng)
    if free:
        X = sample_path(model, 0.0, t, n_steps, rng, n_paths=n_paths).values
        idx = np.minimum(np.argmin(X, axis=1), n_steps - 1)
    else:
        X = sample_bridge(model, 0.0, 0.0, t, n_steps, rng, n_paths=n_paths).values
        idx = np.argmin(X[:, :-1], axis=1)
    rep = chisquare_uniform(idx, n_steps, name="uniform-rho" + ("-free" if free else ""),
                            seed=seed, metadata=_meta(model, t=t, n_steps=n_steps,
                                                      n_paths=n_paths, free=free))
    return bundle("uniform-rho", [rep], metadata=rep.metadata)


# -- Vervaat -----------------------------------------------------------------------

def _pair(v: np.ndarray, n: int) -> np.ndarray:
    return np.column_stack([v[:, n // 4], v[:, (3 * n) // 4]])


def verify_vervaat(model: LevyModel, t: float, n_steps: int, n_paths: int, rng,
                   shift: bool = True, n_perm: int = 999) -> ReportBundle:
    """Vervaat transform of bridges against directly sampled excursions.

    Marginals at t/4, t/2, 3t/4 (KS) and the pair at (t/4, 3t/4) (energy
    distance); Bonferroni at 0.01.  ``shift=False`` omits the rotation at
    the minimum (negative control).
    """
    seed = _seed_of(rng)
    rng = as_rng(rng)
    r1, r2, r3 = rng.spawn(3)
    n = n_steps
    br = sample_bridge(model, 0.0, 0.0, t, n, r1, n_paths=n_paths)
    V = vervaat(br, shift=shift).values
    E = sample_conditioned_bridge(model, 0.0, 0.0, t, n, r2, n_paths=n_paths).values
    meta = _meta(model, t=t, n_steps=n, n_paths=n_paths, shift=shift)
    reps = []
    for frac, k in (("t/4", n // 4), ("t/2", n // 2), ("3t/4", (3 * n) // 4)):
        reps.append(ks_two_sample(V[:, k], E[:, k], name=f"vervaat-marginal-{frac}", seed=seed))
    reps.append(energy_test(_pair(V, n), _pair(E, n), r3, n_perm=n_perm,
                            name="vervaat-pair-energy", seed=seed))
    return bundle("vervaat", reps, metadata=meta)


def verify_vervaat_oracle(t: float, n_steps: int, n_paths: int, rng,
                          sigma: float = 1.0) -> ReportBundle:
    """Brownian cross-check: Vervaat of bridges against Bessel(3) bridges.

    The oracle is started and ended at the grid-monitoring shift so that it
    describes the grid skeleton of the excursion.
    """
    from .charfn import brownian
    seed = _seed_of(rng)
    rng = as_rng(rng)
    r1, r2 = rng.spawn(2)
    model = brownian(sigma)
    n = n_steps
    V = vervaat(sample_bridge(model, 0.0, 0.0, t, n, r1, n_paths=n_paths)).values
    shift = oracles.grid_shift(sigma, t / n)
    O = oracles.sample_bessel3_bridge(0.0, 0.0, t, n, r2, n_paths, sigma, shift)
    reps = [ks_two_sample(V[:, k], O[:, k], name=f"vervaat-vs-bessel3-{lab}", seed=seed)
            for lab, k in (("t/4", n // 4), ("t/2", n // 2), ("3t/4", (3 * n) // 4))]
    return bundle("vervaat-oracle", reps, metadata=_meta(model, t=t, n_steps=n,
                                                         n_paths=n_paths, shift=shift))


# -- Durrett-Iglehart-Miller limit ---------------------------------------------

def _rejection_marginal(model, e, t, n, k, size, rng, max_bridges):
    """Node-``k`` values (plus ``e``) of bridges ``0 -> 0`` whose grid minimum exceeds ``-e``."""
    got, tried, need = [], 0, size
    while need > 0:
        batch = min(max(4 * need, 4096), 200_000)
        X = sample_bridge(model, 0.0, 0.0, t, n, rng, n_paths=batch).values
        ok = X.min(axis=1) > -e
        tried += batch
        take = X[ok, k][:need] + e
        got.append(take)
        need -= take.size
        if need > 0 and tried >= max_bridges:
            raise InsufficientSampleError(
                f"eps={e}: acceptance {sum(g.size for g in got) / tried:.2e} too low")
    return np.concatenate(got), size / tried


def _lattice_marginal_cdf(lat, e: float, k: int, n: int) -> np.ndarray:
    """CDF on the lattice nodes of node ``k`` of the killed grid bridge ``e -> e``.

    The density is ``K_k(e, z) K_{n-k}(z, e)``; for a symmetric walk the
    forward factor equals the backward row ``K_k(z, e)``.
    """
    w = lat.pinned(e, k)[-1] * lat.pinned(e, n - k)[-1]
    c = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]))])
    return c / c[-1]


def _draw_from_cdf(z: np.ndarray, cdf: np.ndarray, size: int, rng) -> np.ndarray:
    u = rng.random(size)
    return np.interp(u, cdf, z)


def _bootstrap_monotone(samples, ref: np.ndarray, n_boot: int, rng) -> float:
    """Poisson-bootstrap confidence that ``D(sample_i, ref)`` strictly decreases in ``i``.

    Each replicate gives every value an independent Poisson(1) weight (the
    reference weights are shared by all pairs); with the pooled samples
    sorted once, a replicate costs a few weighted cumulative sums.
    """
    pooled = []
    for a in samples:
        v = np.concatenate([a, ref])
        order = np.argsort(v, kind="stable")
        pooled.append((order, order < a.size))
    ok = 0
    for _ in range(n_boot):
        w_ref = rng.poisson(1.0, ref.size).astype(float)
        d = []
        for a, (order, is_a) in zip(samples, pooled):
            w_a = rng.poisson(1.0, a.size).astype(float)
            w = np.concatenate([w_a, w_ref])[order]
            fa = np.cumsum(np.where(is_a, w, 0.0))
            fr = np.cumsum(np.where(is_a, 0.0, w))
            d.append(float(np.max(np.abs(fa / fa[-1] - fr / fr[-1]))))
        ok += all(d[i + 1] < d[i] for i in range(len(d) - 1))
    return ok / n_boot


def verify_dim(model: LevyModel, t: float, eps_list: Sequence[float], n_steps: int,
               n_paths: int, rng, n_excursions: int | None = None, n_boot: int = 200,
               max_bridges: int = 5_000_000, method: str = "auto",
               n_check: int = 20000) -> ReportBundle:
    """Bridges conditioned on ``min > -eps`` (shifted by ``+eps``) against excursions.

    ``n_paths`` conditioned values per ``eps``.  Reports the KS distance at
    ``t/2`` for every ``eps`` with a strict-decrease check, the bootstrap
    confidence (joint resampling of every sample) that the whole sequence is
    strictly decreasing, and a KS test at the final ``eps``.

    ``method="rejection"`` conditions full bridges by rejection and samples
    excursions with the killed-lattice sampler.  ``method="marginal"`` (the
    ``auto`` choice for symmetric models) draws the ``t/2`` values directly
    from the skeleton killed-bridge marginal, ``K_{n/2}(e, z) K_{n/2}(z, e)``,
    with ``e = 0`` for the excursion, which makes budgets of 10^6 cheap; it
    adds a rejection cross-check with ``n_check`` paths at ``eps_list[1]``.
    """
    seed = _seed_of(rng)
    rng = as_rng(rng)
    eps_list = [float(e) for e in eps_list]
    if method == "auto":
        method = "marginal" if model.is_symmetric else "rejection"
    if method not in ("marginal", "rejection"):
        raise ValueError(f"unknown method {method!r}")
    n = n_steps
    k = n // 2
    n_exc = n_excursions or n_paths
    rs = rng.spawn(len(eps_list) + 3)
    dists, samples, rates = [], [], []
    extra = []
    if method == "marginal":
        if not model.is_symmetric:
            raise ValueError("the marginal method needs a symmetric model")
        lat = killed_lattice(model, t / n, default_reach(model, t, max(eps_list)))
        exc = _draw_from_cdf(lat.z, _lattice_marginal_cdf(lat, 0.0, k, n), n_exc, rs[0])
        for e, r in zip(eps_list, rs[1:-2]):
            m = _draw_from_cdf(lat.z, _lattice_marginal_cdf(lat, e, k, n), n_paths, r)
            samples.append(m)
            rates.append(None)
            dists.append(ks_distance(m, exc))
        e_chk = eps_list[min(1, len(eps_list) - 1)]
        rej, rate = _rejection_marginal(model, e_chk, t, n, k, n_check, rs[-2], max_bridges)
        cdf = _lattice_marginal_cdf(lat, e_chk, k, n)
        extra.append(ks_one_sample(rej, lambda v: np.interp(v, lat.z, cdf),
                                   name=f"dim-rejection-vs-marginal-eps={e_chk}", seed=seed))
    else:
        exc = sample_conditioned_bridge(model, 0.0, 0.0, t, n, rs[0], n_paths=n_exc).values[:, k]
        for e, r in zip(eps_list, rs[1:-2]):
            m, rate = _rejection_marginal(model, e, t, n, k, n_paths, r, max_bridges)
            samples.append(m)
            rates.append(rate)
            dists.append(ks_distance(m, exc))
    reps = []
    steps = [dists[i + 1] - dists[i] for i in range(len(dists) - 1)]
    reps.append(TestReport("dim-strict-decrease", max(steps), None, n_paths, n_exc, seed, 0.0,
                           "residual", {"eps": eps_list, "distances": dists,
                                        "acceptance": rates}))
    conf = _bootstrap_monotone(samples, exc, n_boot, rs[-1])
    reps.append(TestReport("dim-bootstrap-monotone", 1.0 - conf, None, n_boot, None, seed,
                           0.05 + 1e-12, "residual", {"confidence": conf}))
    reps.append(ks_two_sample(samples[-1], exc, name=f"dim-ks-eps={eps_list[-1]}", seed=seed))
    reps.extend(extra)
    return bundle("dim-limit", reps, metadata=_meta(model, t=t, n_steps=n, n_paths=n_paths,
                                                    eps=eps_list, distances=dists,
                                                    method=method))


# -- Denisov ------------------------------------------------------------------------

def _bin_label(lo: float, hi: float) -> str:
    return f"[{lo:g},{hi:g}]"


def verify_denisov(model: LevyModel, t: float, n_steps: int, n_paths: int, rng,
                   bins: Sequence[tuple[float, float]] = ((0.1, 0.2), (0.45, 0.55), (0.8, 0.9)),
                   swap: bool = False, oracle: bool | None = None,
                   control_free: bool = False) -> ReportBundle:
    """Pre/post-minimum pieces of free paths against meanders of matching length.

    For paths with ``rho / t`` in each bin: endpoint and midpoint of the
    reversed pre-piece against dual meanders, of the post-piece against
    primal meanders (one meander per path, of the same number of steps),
    and a chi-square independence test of the two endpoints after scaling
    by their lengths.  ``swap=True`` exchanges primal and dual (negative
    control for asymmetric laws); ``control_free=True`` compares the post
    endpoint with free increments of matching length (negative control).
    For Brownian models a Rayleigh oracle check of the post endpoint is
    added in the bin containing t/2.
    """
    seed = _seed_of(rng)
    rng = as_rng(rng)
    r_paths, r_pre, r_post, r_free = rng.spawn(4)
    n = n_steps
    dt = t / n
    X = sample_path(model, 0.0, t, n, r_paths, n_paths=n_paths)
    dec = split_at_min(X)
    r = np.asarray(dec.minimum.index)
    pre_end = -np.asarray(dec.minimum.value)             # X_0 - min
    post_end = X.values[:, -1] + pre_end                 # X_t - min
    rows = np.arange(n_paths)
    pre_mid = dec.pre.values[rows, r // 2]
    post_mid = dec.post.values[rows, (n - r) // 2]
    primal, dual = model, model.dual()
    if swap:
        primal, dual = dual, primal
    is_bm = model.kind.value == "BrownianWithDrift" and model.drift == 0.0
    oracle = is_bm if oracle is None else oracle
    reach = default_reach(model, t)
    reps = []
    for lo, hi in bins:
        sel = np.nonzero((r * dt >= lo * t) & (r * dt <= hi * t))[0]
        lab = _bin_label(lo, hi)
        if sel.size < 50:
            raise InsufficientSampleError(f"bin {lab} holds {sel.size} paths; widen it")
        m_pre, m_post = r[sel], n - r[sel]
        d_end, d_mid = meander_endpoints(dual, dt, m_pre, r_pre, reach)
        p_end, p_mid = meander_endpoints(primal, dt, m_post, r_post, reach)
        reps += [
            ks_two_sample(pre_end[sel], d_end, name=f"denisov-pre-end-{lab}", seed=seed),
            ks_two_sample(pre_mid[sel], d_mid, name=f"denisov-pre-mid-{lab}", seed=seed),
            ks_two_sample(post_end[sel], p_end, name=f"denisov-post-end-{lab}", seed=seed),
            ks_two_sample(post_mid[sel], p_mid, name=f"denisov-post-mid-{lab}", seed=seed),
        ]
        a = 1.0 / model.index
        scale_pre = np.maximum(m_pre * dt, dt) ** a
        scale_post = np.maximum(m_post * dt, dt) ** a
        reps.append(chi2_independence(pre_end[sel] / scale_pre, post_end[sel] / scale_post,
                                      name=f"denisov-independence-{lab}", seed=seed))
        if control_free:
            free = np.array([sample_increments(model, m * dt, 1, r_free)[0] for m in m_post])
            reps.append(ks_two_sample(post_end[sel], free, name=f"denisov-control-free-{lab}",
                                      seed=seed))
        if oracle and lo <= 0.5 <= hi:
            sig = model.sigma
            z = post_end[sel] / np.sqrt(m_post * dt)
            sh = oracles.grid_shift(sig, dt) / math.sqrt((1 - 0.5 * (lo + hi)) * t)
            reps.append(ks_one_sample(z, lambda y: oracles.brownian_meander_end_cdf(
                y, 1.0, sig, sh), name=f"denisov-post-end-rayleigh-{lab}", seed=seed))
    return bundle("denisov", reps, metadata=_meta(model, t=t, n_steps=n, n_paths=n_paths,
                                                  bins=[list(b) for b in bins], swap=swap))


def _bridge_min_midpoints(model: LevyModel, t: float, n: int, n_paths: int, rng):
    """Argmin, depth of the minimum and midpoints of the pieces, for bridges 0 -> 0.

    Equivalent to reading the midpoints off :func:`split_at_min`, but the
    bridges are generated in blocks so that only four numbers per path are
    held in memory.
    """
    r = np.empty(n_paths, dtype=np.int64)
    y, pre_mid, post_mid = (np.empty(n_paths) for _ in range(3))
    block = 16 * 4096
    for c0 in range(0, n_paths, block):
        c1 = min(n_paths, c0 + block)
        B = sample_bridge(model, 0.0, 0.0, t, n, rng, n_paths=c1 - c0).values
        rows = np.arange(c1 - c0)
        k = np.argmin(B, axis=1)
        m = B[rows, k]
        r[c0:c1], y[c0:c1] = k, -m
        pre_mid[c0:c1] = B[rows, k - k // 2] - m
        post_mid[c0:c1] = B[rows, k + (n - k) // 2] - m
    return r, y, pre_mid, post_mid


def verify_denisov_bridge(model: LevyModel, t: float, n_steps: int, n_paths: int, rng,
                          bins: Sequence[tuple[float, float, float, float]] = (
                              (0.2, 0.3, 0.4, 0.5), (0.45, 0.55, 0.45, 0.55),
                              (0.7, 0.8, 0.3, 0.4)),
                          swap: bool = False, oracle: bool | None = None) -> ReportBundle:
    """Pre/post pieces of bridges ``0 -> 0`` given ``(rho, -min)`` in 2-d bins.

    Each bin ``(s_lo, s_hi, y_lo, y_hi)`` (``s`` as a fraction of ``t``)
    compares the midpoint of the reversed pre-piece with dual killed bridges
    ``0 -> y_c`` and that of the post-piece with primal ones, lengths
    matched path by path and ``y_c`` the bin center.  Midpoints are compared
    after subtracting half the endpoint, which removes the first-order
    effect of the spread of ``-min`` inside the bin.
    """
    seed = _seed_of(rng)
    rng = as_rng(rng)
    r_paths, r_pre, r_post, r_orc = rng.spawn(4)
    n = n_steps
    dt = t / n
    r, y, pre_mid, post_mid = _bridge_min_midpoints(model, t, n, n_paths, r_paths)
    primal, dual = model, model.dual()
    if swap:
        primal, dual = dual, primal
    is_bm = model.kind.value == "BrownianWithDrift" and model.drift == 0.0
    oracle = is_bm if oracle is None else oracle
    reps = []
    for s_lo, s_hi, y_lo, y_hi in bins:
        sel = np.nonzero((r * dt >= s_lo * t) & (r * dt <= s_hi * t) & (y >= y_lo) & (y <= y_hi))[0]
        lab = f"s{_bin_label(s_lo, s_hi)}y{_bin_label(y_lo, y_hi)}"
        if sel.size < 50:
            raise InsufficientSampleError(f"bin {lab} holds {sel.size} paths; coarsen it")
        yc = 0.5 * (y_lo + y_hi)
        reach = default_reach(model, t, yc)
        m_pre, m_post = r[sel], n - r[sel]
        sides = (("pre", dual, m_pre, pre_mid[sel], r_pre),
                 ("post", primal, m_post, post_mid[sel], r_post))
        for name, mdl, m, mid, rr in sides:
            lat = killed_lattice(mdl, dt, reach)
            cb = sample_conditioned_bridge(mdl, 0.0, yc, t, n, rr, n_paths=sel.size,
                                           lattice=lat, n_steps=m).values
            ref = cb[np.arange(sel.size), m // 2] - 0.5 * yc
            reps.append(ks_two_sample(mid - 0.5 * y[sel], ref,
                                      name=f"denisov-bridge-{name}-mid-{lab}", seed=seed))
            if oracle:
                sh = oracles.grid_shift(model.sigma, dt)
                oc = np.array([oracles.sample_bessel3_bridge(0.0, yy, mm * dt, mm, r_orc, 1,
                                                             model.sigma, sh)[0, mm // 2]
                               for yy, mm in zip(y[sel], m)])
                reps.append(ks_two_sample(mid, oc, name=f"denisov-bridge-{name}-bessel3-{lab}",
                                          seed=seed))
    return bundle("denisov-bridge", reps,
                  metadata=_meta(model, t=t, n_steps=n, n_paths=n_paths,
                                 bins=[list(b) for b in bins], swap=swap))


# -- killed densities ------------------------------------------------------------------

def verify_duality(model: LevyModel, t: float, grid: Sequence[float], n_bridges: int,
                   n_steps: int, rng, k: float = 3.0) -> ReportBundle:
    """``q_t(x, y) = q_dual_t(y, x)`` on ``grid x grid`` within ``k`` joint stderr.

    Grid survival without step doubling: the time reversal of a grid bridge
    from x to y is a grid bridge of the dual walk from y to x, so both sides
    carry the same monitoring bias.
    """
    seed = _seed_of(rng)
    rng = as_rng(rng)
    r1, r2 = rng.spawn(2)
    g = np.asarray(grid, dtype=float)
    q = hunt_q_table(model, g, g, t, n_bridges, n_steps, r1, richardson=False)
    if model.is_symmetric:
        qd = q
    else:
        qd = hunt_q_table(model.dual(), g, g, t, n_bridges, n_steps, r2, richardson=False)
    z = np.abs(q.values - qd.values.T) / np.sqrt(q.stderr ** 2 + qd.stderr.T ** 2)
    np.fill_diagonal(z, 0.0) if qd is q else None
    worst = float(np.nanmax(z))
    rep = TestReport("duality-max-z", worst, None, n_bridges, n_bridges, seed, k, "residual",
                     {"q": q.values, "stderr": q.stderr, "grid": g})
    return bundle("duality", [rep], metadata=_meta(model, t=t, n_steps=n_steps,
                                                   n_bridges=n_bridges, grid=g))


def verify_hunt(model: LevyModel, x: float, y: float, t: float, n_bridges: int, n_steps: int,
                rng, reference: float | None = None, k: float = 3.0) -> ReportBundle:
    """Hunt estimate with step doubling against a reference value (Brownian: reflection)."""
    from .conditioned import hunt_q
    seed = _seed_of(rng)
    est = hunt_q(model, x, y, t, n_bridges, n_steps, as_rng(rng))
    if reference is None:
        if model.kind.value != "BrownianWithDrift" or model.drift != 0.0:
            raise ValueError("a reference value is needed for non-Brownian models")
        reference = oracles.reflection_q(x, y, t, model.sigma)
    z = abs(est.q - reference) / est.stderr
    reps = [TestReport("hunt-q-z", z, None, n_bridges, None, seed, k, "residual",
                       {"q": est.q, "stderr": est.stderr, "reference": reference,
                        "survival_fine": est.survival, "survival_coarse": est.survival_coarse}),
            TestReport("hunt-q-stderr", est.stderr, None, n_bridges, None, seed, 1e-3,
                       "residual", {})]
    return bundle("hunt-q", reps, metadata=_meta(model, x=x, y=y, t=t, n_steps=n_steps,
                                                 n_bridges=n_bridges))


# -- renewal --------------------------------------------------------------------------

def verify_renewal(model: LevyModel, x_grid, walk_step: float, n_paths: int, rng,
                   slope_tol: float = 0.05, refine_tol: float = 0.02,
                   linear_tol: float = 0.05) -> ReportBundle:
    """Monte Carlo renewal table against its analytic form, plus a (dt, dt/2) refinement."""
    seed = _seed_of(rng)
    rng = as_rng(rng)
    r1, r2 = rng.spawn(2)
    x_grid = np.asarray(x_grid, dtype=float)
    exact = renewal_analytic(model)
    h1 = estimate_renewal_mc(model, x_grid, walk_step, n_paths, r1)
    h2 = estimate_renewal_mc(model, x_grid, walk_step / 2, n_paths, r2)
    lo, hi = float(x_grid.min()), float(x_grid.max())
    s1, s2 = loglog_slope(h1, lo, hi), loglog_slope(h2, lo, hi)
    xs = h1.table_x[1:]
    rel = float(np.max(np.abs(h1.table_h[1:] / (exact.shape(xs) / exact.shape(1.0)) - 1.0)))
    reps = [TestReport("renewal-slope", abs(s1 - exact.exponent), None, n_paths, None, seed,
                       slope_tol, "residual", {"slope": s1, "exponent": exact.exponent}),
            TestReport("renewal-refinement", abs(s1 - s2), None, n_paths, None, seed,
                       refine_tol, "residual", {"slope_dt": s1, "slope_dt2": s2}),
            TestReport("renewal-relative", rel, None, n_paths, None, seed, linear_tol,
                       "residual", {"x": xs, "h": h1.table_h[1:]})]
    return bundle("renewal", reps, metadata=_meta(model, walk_step=walk_step,
                                                  n_paths=n_paths, x_grid=x_grid))


# -- joint law at the minimum --------------------------------------------------------

def joint_law_check(model: LevyModel, t: float, n_paths: int, rng, n_steps: int = 512,
                    s_bin: tuple[float, float] = (0.45, 0.55), bins: int = 4) -> ReportBundle:
    """Law of ``(rho, -min, X_t - min)`` under the free law, within a bin of ``rho``.

    ``-min`` against dual meander endpoints and ``X_t - min`` against primal
    ones (lengths matched per path), plus a chi-square independence test of
    the two after scaling by their lengths.  ``s_bin = (0, 1)`` gives the
    unconditional laws.
    """
    seed = _seed_of(rng)
    rng = as_rng(rng)
    r_paths, r_pre, r_post = rng.spawn(3)
    n = n_steps
    dt = t / n
    X = sample_path(model, 0.0, t, n, r_paths, n_paths=n_paths).values
    r = np.argmin(X, axis=1)
    m_min = -X[np.arange(n_paths), r]
    m_post = X[:, -1] + m_min
    sel = np.nonzero((r * dt >= s_bin[0] * t) & (r * dt <= s_bin[1] * t))[0]
    if sel.size < 50:
        raise InsufficientSampleError(f"bin {s_bin} holds {sel.size} paths; widen it")
    reach = default_reach(model, t)
    d = meander_endpoints(model.dual(), dt, r[sel], r_pre, reach)[0]
    p = meander_endpoints(model, dt, n - r[sel], r_post, reach)[0]
    a = 1.0 / model.index
    reps = [ks_two_sample(m_min[sel], d, name="joint-min-vs-dual-meander", seed=seed),
            ks_two_sample(m_post[sel], p, name="joint-post-vs-meander", seed=seed)]
    both = (r[sel] > 0) & (r[sel] < n)
    reps.append(chi2_independence(m_min[sel][both] / (r[sel][both] * dt) ** a,
                                  m_post[sel][both] / ((n - r[sel][both]) * dt) ** a,
                                  bins=bins, name="joint-independence", seed=seed))
    return bundle("joint-law", reps, metadata=_meta(model, t=t, n_steps=n, n_paths=n_paths,
                                                    s_bin=list(s_bin)))
