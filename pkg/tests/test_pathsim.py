import math

import numpy as np
import pytest
from scipy import stats as sst

from levybridge.charfn import brownian, brownian_plus_cp, symmetric_stable
from levybridge.density import DensityFamily, invert_density
from levybridge.exceptions import RequiresDensityError
from levybridge.pathsim import (PathGrid, bridge_rn_weight, make_rng, sample_bridge,
                                sample_increments, sample_path, stable_rvs, time_grid)
from levybridge.stats import ks_two_sample

BM = brownian()
CAUCHY = symmetric_stable(1.0)


def test_time_grid_uniform():
    g = time_grid(2.0, 8)
    assert g[0] == 0 and g[-1] == 2.0 and np.allclose(np.diff(g), 0.25)


def test_pathgrid_rejects_bad_times():
    with pytest.raises(ValueError):
        PathGrid(np.array([0.0, 0.5, 0.4]), np.zeros(3))


@pytest.mark.parametrize("model,var", [(brownian(sigma=0.7, drift=0.3), 0.49),
                                       (brownian_plus_cp(1.0, 2.0, 0.5, 0.3), 1 + 2 * 0.34)])
def test_increment_variance_matches_model(model, var, rng):
    dens = None if model.kind.value == "BrownianWithDrift" else invert_density(model, 1.0)
    p = sample_path(model, 0.0, 1.0, 1, rng, n_paths=100_000, density=dens)
    inc = p.values[:, 1] - p.values[:, 0]
    se = var * math.sqrt(2 / inc.size) * 2  # loose: excess kurtosis of the jump part
    assert abs(inc.var() - var) < 4 * se


def test_brownian_endpoint_gaussian(rng):
    p = sample_path(BM, 0.0, 2.0, 16, rng, n_paths=5000)
    assert sst.kstest(p.values[:, -1], sst.norm(scale=math.sqrt(2)).cdf).pvalue > 0.01


def test_stable_rvs_against_scipy(rng):
    x = stable_rvs(1.5, 0.8, 5000, rng)
    assert sst.kstest(x, lambda z: sst.levy_stable.cdf(z, 1.5, 0.8)).pvalue > 0.01


def test_spatial_homogeneity():
    a = sample_path(CAUCHY, 5.0, 1.0, 20, make_rng(3), n_paths=4)
    b = sample_path(CAUCHY, 0.0, 1.0, 20, make_rng(3), n_paths=4)
    # same draws; only the rounding of x + cumulative sum differs
    np.testing.assert_allclose(a.values - 5.0, b.values, rtol=0, atol=1e-13)


def test_seed_determinism():
    m = symmetric_stable(1.5)
    a = sample_bridge(m, 0.0, 0.0, 1.0, 16, make_rng(11), n_paths=50)
    b = sample_bridge(m, 0.0, 0.0, 1.0, 16, make_rng(11), n_paths=50)
    assert np.array_equal(a.values, b.values)


def test_compound_poisson_needs_density(rng):
    with pytest.raises(RequiresDensityError):
        sample_increments(brownian_plus_cp(1.0, 1.0), 0.1, 10, rng)


def test_brownian_bridge_midpoint(rng):
    for method in ("auto", "sequential"):
        p = sample_bridge(BM, 0.0, 0.0, 1.0, 16, rng, n_paths=5000, method=method)
        assert sst.kstest(p.values[:, 8], sst.norm(scale=0.5).cdf).pvalue > 0.01
        assert np.all(p.values[:, -1] == 0.0) and np.all(p.values[:, 0] == 0.0)


def test_one_step_bridge_is_endpoints(rng):
    for m in (BM, CAUCHY):
        p = sample_bridge(m, 0.3, -1.2, 1.0, 1, rng)
        np.testing.assert_array_equal(p.values, [0.3, -1.2])


def test_cauchy_bridge_midpoint_mean(rng):
    p = sample_bridge(CAUCHY, 0.0, 0.0, 1.0, 8, rng, n_paths=20000)
    mid = p.values[:, 4]
    assert abs(mid.mean()) < 3 * mid.std() / math.sqrt(mid.size)
    assert np.all(p.values[:, -1] == 0.0)


def test_rn_weight_values():
    fam = DensityFamily(BM)
    assert float(bridge_rn_weight(fam, None, 0.0, 0.0, 1.0)) == pytest.approx(1.0)
    prefix = PathGrid(np.array([0.0, 0.5]), np.array([0.0, 0.0]))
    assert float(bridge_rn_weight(fam, prefix, 0.0, 0.0, 1.0)) == pytest.approx(math.sqrt(2),
                                                                                rel=1e-6)


def test_rn_weight_importance_identity(rng):
    """Free paths reweighted by the RN density reproduce the bridge marginal."""
    fam = DensityFamily(BM)
    free = sample_path(BM, 0.0, 0.5, 1, rng, n_paths=200_000)
    w = bridge_rn_weight(fam, free, 0.0, 0.0, 1.0)
    g = (free.values[:, -1] >= 0) & (free.values[:, -1] <= 1)
    est = w * g
    bridge = sample_bridge(BM, 0.0, 0.0, 1.0, 2, rng, n_paths=200_000).values[:, 1]
    gb = (bridge >= 0) & (bridge <= 1)
    se = math.hypot(est.std() / math.sqrt(est.size), gb.std() / math.sqrt(gb.size))
    assert abs(est.mean() - gb.mean()) < 3 * se


def test_free_conditioned_on_endpoint_approaches_bridge(rng):
    free = sample_path(BM, 0.0, 1.0, 8, rng, n_paths=400_000)
    bridge = sample_bridge(BM, 0.0, 0.0, 1.0, 8, rng, n_paths=20000).values[:, 4]
    dist = []
    for delta in (1.0, 0.3, 0.05):
        sel = free.values[np.abs(free.values[:, -1]) < delta, 4]
        dist.append(sst.ks_2samp(sel, bridge).statistic)
    assert dist[0] > dist[1] > dist[2] or dist[2] < 0.03


def test_bridge_markov_property(rng):
    """Given X_k, the law of X_{k+1} does not depend on X_{k-1}."""
    p = sample_bridge(BM, 0.0, 0.0, 1.0, 8, rng, n_paths=200_000).values
    prev, cur, nxt = p[:, 3], p[:, 4], p[:, 5]
    sel = np.abs(cur) < 0.05
    prev_bin = np.digitize(prev[sel], np.quantile(prev[sel], [0.25, 0.5, 0.75]))
    next_bin = np.digitize(nxt[sel], np.quantile(nxt[sel], [0.25, 0.5, 0.75]))
    table = np.histogram2d(prev_bin, next_bin, bins=[4, 4])[0]
    assert sst.chi2_contingency(table).pvalue > 0.01


def test_ks_helper_accepts_bridge_marginals(rng):
    a = sample_bridge(CAUCHY, 0.0, 0.0, 1.0, 8, rng, n_paths=3000).values[:, 4]
    b = sample_bridge(CAUCHY, 0.0, 0.0, 1.0, 8, rng, n_paths=3000).values[:, 4]
    assert ks_two_sample(a, b).passed
