"""Killed and conditioned densities and samplers.

Brownian oracles are written here from scipy distributions: Bessel(3) at
time t is chi(3) with scale sqrt(t), the Bessel(3) bridge from 0 to 0 at
time s is chi(3) with scale sqrt(s(t-s)/t), and the meander endpoint is
Rayleigh.  Grid skeletons sit above the continuum barrier by
0.5826 sqrt(dt) (the Broadie-Glasserman-Kou constant -zeta(1/2)/sqrt(2 pi)),
so killed-lattice samples are shifted by that amount before comparison.
The P-up chain is an h-transform with the continuum h and needs no shift.
"""
import math

import numpy as np
import pytest
from scipy import special, stats as sst

from levybridge.charfn import asymmetric_stable, brownian, symmetric_stable
from levybridge.conditioned import (DualityMeasure, check_ck_conditioned,
                                    check_zero_consistency, conditioned_density,
                                    conditioned_density_zero, hunt_q, hunt_q_table,
                                    joint_law_check, killed_density_lattice, sample_conditioned,
                                    sample_conditioned_bridge, sample_meander)
from levybridge.exceptions import InconsistencyError
from levybridge.ladder import renewal_analytic
from levybridge.pathsim import sample_bridge, sample_path
from levybridge.stats import EmpiricalSample, ks_one_sample

BM = brownian()
H = renewal_analytic(BM)
BGK_CONST = -special.zeta(0.5) / math.sqrt(2 * math.pi)
Q_11 = (1 - math.exp(-2)) / math.sqrt(2 * math.pi)


def shift(n, t=1.0):
    return BGK_CONST * math.sqrt(t / n)


def test_bgk_constant_value():
    assert BGK_CONST == pytest.approx(0.5826, abs=1e-4)


def test_hunt_q_reflection_oracle():
    est = hunt_q(BM, 1.0, 1.0, 1.0, 40000, 256, np.random.default_rng(1))
    assert abs(est.q - Q_11) < 3 * est.stderr
    assert est.q <= est.p


def test_hunt_q_bounded_by_p_stable(rng):
    est = hunt_q(symmetric_stable(1.5), 0.5, 0.8, 1.0, 2000, 64, rng)
    assert 0 < est.q <= est.p


def test_hunt_duality_symmetric(rng):
    a = hunt_q(BM, 1.0, 2.0, 1.0, 20000, 128, rng)
    b = hunt_q(BM, 2.0, 1.0, 1.0, 20000, 128, rng)
    assert abs(a.q - b.q) < 3 * math.hypot(a.stderr, b.stderr)


def test_hunt_rejects_nonpositive_start(rng):
    with pytest.raises(ValueError):
        hunt_q(BM, 0.0, 1.0, 1.0, 10, 8, rng)


def test_lattice_killed_density_against_reflection():
    xs = np.array([0.5, 1.0, 2.0])
    ys = np.array([0.5, 1.0, 2.0])
    q = killed_density_lattice(BM, 1.0, xs, ys, 1024)
    # continuum barrier moved down by the BGK shift
    b = shift(1024)
    X, Y = np.meshgrid(xs + b, ys + b, indexing="ij")
    ref = sst.norm.pdf(Y - X) - sst.norm.pdf(Y + X)
    np.testing.assert_allclose(q.values, ref, rtol=2e-3)
    assert np.all(q.values > 0) and np.all(q.values <= sst.norm.pdf(Y - X) + 1e-12)
    # symmetry of the table (duality for a symmetric model)
    np.testing.assert_allclose(q.values, q.values.T, rtol=1e-10, atol=1e-14)


def test_conditioned_density_value():
    q = hunt_q_table(BM, [1.0], [1.0], 1.0, 20000, 256, np.random.default_rng(3))
    p = conditioned_density(q, H, H)
    assert p.values[0, 0] == q.values[0, 0]
    assert abs(p.values[0, 0] - Q_11) < 3 * p.stderr[0, 0]


def test_conditioned_density_requires_positive_points():
    q = killed_density_lattice(BM, 1.0, [0.5], [0.5], 64)
    q0 = type(q)(q.t, np.array([0.0]), q.y, q.values, q.stderr)
    with pytest.raises(ValueError):
        conditioned_density(q0, H, H)


def test_conditioned_ck_residual():
    n = 512
    w = np.linspace(0.01, 8.0, 800)
    xs = np.array([0.5, 1.0, 1.5])
    ys = np.array([0.5, 1.0, 1.5])
    ps = conditioned_density(killed_density_lattice(BM, 0.5, xs, w, n // 2, reach=12.0), H, H)
    pu = conditioned_density(killed_density_lattice(BM, 0.5, w, ys, n // 2, reach=12.0), H, H)
    pt = conditioned_density(killed_density_lattice(BM, 1.0, xs, ys, n, reach=12.0), H, H)
    res, se = check_ck_conditioned(ps, pu, pt, DualityMeasure(H, H))
    assert res < 2e-3 * pt.values.max()


def test_zero_boundary_brownian_and_split_consistency():
    y = np.array([0.5, 1.0, 1.5, 2.5])
    a = conditioned_density_zero(BM, 1.0, 0.25, y, 20000, np.random.default_rng(4), n_steps=256)
    b = conditioned_density_zero(BM, 1.0, 0.5, y, 20000, np.random.default_rng(5), n_steps=256)
    assert check_zero_consistency(a, b) <= 4.0
    # h(x) = x: p_up_1(0, y) = sqrt(2/pi) exp(-y^2/2); the skeleton adds a few percent of bias
    np.testing.assert_allclose(a.values, math.sqrt(2 / math.pi) * np.exp(-y ** 2 / 2),
                               rtol=0.08)
    far = conditioned_density_zero(BM, 1.0, 0.5, [6.0], 2000, np.random.default_rng(6),
                                   n_steps=256)
    assert far.values[0] < 1e-5


def test_zero_consistency_detects_disagreement():
    y = np.array([1.0])
    a = conditioned_density_zero(BM, 1.0, 0.5, y, 2000, np.random.default_rng(4), n_steps=64)
    b = type(a)(a.t, 0.25, a.y, a.values * 1.5, a.stderr)
    with pytest.raises(InconsistencyError):
        check_zero_consistency(a, b)


def test_conditioned_from_zero_is_bessel3():
    n = 256
    p = sample_conditioned(BM, 0.0, 1.0, n, np.random.default_rng(7), n_paths=20000)
    assert np.all(p.values[:, 1:] > 0) and np.all(p.values[:, 0] == 0)
    assert sst.kstest(p.values[:, -1], sst.chi(3).cdf).pvalue > 0.01


def test_conditioned_far_from_barrier_is_free(rng):
    n = 64
    up = sample_conditioned(BM, 3.0, 1.0, n, rng, n_paths=20000).values[:, 1] - 3.0
    free = sample_path(BM, 0.0, 1.0, n, rng, n_paths=20000).values[:, 1]
    assert sst.ks_2samp(up, free).statistic < 0.05


def test_h_scale_invariance_bit_exact():
    m = symmetric_stable(1.5)
    h = renewal_analytic(m)
    a = sample_conditioned(m, 0.0, 1.0, 32, np.random.default_rng(8), n_paths=200, h=h)
    b = sample_conditioned(m, 0.0, 1.0, 32, np.random.default_rng(8), n_paths=200,
                           h=h.scaled(7.3))
    assert np.array_equal(a.values, b.values)
    wa = sample_meander(BM, 1.0, 32, np.random.default_rng(9), 300, "weighted", h=H)
    wb = sample_meander(BM, 1.0, 32, np.random.default_rng(9), 300, "weighted", h=H.scaled(7.3))
    assert np.array_equal(wa.weights, wb.weights)
    assert np.array_equal(wa.paths.values, wb.paths.values)


def test_excursion_marginal_is_bessel3_bridge():
    n = 512
    e = sample_conditioned_bridge(BM, 0.0, 0.0, 1.0, n, np.random.default_rng(10),
                                  n_paths=20000)
    assert np.all(e.values[:, 1:-1] > 0)
    assert np.all(e.values[:, 0] == 0) and np.all(e.values[:, -1] == 0)
    mid = e.values[:, n // 2] + shift(n)
    assert sst.kstest(mid, sst.chi(3, scale=0.5).cdf).pvalue > 0.01


def test_conditioned_bridge_equals_rejection(rng):
    n = 64
    cb = sample_conditioned_bridge(BM, 0.5, 0.8, 1.0, n, rng, n_paths=5000).values[:, n // 2]
    raw = sample_bridge(BM, 0.5, 0.8, 1.0, n, rng, n_paths=40000).values
    kept = raw[raw[:, 1:-1].min(axis=1) > 0, n // 2]
    assert kept.size > 2000
    assert sst.ks_2samp(cb, kept).pvalue > 0.01


def test_conditioned_bridge_stable_equals_rejection(rng):
    m = symmetric_stable(1.5)
    n = 32
    cb = sample_conditioned_bridge(m, 0.5, 0.5, 1.0, n, rng, n_paths=3000).values[:, n // 2]
    raw = sample_bridge(m, 0.5, 0.5, 1.0, n, rng, n_paths=20000).values
    kept = raw[raw[:, 1:-1].min(axis=1) > 0, n // 2]
    assert sst.ks_2samp(cb, kept).pvalue > 0.01


def test_one_step_conditioned_bridge(rng):
    np.testing.assert_array_equal(
        sample_conditioned_bridge(BM, 0.3, 0.7, 1.0, 1, rng).values, [0.3, 0.7])


def test_meander_weighted_rayleigh():
    n = 256
    w = sample_meander(BM, 1.0, n, np.random.default_rng(11), 20000, "weighted")
    assert np.all(w.weights > 0) and np.all(np.isfinite(w.weights))
    end = w.paths.values[:, -1]
    assert ks_one_sample(EmpiricalSample(end, w.weights), sst.rayleigh.cdf).passed
    p = float(np.sum(w.weights * (end > 1)))
    se = math.sqrt(np.sum(w.weights ** 2 * ((end > 1) - p) ** 2))
    assert abs(p - math.exp(-0.5)) < 3 * se
    # beta_1 = E[1 / |chi_3|] = sqrt(2 / pi) for Bessel(3) at time 1
    assert abs(w.beta - math.sqrt(2 / math.pi)) < 4 * w.beta_stderr


def test_meander_lattice_rayleigh():
    n = 512
    m = sample_meander(BM, 1.0, n, np.random.default_rng(12), 20000)
    end = m.values[:, -1] + shift(n)
    assert sst.kstest(end, sst.rayleigh.cdf).pvalue > 0.01
    r = sample_meander(BM, 1.0, 64, np.random.default_rng(13), 2000, "resampled")
    assert np.all(r.values[:, 1:] > 0)


def test_meander_dual_for_asymmetric_differs(rng):
    m = asymmetric_stable(1.5, 0.8)
    a = sample_meander(m, 1.0, 32, rng, 4000).values[:, -1]
    b = sample_meander(m.dual(), 1.0, 32, rng, 4000).values[:, -1]
    assert sst.ks_2samp(a, b).pvalue < 1e-6


def test_joint_law_check_brownian():
    b = joint_law_check(BM, 1.0, 40000, np.random.default_rng(14), n_steps=256)
    assert b.passed


def test_joint_law_full_bin_min_is_half_normal():
    n = 1024
    x = sample_path(BM, 0.0, 1.0, n, np.random.default_rng(15), n_paths=20000).values
    m = -x.min(axis=1) + shift(n)
    # the skeleton puts an atom at 0 (paths that never go below the start), where
    # the shift correction does not apply; compare the law conditioned on m > 0.2
    m = m[m > 0.2]
    base = sst.halfnorm.sf(0.2)
    assert sst.kstest(m, lambda v: 1 - sst.halfnorm.sf(v) / base).pvalue > 0.01
    b = joint_law_check(BM, 1.0, 20000, np.random.default_rng(16), n_steps=256, s_bin=(0.0, 1.0))
    assert b.passed
