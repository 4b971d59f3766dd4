import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats as sst

from levybridge.charfn import brownian, symmetric_stable
from levybridge.exceptions import GridAlignmentError, NotABridgeError
from levybridge.fluctuation import cyclic_shift, reconstruct, running_min, split_at_min, vervaat
from levybridge.pathsim import PathGrid, sample_bridge, sample_path, time_grid

BM = brownian()

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def grid_path(values, t=1.0):
    values = np.asarray(values, dtype=float)
    return PathGrid(time_grid(t, values.size - 1), values)


paths = arrays(np.float64, st.integers(2, 40), elements=finite).map(grid_path)


@st.composite
def bridges(draw):
    v = draw(arrays(np.float64, st.integers(2, 40), elements=finite))
    v[-1] = v[0]
    return grid_path(v)


def test_monotone_path_min_at_start():
    info = running_min(grid_path([1.0, 1.5, 2.0, 4.0]))
    assert (info.value, info.index, info.time) == (1.0, 0, 0.0)


def test_earliest_argmin_tie_break():
    assert running_min(grid_path([0.0, -1.0, 2.0, -1.0, 0.0])).index == 1


@settings(max_examples=100, deadline=None)
@given(paths)
def test_shift_zero_is_identity(p):
    assert np.array_equal(cyclic_shift(p, 0.0).values, p.values)


@settings(max_examples=100, deadline=None)
@given(paths, st.data())
def test_shift_group_property(p, data):
    k = data.draw(st.integers(0, p.n))
    s = k * p.dt
    back = cyclic_shift(cyclic_shift(p, s), p.t - s)
    np.testing.assert_allclose(back.values, p.values, rtol=0,
                               atol=1e-12 * max(1.0, np.abs(p.values).max()) * p.n)


@settings(max_examples=100, deadline=None)
@given(paths, st.data())
def test_shift_preserves_endpoint_and_mean_increment(p, data):
    s = data.draw(st.integers(0, p.n)) * p.dt
    q = cyclic_shift(p, s)
    assert q.values[0] == p.values[0] and q.values[-1] == p.values[-1]
    assert np.diff(q.values).sum() == pytest.approx(np.diff(p.values).sum(), abs=1e-9)
    np.testing.assert_allclose(np.sort(np.diff(q.values)), np.sort(np.diff(p.values)),
                               atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(bridges(), st.data())
def test_shift_of_bridge_translates_min_value(p, data):
    # the shifted bridge takes the values X_0 - X_s + X_r, so its minimum moves by X_0 - X_s
    k = data.draw(st.integers(0, p.n))
    shift = p.values[0] - p.values[k]
    assert running_min(cyclic_shift(p, k * p.dt)).value == pytest.approx(
        running_min(p).value + shift, abs=1e-9)


def test_off_grid_shift_rejected():
    with pytest.raises(GridAlignmentError):
        cyclic_shift(grid_path(np.arange(5.0)), 0.3)


def test_bridge_shift_formula():
    v = np.array([0.0, 1.0, -2.0, 0.5, 0.0])
    p = grid_path(v)
    q = cyclic_shift(p, 0.5)
    ref = [v[0] + v[(r + 2) % 4] - v[2] for r in range(4)] + [v[-1]]
    np.testing.assert_allclose(q.values, ref, atol=1e-15)


def test_cyclic_exchangeability(rng):
    free = sample_path(BM, 0.0, 1.0, 10, rng, n_paths=6000)
    a, b = free[:3000], free[3000:]
    shifted = cyclic_shift(a, 0.3).values[:, 5]
    assert sst.ks_2samp(shifted, b.values[:, 5]).pvalue > 0.01


@settings(max_examples=100, deadline=None)
@given(bridges())
def test_vervaat_nonnegative_and_zero_at_ends(p):
    v = vervaat(p).values
    assert np.all(v >= 0) and v[0] == 0 and v[-1] == 0
    assert v.min() == 0


def test_vervaat_fixes_nonnegative_bridge():
    p = grid_path([0.0, 0.4, 1.2, 0.3, 0.0])
    np.testing.assert_array_equal(vervaat(p).values, p.values)


def test_vervaat_rejects_non_bridge():
    with pytest.raises(NotABridgeError):
        vervaat(grid_path([0.0, 1.0, 0.5]))


def test_vervaat_without_shift_is_translation():
    p = grid_path([0.0, -1.0, 0.5, -0.2, 0.0])
    np.testing.assert_allclose(vervaat(p, shift=False).values, p.values + 1.0)


def test_vervaat_batch_matches_single(rng):
    b = sample_bridge(BM, 0.0, 0.0, 1.0, 12, rng, n_paths=5)
    batch = vervaat(b).values
    for i in range(5):
        np.testing.assert_array_equal(batch[i], vervaat(b[i]).values)


def test_argmin_arcsine_law(rng):
    p = sample_path(BM, 0.0, 1.0, 1000, rng, n_paths=3000)
    rho = running_min(p).time
    assert sst.kstest(rho, lambda u: 2 / np.pi * np.arcsin(np.sqrt(np.clip(u, 0, 1)))).pvalue \
        > 0.01


@settings(max_examples=100, deadline=None)
@given(paths)
def test_split_pieces_nonnegative_start_at_zero(p):
    d = split_at_min(p)
    assert d.pre.values[0] == 0 and d.post.values[0] == 0
    assert np.all(d.pre.values >= 0) and np.all(d.post.values >= 0)
    assert d.post.values.min() == 0
    assert d.pre.n + d.post.n == p.n


def test_split_min_at_zero():
    p = grid_path([0.0, 1.0, 2.0, 0.5])
    d = split_at_min(p)
    assert d.pre.values.size == 1
    np.testing.assert_array_equal(d.post.values, p.values)


@settings(max_examples=100, deadline=None)
@given(paths)
def test_split_reconstruct_round_trip(p):
    d = split_at_min(p)
    r = reconstruct(d)
    m = d.minimum.value
    # exact in the shifted coordinates; adding the minimum back rounds once
    np.testing.assert_array_equal(r.values - m, (p.values - m) + m - m)
    np.testing.assert_allclose(r.values, p.values, rtol=0,
                               atol=np.spacing(np.abs(p.values).max() + abs(m)))
    np.testing.assert_allclose(r.times, p.times, rtol=1e-12, atol=1e-15)


def test_split_reconstruct_exact_when_min_is_zero(rng):
    v = sample_path(symmetric_stable(1.5), 0.0, 1.0, 50, rng).values
    v = v - v.min()
    p = grid_path(v)
    np.testing.assert_array_equal(reconstruct(split_at_min(p)).values, p.values)


def test_split_batch_padding(rng):
    b = sample_path(BM, 0.0, 1.0, 20, rng, n_paths=4)
    d = split_at_min(b)
    k = np.asarray(d.minimum.index)
    for i in range(4):
        assert np.all(np.isnan(d.pre.values[i, k[i] + 1:]))
        assert np.all(np.isfinite(d.pre.values[i, :k[i] + 1]))
        np.testing.assert_array_equal(d.post.values[i, :21 - k[i]],
                                      split_at_min(b[i]).post.values)


def test_post_min_endpoint_rayleigh(rng):
    """Given rho near t/2 the post-minimum endpoint is sqrt(1/2) times Rayleigh."""
    p = sample_path(BM, 0.0, 1.0, 2000, rng, n_paths=40000)
    d = split_at_min(p)
    sel = np.abs(np.asarray(d.minimum.time) - 0.5) < 0.05
    end = p.values[sel, -1] - np.asarray(d.minimum.value)[sel]
    r = end / math.sqrt(0.5)
    # skeleton minimum sits above the true one; the shift 0.5826 sqrt(dt) corrects it
    r = r + 0.5826 * math.sqrt(1 / 2000) / math.sqrt(0.5)
    assert sel.sum() > 1000
    assert sst.kstest(r, sst.rayleigh.cdf).pvalue > 0.01
