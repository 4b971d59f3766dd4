import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sst

from levybridge.charfn import asymmetric_stable, brownian, brownian_plus_cp, symmetric_stable
from levybridge.density import (DensityFamily, check_chapman_kolmogorov, check_strict_positivity,
                                ck_refinement_study, ck_spacing_study, invert_density,
                                kernel_table, mass_tolerance, max_spacing, refinement_halves,
                                transition_kernel)
from levybridge.exceptions import GridMismatchError

from conftest import CATALOG_MODELS

BM = brownian()
CAUCHY = symmetric_stable(1.0)


def ck_triple(model, s, u, dx=None):
    dx = dx or min(max_spacing(model, s), max_spacing(model, u), max_spacing(model, s + u))
    lo, hi = -12 * model.scale_at(s + u), 12 * model.scale_at(s + u)
    return [invert_density(model, h, lo, hi, spacing=dx) for h in (s, u, s + u)]


def test_gaussian_and_cauchy_at_zero():
    assert invert_density(BM, 1.0)(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-7)
    assert invert_density(CAUCHY, 1.0)(0.0) == pytest.approx(1 / math.pi, abs=1e-7)


def test_brownian_density_symmetric():
    f = invert_density(BM, 1.0, -6, 6)
    c = f.n // 2
    assert f.x[c] == pytest.approx(0.0, abs=1e-12)
    k = min(c, f.n - 1 - c)
    np.testing.assert_allclose(f.values[c - k:c], f.values[c + k:c:-1], atol=1e-15)


def test_stable_density_matches_scipy():
    """Independent oracle: scipy's levy_stable in the same S1 parameterization."""
    for model in (symmetric_stable(1.5), asymmetric_stable(1.5, 0.8)):
        f = invert_density(model, 1.0)
        x = np.linspace(-4, 4, 17)
        ref = sst.levy_stable.pdf(x, model.alpha, model.beta_skew)
        np.testing.assert_allclose(f(x), ref, atol=2e-5)


def test_transition_kernel_values():
    f = invert_density(BM, 1.0)
    assert transition_kernel(f, 0.0, 0.0) == pytest.approx(0.3989423, abs=1e-7)
    assert transition_kernel(f, 0.0, 1.0) == pytest.approx(0.2419707, abs=1e-7)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-3, 3), y=st.floats(-3, 3), c=st.floats(-2, 2))
def test_translation_invariance(x, y, c):
    f = _BM_GRID
    assert transition_kernel(f, x, y) == pytest.approx(transition_kernel(f, x + c, y + c),
                                                       abs=1e-6)


_BM_GRID = invert_density(BM, 1.0, -10, 10)


def test_kernel_table_translation_defect():
    tab = kernel_table(_BM_GRID, np.linspace(-1, 1, 9), np.linspace(-1, 1, 9))
    assert tab.translation_defect() < 1e-6


def test_ck_brownian():
    assert check_chapman_kolmogorov(*ck_triple(BM, 0.5, 0.5)) < 1e-6


def test_ck_stable_15():
    assert check_chapman_kolmogorov(*ck_triple(symmetric_stable(1.5), 0.3, 0.7)) < 1e-4


def test_ck_zero_horizon_rejected():
    f = invert_density(BM, 1.0)
    degenerate = SimpleNamespace(t=0.0, spacing=f.spacing)
    with pytest.raises(ValueError):
        check_chapman_kolmogorov(f, degenerate, f)


def test_ck_mismatched_spacing_rejected():
    a = invert_density(BM, 0.5, spacing=0.01)
    b = invert_density(BM, 0.5, spacing=0.02)
    c = invert_density(BM, 1.0, spacing=0.01)
    with pytest.raises(GridMismatchError):
        check_chapman_kolmogorov(a, b, c)


def test_ck_spacing_refinement_brownian():
    sc = BM.scale_at(0.5)
    res = ck_spacing_study(BM, 0.5, 0.5, [sc, sc / 2, sc / 4])
    assert res[1] <= 0.5 * res[0] and res[2] <= 0.5 * res[1]


@pytest.mark.parametrize("model", [BM, symmetric_stable(0.8), symmetric_stable(1.0),
                                   symmetric_stable(1.5), symmetric_stable(1.8)], ids=str)
def test_ck_domain_refinement_halves(model):
    _, res, floors = ck_refinement_study(model, 0.3, 0.7, window=5.0)
    assert refinement_halves(res, floors)


def test_refinement_halves_logic():
    assert refinement_halves([1.0, 0.5, 0.2], 0.0)
    assert not refinement_halves([1.0, 0.6], 0.0)
    assert refinement_halves([1e-16, 2e-16], 1e-15)


def test_strict_positivity_examples():
    f = invert_density(BM, 1.0, -8, 8)
    m = check_strict_positivity(f, -8, 8)
    assert m > 0
    assert m == pytest.approx(sst.norm.pdf(8), rel=1e-3)
    inside = (f.x >= -8) & (f.x <= 8)
    # the FFT grid extends past the window; clamping only touches the far tails
    assert np.all(f.values[inside] > 0)
    assert np.all(np.abs(f.x[f.values == 0]) > 8)
    g = invert_density(CAUCHY, 1.0, -50, 50)
    m = check_strict_positivity(g, -50, 50)
    assert m == pytest.approx(1 / (math.pi * 2501), rel=1e-3)


@pytest.mark.parametrize("model", CATALOG_MODELS, ids=str)
@pytest.mark.parametrize("t", [0.25, 1.0, 4.0])
def test_mass_and_boundary(model, t):
    f = invert_density(model, t)
    # total_mass is the trapezoid integral over the grid; tail_mass is the
    # (analytic, for stable laws) mass outside it
    assert abs(f.total_mass + f.tail_mass - 1) <= mass_tolerance(model)
    assert np.all(f.values >= 0)
    assert max(f.values[0], f.values[-1]) < 1e-3 * f.sup
    assert f(f.x_max + 1.0) == 0 and f(f.x_min - 1.0) == 0


def test_mass_tolerance_values():
    assert mass_tolerance(BM) == 1e-6
    assert mass_tolerance(CAUCHY) == 1e-6
    assert mass_tolerance(symmetric_stable(1.5)) == 1e-4


@pytest.mark.parametrize("alpha", [0.8, 1.0, 1.5, 1.8])
def test_stable_scaling(alpha):
    m = symmetric_stable(alpha)
    f1 = invert_density(m, 1.0)
    for t in (0.25, 4.0):
        ft = invert_density(m, t)
        a = t ** (-1 / alpha)
        x = ft.x[::7]
        ref = a * f1(a * x)
        mask = ref > 1e-8
        # linear interpolation of f1 between nodes limits the comparison
        assert np.max(np.abs(ft(x[mask]) / ref[mask] - 1)) < 1e-6 or \
            np.max(np.abs(ft(x[mask]) - ref[mask])) < 1e-6 * f1.sup


def test_linear_interpolation_between_nodes():
    f = _BM_GRID
    x0, x1 = f.x[100], f.x[101]
    mid = 0.5 * (x0 + x1)
    assert f(mid) == pytest.approx(0.5 * (f.values[100] + f.values[101]), rel=1e-14)


def test_density_family_matches_direct_inversion():
    for model in (symmetric_stable(1.5), brownian_plus_cp(1.0, 2.0, 0.5, 0.3)):
        fam = DensityFamily(model)
        x = np.linspace(-2, 2, 11)
        np.testing.assert_allclose(fam(0.4, x), invert_density(model, 0.4)(x), atol=1e-4)
