import gc

import numpy as np
import pytest

from levybridge.charfn import asymmetric_stable, brownian, brownian_plus_cp, symmetric_stable
from levybridge.conditioned import killed_lattice


@pytest.fixture(autouse=True, scope="module")
def _release_lattices():
    """Cached lattices hold their backward rows; drop them between modules."""
    yield
    killed_lattice.cache_clear()
    gc.collect()


@pytest.fixture(autouse=True)
def _collect_cycles():
    """Free large arrays kept alive by reference cycles before the next test."""
    yield
    gc.collect()


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


CATALOG_MODELS = [
    brownian(),
    brownian(sigma=0.7, drift=0.3),
    symmetric_stable(0.8),
    symmetric_stable(1.0),
    symmetric_stable(1.5),
    symmetric_stable(1.8),
    asymmetric_stable(1.5, 0.8),
    asymmetric_stable(0.7, 0.5),
    brownian_plus_cp(1.0, 2.0, 0.5, 0.3),
]


@pytest.fixture(params=CATALOG_MODELS, ids=lambda m: f"{m.kind.value}-a{m.alpha}-b{m.beta_skew}")
def catalog_model(request):
    return request.param
