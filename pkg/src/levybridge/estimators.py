"""Estimator-style wrappers around the functional API.

The classes follow the scikit-learn conventions: hyperparameters are plain
constructor arguments (so ``get_params`` / ``set_params`` and ``clone`` work),
``fit`` learns state stored in attributes with a trailing underscore, and
``predict`` / ``transform`` refuse to run before ``fit``.  Paths are passed as
2-d arrays, one bridge per row, on the uniform grid ``t * k / n``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .charfn import LevyModel
from .density import invert_density
from .fluctuation import split_at_min, vervaat
from .ladder import estimate_renewal_mc, renewal_analytic
from .exceptions import RequiresMonteCarloError
from .pathsim import PathGrid, as_rng, time_grid

__all__ = [
    "ModelParamsMixin",
    "check_model_params",
    "check_paths",
    "TransitionDensity",
    "RenewalEstimator",
    "HuntKilledDensity",
    "VervaatTransformer",
    "MinSplitTransformer",
]

_MODEL_KEYS = ("kind", "sigma", "drift", "alpha", "beta_skew", "jump_rate", "jump_mean",
               "jump_sd")


def check_model_params(est) -> LevyModel:
    """Build the :class:`LevyModel` described by an estimator's model hyperparameters.

    Raises :class:`ModelRejectedError` (a ``ValueError``) for invalid settings.
    """
    return LevyModel(**{k: getattr(est, k) for k in _MODEL_KEYS})


def check_paths(X, t: float, name: str = "X") -> PathGrid:
    """Validate a 2-d array of grid paths and wrap it as a batched :class:`PathGrid`."""
    X = check_array(X, dtype=float, ensure_min_features=2, input_name=name)
    if not t > 0:
        raise ValueError("t must be positive")
    return PathGrid(time_grid(t, X.shape[1] - 1), X)


class ModelParamsMixin:
    """Model hyperparameters shared by every estimator in this module."""

    def _model_params(self, kind, sigma, drift, alpha, beta_skew, jump_rate, jump_mean,
                      jump_sd):
        self.kind = kind
        self.sigma = sigma
        self.drift = drift
        self.alpha = alpha
        self.beta_skew = beta_skew
        self.jump_rate = jump_rate
        self.jump_mean = jump_mean
        self.jump_sd = jump_sd

    @property
    def model_(self) -> LevyModel:
        return check_model_params(self)


class TransitionDensity(ModelParamsMixin, BaseEstimator):
    """Fourier-inverted transition density ``p_t`` as a fitted lookup table.

    ``predict(x)`` returns ``p_t(x)`` by linear interpolation on the grid.
    """

    def __init__(self, kind="BrownianWithDrift", sigma=1.0, drift=0.0, alpha=2.0,
                 beta_skew=0.0, jump_rate=0.0, jump_mean=0.0, jump_sd=1.0, t=1.0,
                 spacing=None, tail_target=1e-4):
        self._model_params(kind, sigma, drift, alpha, beta_skew, jump_rate, jump_mean, jump_sd)
        self.t = t
        self.spacing = spacing
        self.tail_target = tail_target

    def fit(self, X=None, y=None):
        lo = hi = None
        if X is not None:
            X = check_array(X, dtype=float, ensure_2d=False).ravel()
            lo, hi = float(X.min()), float(X.max())
        self.grid_ = invert_density(self.model_, self.t, lo, hi, self.spacing,
                                    tail_target=self.tail_target)
        return self

    def predict(self, X):
        check_is_fitted(self, "grid_")
        X = check_array(X, dtype=float, ensure_2d=False)
        return self.grid_(X)

    def score_samples(self, X):
        return np.log(np.maximum(self.predict(X), np.finfo(float).tiny))


class RenewalEstimator(ModelParamsMixin, BaseEstimator):
    """Renewal function ``h`` of the downward ladder height process.

    ``method="auto"`` uses the closed form when one exists and otherwise the
    Monte Carlo table on ``x_grid``.
    """

    def __init__(self, kind="BrownianWithDrift", sigma=1.0, drift=0.0, alpha=2.0,
                 beta_skew=0.0, jump_rate=0.0, jump_mean=0.0, jump_sd=1.0, method="auto",
                 x_grid=None, walk_step=2.5e-5, n_paths=20000, random_state=None):
        self._model_params(kind, sigma, drift, alpha, beta_skew, jump_rate, jump_mean, jump_sd)
        self.method = method
        self.x_grid = x_grid
        self.walk_step = walk_step
        self.n_paths = n_paths
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.method not in ("auto", "analytic", "mc"):
            raise ValueError(f"unknown method {self.method!r}")
        model = self.model_
        h = None
        if self.method in ("auto", "analytic"):
            try:
                h = renewal_analytic(model)
            except RequiresMonteCarloError:
                if self.method == "analytic":
                    raise
        if h is None:
            grid = np.geomspace(0.05, 2.0, 16) if self.x_grid is None else self.x_grid
            grid = check_array(grid, dtype=float, ensure_2d=False)
            h = estimate_renewal_mc(model, grid, self.walk_step, self.n_paths,
                                    as_rng(self.random_state if self.random_state is not None
                                           else 0))
        self.renewal_ = h
        return self

    def predict(self, X):
        check_is_fitted(self, "renewal_")
        X = check_array(X, dtype=float, ensure_2d=False)
        if np.any(X < 0):
            raise ValueError("renewal function is defined on [0, inf)")
        return self.renewal_(X)


class HuntKilledDensity(ModelParamsMixin, BaseEstimator):
    """Killed density ``q_t(x, y)`` via the bridge-survival (Hunt) estimator.

    ``predict`` takes rows ``(x, y)`` and returns the estimates; the standard
    errors of the last call are kept in ``stderr_``.
    """

    def __init__(self, kind="BrownianWithDrift", sigma=1.0, drift=0.0, alpha=2.0,
                 beta_skew=0.0, jump_rate=0.0, jump_mean=0.0, jump_sd=1.0, t=1.0,
                 n_bridges=20000, n_steps=256, richardson=True, random_state=None):
        self._model_params(kind, sigma, drift, alpha, beta_skew, jump_rate, jump_mean, jump_sd)
        self.t = t
        self.n_bridges = n_bridges
        self.n_steps = n_steps
        self.richardson = richardson
        self.random_state = random_state

    def fit(self, X=None, y=None):
        self.fitted_model_ = self.model_
        self.rng_ = as_rng(self.random_state if self.random_state is not None else 0)
        return self

    def predict(self, X):
        from .conditioned import hunt_q
        check_is_fitted(self, "fitted_model_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError("expected rows (x, y)")
        if np.any(X <= 0):
            raise ValueError("x and y must be positive")
        rngs = self.rng_.spawn(X.shape[0])
        est = [hunt_q(self.fitted_model_, x, y, self.t, self.n_bridges, self.n_steps, r,
                      richardson=self.richardson) for (x, y), r in zip(X, rngs)]
        self.stderr_ = np.array([e.stderr for e in est])
        return np.array([e.q for e in est])


class VervaatTransformer(TransformerMixin, BaseEstimator):
    """Map bridge paths (rows of ``X``) to their Vervaat transforms.

    The argmin index of each row is stored in ``rho_index_`` after
    ``transform``.  ``shift=False`` gives the rotation-free control.
    """

    def __init__(self, t=1.0, shift=True, atol=None):
        self.t = t
        self.shift = shift
        self.atol = atol

    def fit(self, X, y=None):
        pg = check_paths(X, self.t)
        self.n_features_in_ = pg.values.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        pg = check_paths(X, self.t)
        if pg.values.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} grid nodes, "
                             f"got {pg.values.shape[1]}")
        out = vervaat(pg, shift=self.shift, atol=self.atol)
        self.rho_index_ = out.meta["rho_index"]
        return out.values


class MinSplitTransformer(TransformerMixin, BaseEstimator):
    """Split paths at their earliest minimum.

    ``transform`` returns the stacked array ``[pre | post]`` of NaN-padded
    pieces (each of width ``n + 1``) and stores the argmin indices in
    ``index_``.
    """

    def __init__(self, t=1.0):
        self.t = t

    def fit(self, X, y=None):
        self.n_features_in_ = check_paths(X, self.t).values.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        pg = check_paths(X, self.t)
        dec = split_at_min(pg)
        self.index_ = np.asarray(dec.minimum.index)
        return np.hstack([np.atleast_2d(dec.pre.values), np.atleast_2d(dec.post.values)])
