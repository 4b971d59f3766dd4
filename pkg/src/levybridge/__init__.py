"""Bridges, excursions and conditioned processes of one-dimensional Lévy processes.

The package tabulates transition densities by Fourier inversion, samples
free paths, bridges, meanders and excursions on uniform time grids, builds
the killed and conditioned transition densities, and checks the path
decompositions at the minimum (uniform argmin, Vervaat, Denisov, the
Durrett-Iglehart-Miller limit) with calibrated statistical tests.
"""
from .charfn import (CONFIG_KEYS, Kind, LevyModel, asymmetric_stable, brownian,
                     brownian_plus_cp, char_exponent, model_from_config, model_to_config,
                     read_model_config, symmetric_stable, write_model_config)
from .conditioned import (ConditionedDensity, DualityMeasure, HuntEstimate, KilledDensity,
                          conditioned_density, hunt_q, hunt_q_table, sample_conditioned,
                          sample_conditioned_bridge, sample_meander)
from .density import DensityGrid, check_chapman_kolmogorov, invert_density
from .estimators import (HuntKilledDensity, MinSplitTransformer, RenewalEstimator,
                         TransitionDensity, VervaatTransformer)
from .exceptions import *  # noqa: F401,F403
from .experiments import ExperimentManifest, list_experiments
from .fluctuation import cyclic_shift, reconstruct, running_min, split_at_min, vervaat
from .ladder import RenewalFunction, estimate_renewal_mc, renewal_analytic
from .pathsim import PathGrid, make_rng, sample_bridge, sample_increments, sample_path
from .stats import EmpiricalSample, ReportBundle, TestReport

__version__ = "0.1.0"
