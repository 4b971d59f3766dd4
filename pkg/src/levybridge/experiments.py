"""Experiment manifests and the catalog of verification experiments.

A manifest is a flat ``key = value`` configuration: the model keys of
:data:`levybridge.charfn.CONFIG_KEYS` plus the run keys in :data:`RUN_KEYS`.
Each experiment is a list of steps; a step receives a dedicated integer seed
(derived from the manifest seed, so reruns are bit-identical) and returns
report bundles.  Bundles tagged ``control`` are negative controls: the
experiment passes only if every ordinary bundle passes and every control
bundle rejects.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .charfn import CONFIG_KEYS, LevyModel, model_from_config, model_to_config
from .exceptions import ManifestError
from .stats import ReportBundle, TestReport, bundle

__all__ = [
    "ENV_OUT",
    "RUN_KEYS",
    "ExperimentManifest",
    "DataTable",
    "StepResult",
    "Experiment",
    "CATALOG",
    "list_experiments",
    "default_out_dir",
]

ENV_OUT = "LEVYBRIDGE_OUT"


def default_out_dir() -> str:
    return os.environ.get(ENV_OUT, "levybridge-out")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)


def _bool(text: str) -> bool:
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default); None default means "no default"
RUN_KEYS: dict[str, tuple[Callable, object]] = {
    "experiment": (str, None),
    "seed": (int, None),
    "t": (float, 1.0),
    "n_steps": (int, 512),
    "n_paths": (int, 20000),
    "out": (str, None),
    "level": (float, 0.01),
    "x": (float, 1.0),
    "y": (float, 1.0),
    "x_grid": (_floats, (0.5, 1.0, 1.5, 2.0, 2.5)),
    "eps": (_floats, (0.5, 0.2, 0.1, 0.05)),
    "walk_step": (float, 2.5e-5),
    "h_scale": (float, 1.0),
    "controls": (_bool, True),
    "halving": (_bool, False),
    "bin_width": (float, 0.1),
}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    return str(v)


@dataclass(frozen=True)
class ExperimentManifest:
    """Everything that determines an experiment run."""

    model: LevyModel
    experiment: str
    seed: int
    params: tuple = ()

    def __getattr__(self, name):
        for k, v in object.__getattribute__(self, "params"):
            if k == name:
                return v
        raise AttributeError(name)

    @classmethod
    def from_config(cls, cfg: dict, overrides: dict | None = None) -> "ExperimentManifest":
        cfg = dict(cfg)
        for k, v in (overrides or {}).items():
            if v is not None:
                cfg[k] = v
        unknown = sorted(set(cfg) - set(CONFIG_KEYS) - set(RUN_KEYS))
        if unknown:
            raise ManifestError(f"unknown config keys: {', '.join(unknown)}")
        for key in ("kind", "experiment", "seed"):
            if key not in cfg:
                raise ManifestError(f"missing mandatory key {key!r}")
        model = model_from_config({k: v for k, v in cfg.items() if k in CONFIG_KEYS})
        values = {}
        for key, (parse, default) in RUN_KEYS.items():
            if key in cfg:
                try:
                    values[key] = parse(cfg[key])
                except ValueError as exc:
                    raise ManifestError(f"bad value for {key!r}: {exc}") from None
            else:
                values[key] = default
        if values["out"] is None:
            values["out"] = default_out_dir()
        if values["experiment"] not in CATALOG:
            raise ManifestError(f"unknown experiment {values['experiment']!r}; "
                                f"choose from {', '.join(CATALOG)}")
        if values["t"] <= 0 or values["n_steps"] < 2 or values["n_paths"] < 1:
            raise ManifestError("need t > 0, n_steps >= 2 and n_paths >= 1")
        if not 0 < values["level"] < 1:
            raise ManifestError("level must lie in (0, 1)")
        if values["h_scale"] <= 0:
            raise ManifestError("h_scale must be positive")
        exp = values.pop("experiment")
        seed = values.pop("seed")
        if seed < 0:
            raise ManifestError("seed must be nonnegative")
        return cls(model, exp, seed, tuple(sorted(values.items())))

    def to_config(self) -> dict:
        """Flat string mapping that :meth:`from_config` maps back to an equal manifest."""
        out = {k: _fmt(v) for k, v in model_to_config(self.model).items()}
        out["experiment"] = self.experiment
        out["seed"] = str(self.seed)
        out.update({k: _fmt(v) for k, v in self.params})
        return out

    def record(self) -> dict:
        """JSON manifest written next to the reports (output directory excluded)."""
        d = {"model": model_to_config(self.model), "experiment": self.experiment,
             "seed": self.seed}
        d.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params
                  if k != "out"})
        return d


@dataclass
class DataTable:
    name: str
    header: list
    columns: list
    meta: dict = field(default_factory=dict)


@dataclass
class StepResult:
    bundles: list = field(default_factory=list)
    controls: list = field(default_factory=list)
    data: list = field(default_factory=list)


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    result: str
    steps: Callable  # manifest -> list[(label, fn(seed) -> StepResult)]


# -- helpers -------------------------------------------------------------------

def _is_brownian0(model: LevyModel) -> bool:
    return model.kind.value == "BrownianWithDrift" and model.drift == 0.0


def _stat_table(name: str, bundles) -> DataTable:
    rows = [(r.statistic, math.nan if r.p_value is None else r.p_value, r.threshold,
             float(r.passed)) for b in bundles for r in b.reports]
    cols = [list(c) for c in zip(*rows)] if rows else [[], [], [], []]
    labels = [f"{b.name}/{r.name}" for b in bundles for r in b.reports]
    return DataTable(name, ["statistic", "p_value", "threshold", "passed"], cols,
                     {"tests": labels})


# -- experiments ------------------------------------------------------------------

def _density_check(man: ExperimentManifest):
    from scipy import stats as sps
    from .density import invert_density

    def run(seed):
        m, t = man.model, man.t
        f = invert_density(m, t)
        s = m.scale_at(t)
        if m.kind.value == "BrownianWithDrift":
            ref = lambda x: sps.norm.pdf(x, m.drift * t, s)
            window = (m.drift * t - 6 * s, m.drift * t + 6 * s)
        elif m.is_stable and m.alpha == 1.0 and m.beta_skew == 0.0:
            ref = lambda x: sps.cauchy.pdf(x, m.drift * t, s)
            window = (m.drift * t - 20 * s, m.drift * t + 20 * s)
        else:
            raise ManifestError("density-check has closed forms for Brownian and Cauchy only")
        x = f.x[(f.x >= window[0]) & (f.x <= window[1])]
        err = float(np.max(np.abs(f(x) - ref(x))))
        rep = TestReport("density-sup-error", err, None, x.size, None, seed, 1e-6, "residual",
                         {"window": window, "spacing": f.spacing})
        mass = TestReport("density-mass-defect", abs(1.0 - f.total_mass - f.tail_mass), None,
                          f.n, None, seed, 1e-3, "residual", {"tail_mass": f.tail_mass})
        b = bundle("density-check", [rep, mass], man.level)
        return StepResult([b], [], [DataTable("density", ["x", "f", "reference"],
                                              [x, f(x), ref(x)], {"t": t})])
    return [("invert", run)]


def _ck_check(man: ExperimentManifest):
    from .density import (check_chapman_kolmogorov, ck_refinement_study, ck_spacing_study,
                          invert_density, refinement_halves)

    def run(seed):
        m, t = man.model, man.t
        s = u = 0.5 * t
        dx = min(invert_density(m, s).spacing, invert_density(m, t).spacing)
        grids = [invert_density(m, h, spacing=dx) for h in (s, u, t)]
        res = check_chapman_kolmogorov(*grids)
        tol = 1e-6 if not m.is_stable else 1e-4
        reps = [TestReport("ck-residual", res, None, grids[2].n, None, seed, tol, "residual",
                           {"spacing": dx})]
        H, r, floors = ck_refinement_study(m, s, u, 5.0 * m.scale_at(t))
        ratio = [float(b / a) if not (a <= fa and b <= fb) else 0.0
                 for a, b, fa, fb in zip(r[:-1], r[1:], floors[:-1], floors[1:])]
        reps.append(TestReport("ck-domain-refinement", max(ratio), None, len(r), None, seed,
                               0.5 + 1e-12, "residual",
                               {"halfwidth": H, "residual": r, "floor": floors,
                                "halves": refinement_halves(r, floors)}))
        data = [DataTable("ck_domain_refinement", ["halfwidth", "residual", "floor"],
                          [H, r, floors])]
        if not m.is_stable:
            sc = m.scale_at(s)
            sp = np.array([sc, sc / 2, sc / 4])
            rs = ck_spacing_study(m, s, u, sp)
            fl = np.full(rs.size, 1e-13)
            ratio = [float(b / a) if not (a <= 1e-13 and b <= 1e-13) else 0.0
                     for a, b in zip(rs[:-1], rs[1:])]
            reps.append(TestReport("ck-spacing-refinement", max(ratio), None, len(rs), None,
                                   seed, 0.5 + 1e-12, "residual",
                                   {"spacing": sp, "residual": rs,
                                    "halves": refinement_halves(rs, fl)}))
            data.append(DataTable("ck_spacing_refinement", ["spacing", "residual"], [sp, rs]))
        return StepResult([bundle("ck-check", reps, man.level)], [], data)
    return [("chapman-kolmogorov", run)]


def _hunt(man: ExperimentManifest):
    from .verify import verify_hunt

    def run(seed):
        b = verify_hunt(man.model, man.x, man.y, man.t, man.n_paths, man.n_steps, seed)
        md = b.reports[0].metadata
        return StepResult([b], [], [DataTable(
            "hunt", ["q", "stderr", "reference", "survival_fine", "survival_coarse"],
            [[md["q"]], [md["stderr"]], [md["reference"]], [md["survival_fine"]],
             [md["survival_coarse"]]])])
    return [("hunt-q", run)]


def _vervaat(man: ExperimentManifest):
    from .verify import verify_vervaat, verify_vervaat_oracle
    steps = [("vervaat", lambda seed: StepResult(
        [verify_vervaat(man.model, man.t, man.n_steps, man.n_paths, seed)]))]
    if _is_brownian0(man.model):
        steps.append(("bessel3-oracle", lambda seed: StepResult(
            [verify_vervaat_oracle(man.t, man.n_steps, man.n_paths, seed, man.model.sigma)])))
    if man.controls:
        def control(seed):
            b = verify_vervaat(man.model, man.t, man.n_steps, man.n_paths, seed, shift=False)
            b.name = "vervaat-control-no-shift"
            return StepResult([], [b])
        steps.append(("control", control))
    return steps


def _denisov(man: ExperimentManifest):
    from .verify import verify_denisov
    steps = [("denisov", lambda seed: StepResult(
        [verify_denisov(man.model, man.t, man.n_steps, man.n_paths, seed)]))]
    if man.controls:
        def control(seed):
            if man.model.is_symmetric:
                b = verify_denisov(man.model, man.t, man.n_steps, man.n_paths, seed,
                                   control_free=True)
                b.name = "denisov-control-free-path"
            else:
                b = verify_denisov(man.model, man.t, man.n_steps, man.n_paths, seed, swap=True)
                b.name = "denisov-control-swapped"
            return StepResult([], [b])
        steps.append(("control", control))
    return steps


def _bridge_bins(width: float):
    centers = ((0.25, 0.45), (0.5, 0.5), (0.75, 0.35))
    h = 0.5 * width
    return tuple((s - h, s + h, y - h, y + h) for s, y in centers)


def _denisov_bridge(man: ExperimentManifest):
    from .verify import verify_denisov_bridge
    steps = [("denisov-bridge", lambda seed: StepResult([verify_denisov_bridge(
        man.model, man.t, man.n_steps, man.n_paths, seed, bins=_bridge_bins(man.bin_width))]))]
    if man.halving:
        def halved(seed):
            b = verify_denisov_bridge(man.model, man.t, man.n_steps, 4 * man.n_paths, seed,
                                      bins=_bridge_bins(0.5 * man.bin_width))
            b.name = "denisov-bridge-halved-bins"
            return StepResult([b])
        steps.append(("halved-bins", halved))
    return steps


def _dim(man: ExperimentManifest):
    from .verify import verify_dim

    def run(seed):
        b = verify_dim(man.model, man.t, man.eps, man.n_steps, man.n_paths, seed)
        return StepResult([b], [], [DataTable("dim_distances", ["eps", "ks_distance"],
                                              [list(man.eps), b.metadata["distances"]])])
    return [("dim-limit", run)]


def _uniform_rho(man: ExperimentManifest):
    from .verify import verify_uniform_rho
    steps = [("uniform-rho", lambda seed: StepResult(
        [verify_uniform_rho(man.model, man.t, man.n_steps, man.n_paths, seed)]))]
    if man.controls:
        def control(seed):
            b = verify_uniform_rho(man.model, man.t, man.n_steps, man.n_paths, seed, free=True)
            # the free-path argmin must be rejected at p < 1e-10
            b = bundle("uniform-rho-control-free-path", b.reports, 1e-10, b.metadata)
            return StepResult([], [b])
        steps.append(("control", control))
    return steps


def _duality(man: ExperimentManifest):
    from .verify import verify_duality

    def run(seed):
        b = verify_duality(man.model, man.t, man.x_grid, man.n_paths, man.n_steps, seed)
        md = b.reports[0].metadata
        g = np.asarray(md["grid"])
        X, Y = np.meshgrid(g, g, indexing="ij")
        return StepResult([b], [], [DataTable("duality_q", ["x", "y", "q", "stderr"],
                                              [X, Y, md["q"], md["stderr"]])])
    return [("duality", run)]


def _renewal(man: ExperimentManifest):
    from .verify import verify_renewal

    def run(seed):
        b = verify_renewal(man.model, man.x_grid, man.walk_step, man.n_paths, seed)
        md = b.reports[2].metadata
        return StepResult([b], [], [DataTable("renewal", ["x", "h"], [md["x"], md["h"]])])
    return [("renewal", run)]


CATALOG: dict[str, Experiment] = {e.name: e for e in (
    Experiment("density-check", "Fourier-inverted density against the Gaussian or Cauchy "
               "closed form", "transition densities exist and are tabulated", _density_check),
    Experiment("ck-check", "Chapman-Kolmogorov residual of the density tables and its "
               "refinement study", "semigroup property of the transition densities", _ck_check),
    Experiment("hunt-q", "killed density by bridge survival against the reflection value",
               "Hunt's formula for the killed density", _hunt),
    Experiment("vervaat", "Vervaat transform of bridges against excursions (with controls)",
               "Vervaat transformation of the bridge yields the excursion", _vervaat),
    Experiment("denisov", "pre- and post-minimum pieces against dual and primal meanders",
               "Denisov decomposition at the minimum", _denisov),
    Experiment("denisov-bridge", "Denisov decomposition of bridges in (argmin, min) bins",
               "conditional law of bridge pieces given the minimum", _denisov_bridge),
    Experiment("dim-limit", "bridges conditioned on min > -eps converge to the excursion",
               "Durrett-Iglehart-Miller weak limit", _dim),
    Experiment("uniform-rho", "argmin of the bridge is uniform (free-path control)",
               "uniform law of the bridge argmin", _uniform_rho),
    Experiment("duality", "symmetry of the killed density table", "duality formula for q",
               _duality),
    Experiment("renewal", "Monte Carlo renewal function against its closed form",
               "renewal function of the ladder height process", _renewal),
)}


def list_experiments() -> list[tuple[str, str, str]]:
    """``(name, description, result checked)`` in catalog order."""
    return [(e.name, e.description, e.result) for e in CATALOG.values()]
