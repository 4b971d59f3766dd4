"""Two-sample and goodness-of-fit tests with JSON-serializable reports.

Unweighted tests delegate to :mod:`scipy.stats`.  The weighted
Kolmogorov-Smirnov test compares weighted empirical CDFs and takes its
asymptotic p-value at the Kish effective sample sizes.  The energy-distance
test is a permutation test on a (sub)sample of at most ``max_n`` points per
side, computed from one pooled distance matrix.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sps
from scipy.spatial.distance import cdist

from .exceptions import InsufficientSampleError
from .pathsim import as_rng

__all__ = [
    "EmpiricalSample",
    "TestReport",
    "ReportBundle",
    "MIN_SAMPLE",
    "ks_two_sample",
    "ks_one_sample",
    "ks_distance",
    "chisquare_uniform",
    "chi2_independence",
    "energy_test",
    "bundle",
    "jsonable",
]

MIN_SAMPLE = 50


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    values: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "values", v)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != v.shape[:1] or np.any(w < 0) or not w.sum() > 0:
                raise ValueError("weights must be nonnegative, one per value, not all zero")
            object.__setattr__(self, "weights", w / w.sum())

    @classmethod
    def of(cls, x) -> "EmpiricalSample":
        return x if isinstance(x, EmpiricalSample) else cls(x)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_eff(self) -> float:
        """Kish effective sample size."""
        if self.weights is None:
            return float(self.n)
        return float(1.0 / np.sum(self.weights ** 2))


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


@dataclass
class TestReport:
    name: str
    statistic: float
    p_value: float | None
    n1: int
    n2: int | None = None
    seed: int | None = None
    threshold: float = 0.01
    kind: str = "pvalue"
    metadata: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    @property
    def passed(self) -> bool:
        if self.kind == "pvalue":
            return bool(self.p_value is not None and self.p_value > self.threshold)
        return bool(self.statistic < self.threshold)

    def to_dict(self) -> dict:
        return jsonable({"name": self.name, "statistic": self.statistic, "p_value": self.p_value,
                         "n1": self.n1, "n2": self.n2, "seed": self.seed,
                         "threshold": self.threshold, "kind": self.kind, "pass": self.passed,
                         "metadata": self.metadata})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TestReport":
        return cls(d["name"], d["statistic"], d["p_value"], d["n1"], d.get("n2"), d.get("seed"),
                   d.get("threshold", 0.01), d.get("kind", "pvalue"), d.get("metadata", {}))


@dataclass
class ReportBundle:
    """Sub-tests sharing a family-wise level through Bonferroni thresholds."""

    name: str
    reports: list
    level: float = 0.01
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def min_p(self) -> float:
        ps = [r.p_value for r in self.reports if r.kind == "pvalue" and r.p_value is not None]
        return min(ps) if ps else float("nan")

    def to_json_lines(self) -> list[str]:
        head = json.dumps(jsonable({"bundle": self.name, "pass": self.passed,
                                    "level": self.level, "n_tests": len(self.reports),
                                    "metadata": self.metadata}), sort_keys=True)
        return [head] + [r.to_json() for r in self.reports]

    def summary(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.reports:
            p = "-" if r.p_value is None else f"{r.p_value:.3g}"
            lines.append(f"  {r.name:<40s} stat={r.statistic:.4g} p={p} "
                         f"thr={r.threshold:.3g} {'ok' if r.passed else 'REJECT'}")
        return "\n".join(lines)


def bundle(name: str, reports: Sequence[TestReport], level: float = 0.01,
           metadata: dict | None = None) -> ReportBundle:
    """Attach Bonferroni thresholds ``level / k`` to the p-value reports."""
    reports = list(reports)
    k = sum(1 for r in reports if r.kind == "pvalue")
    for r in reports:
        if r.kind == "pvalue":
            r.threshold = level / max(k, 1)
    return ReportBundle(name, reports, level, dict(metadata or {}))


def _check_size(*samples: EmpiricalSample):
    for s in samples:
        if s.n < MIN_SAMPLE:
            raise InsufficientSampleError(f"sample of size {s.n} < {MIN_SAMPLE}")


def _wecdf(values: np.ndarray, weights: np.ndarray | None, at: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    v = values[order]
    if weights is None:
        return np.searchsorted(v, at, side="right") / v.size
    cw = np.concatenate([[0.0], np.cumsum(weights[order])])
    return cw[np.searchsorted(v, at, side="right")]


def ks_distance(a, b) -> float:
    a, b = EmpiricalSample.of(a), EmpiricalSample.of(b)
    at = np.concatenate([a.values, b.values])
    return float(np.max(np.abs(_wecdf(a.values, a.weights, at) - _wecdf(b.values, b.weights, at))))


def ks_two_sample(a, b, name: str = "ks", seed: int | None = None, threshold: float = 0.01,
                  metadata: dict | None = None) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test, weighted if either sample carries weights."""
    a, b = EmpiricalSample.of(a), EmpiricalSample.of(b)
    _check_size(a, b)
    if a.weights is None and b.weights is None:
        r = sps.ks_2samp(a.values, b.values, method="asymp")
        d, p = float(r.statistic), float(r.pvalue)
    else:
        d = ks_distance(a, b)
        en = a.n_eff * b.n_eff / (a.n_eff + b.n_eff)
        p = float(sps.kstwobign.sf(d * math.sqrt(en))) if d > 0 else 1.0
    return TestReport(name, d, min(p, 1.0), a.n, b.n, seed, threshold, "pvalue",
                      dict(metadata or {}, n1_eff=a.n_eff, n2_eff=b.n_eff))


def ks_one_sample(a, cdf: Callable, name: str = "ks-oracle", seed: int | None = None,
                  threshold: float = 0.01, metadata: dict | None = None) -> TestReport:
    """Kolmogorov-Smirnov test against a reference CDF (weighted via Kish size)."""
    a = EmpiricalSample.of(a)
    _check_size(a)
    if a.weights is None:
        r = sps.kstest(a.values, cdf)
        d, p = float(r.statistic), float(r.pvalue)
    else:
        order = np.argsort(a.values)
        v = a.values[order]
        cw = np.cumsum(a.weights[order])
        F = np.asarray(cdf(v), dtype=float)
        d = float(max(np.max(np.abs(cw - F)), np.max(np.abs(cw - a.weights[order] - F))))
        p = float(sps.kstwobign.sf(d * math.sqrt(a.n_eff)))
    return TestReport(name, d, min(p, 1.0), a.n, None, seed, threshold, "pvalue",
                      dict(metadata or {}, n_eff=a.n_eff))


def chisquare_uniform(labels, n_bins: int, name: str = "chi2-uniform", seed: int | None = None,
                      threshold: float = 0.01, metadata: dict | None = None) -> TestReport:
    """Chi-square test that integer labels in ``[0, n_bins)`` are uniform."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size < MIN_SAMPLE:
        raise InsufficientSampleError(f"sample of size {labels.size} < {MIN_SAMPLE}")
    counts = np.bincount(labels, minlength=n_bins)
    if counts.size != n_bins:
        raise ValueError("labels out of range")
    r = sps.chisquare(counts)
    return TestReport(name, float(r.statistic), float(r.pvalue), int(labels.size), None, seed,
                      threshold, "pvalue", dict(metadata or {}, n_bins=n_bins))


def chi2_independence(x, y, bins: int = 4, name: str = "chi2-independence",
                      seed: int | None = None, threshold: float = 0.01,
                      metadata: dict | None = None) -> TestReport:
    """Chi-square independence test on a ``bins x bins`` table of empirical quantile cells."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < MIN_SAMPLE:
        raise InsufficientSampleError(f"sample of size {x.size} < {MIN_SAMPLE}")
    qs = np.linspace(0, 1, bins + 1)[1:-1]
    bx = np.searchsorted(np.quantile(x, qs), x, side="right")
    by = np.searchsorted(np.quantile(y, qs), y, side="right")
    table = np.zeros((bins, bins))
    np.add.at(table, (bx, by), 1)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    r = sps.chi2_contingency(table, correction=False)
    return TestReport(name, float(r.statistic), float(r.pvalue), int(x.size), None, seed,
                      threshold, "pvalue", dict(metadata or {}, bins=bins))


def energy_test(a, b, rng, n_perm: int = 999, max_n: int = 1500, name: str = "energy",
                seed: int | None = None, threshold: float = 0.01,
                metadata: dict | None = None) -> TestReport:
    """Energy-distance permutation test for (multivariate) samples, rows = points."""
    rng = as_rng(rng)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a = a[:, None] if a.ndim == 1 else a
    b = b[:, None] if b.ndim == 1 else b
    if min(len(a), len(b)) < MIN_SAMPLE:
        raise InsufficientSampleError("energy test needs at least 50 points per side")
    if len(a) > max_n:
        a = a[rng.choice(len(a), max_n, replace=False)]
    if len(b) > max_n:
        b = b[rng.choice(len(b), max_n, replace=False)]
    n1, n2 = len(a), len(b)
    pooled = np.vstack([a, b])
    D = cdist(pooled, pooled)
    N = n1 + n2

    def stat(lab: np.ndarray) -> np.ndarray:
        # lab: (N, k) 0/1 columns marking the first sample
        Dl = D @ lab
        s_aa = np.einsum("ik,ik->k", lab, Dl)
        tot = D.sum()
        s_ab = Dl.sum(axis=0) - s_aa
        s_bb = tot - 2 * s_ab - s_aa
        return 2 * s_ab / (n1 * n2) - s_aa / n1 ** 2 - s_bb / n2 ** 2

    base = np.zeros((N, 1))
    base[:n1] = 1.0
    e0 = float(stat(base)[0])
    perms = np.zeros((N, n_perm))
    for k in range(n_perm):
        perms[rng.permutation(N)[:n1], k] = 1.0
    ep = stat(perms)
    p = float((1 + np.sum(ep >= e0 - 1e-12 * abs(e0))) / (n_perm + 1))
    return TestReport(name, e0 * n1 * n2 / N, p, n1, n2, seed, threshold, "pvalue",
                      dict(metadata or {}, n_perm=n_perm))
