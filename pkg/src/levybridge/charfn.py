"""Lévy model catalog, characteristic exponents and hypothesis checks.

Every model is described through its characteristic exponent ``psi`` with
``E[exp(i u X_t)] = exp(-t psi(u))``.  The stable part uses the
Samorodnitsky-Taqqu (S1) parameterization::

    psi(u) = c^a |u|^a (1 - i b sign(u) tan(pi a / 2)) - i mu u        a != 1
    psi(u) = c |u| (1 + i b (2/pi) sign(u) log|u|) - i mu u             a == 1

with ``c = sigma`` (scale), ``b = beta_skew`` and ``mu = drift``.  In S1 a
zero drift means the process is strictly stable (for a != 1), which is what
the self-similar time scaling and the closed-form renewal functions need.

The Gaussian part is ``sigma^2 u^2 / 2 - i drift u`` and the compound Poisson
part with rate ``lam`` and N(m, s^2) jumps is ``lam (1 - exp(i m u - s^2 u^2 / 2))``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from scipy import integrate, special

from .exceptions import (ManifestError, ModelRejectedError, QuadratureError,
                         UnsupportedModelError)

__all__ = [
    "Kind",
    "LevyModel",
    "brownian",
    "symmetric_stable",
    "asymmetric_stable",
    "brownian_plus_cp",
    "char_exponent",
    "check_condition_K",
    "check_condition_R",
    "KCertificate",
    "CONFIG_KEYS",
    "model_to_config",
    "model_from_config",
    "write_model_config",
    "read_model_config",
]


class Kind(str, enum.Enum):
    BROWNIAN = "BrownianWithDrift"
    SYMMETRIC_STABLE = "SymmetricStable"
    ASYMMETRIC_STABLE = "AsymmetricStable"
    BROWNIAN_CP = "BrownianPlusCompoundPoisson"


_STABLE_KINDS = (Kind.SYMMETRIC_STABLE, Kind.ASYMMETRIC_STABLE)


@dataclass(frozen=True)
class LevyModel:
    """Parametric Lévy law satisfying (K) and (R).

    ``sigma`` is the Gaussian volatility for the Brownian kinds and the stable
    scale for the stable kinds.  Construction fails with
    :class:`ModelRejectedError` when the catalog cannot certify both
    hypotheses.
    """

    kind: Kind
    sigma: float = 1.0
    drift: float = 0.0
    alpha: float = 2.0
    beta_skew: float = 0.0
    jump_rate: float = 0.0
    jump_mean: float = 0.0
    jump_sd: float = 1.0

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise ModelRejectedError(f"unknown model kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        for name in ("sigma", "drift", "alpha", "beta_skew", "jump_rate",
                     "jump_mean", "jump_sd"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ModelRejectedError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.sigma < 0 or self.jump_rate < 0 or self.jump_sd < 0:
            raise ModelRejectedError("sigma, jump_rate and jump_sd must be nonnegative")

        if kind is Kind.BROWNIAN:
            object.__setattr__(self, "alpha", 2.0)
            object.__setattr__(self, "beta_skew", 0.0)
            object.__setattr__(self, "jump_rate", 0.0)
        elif kind is Kind.BROWNIAN_CP:
            object.__setattr__(self, "alpha", 2.0)
            object.__setattr__(self, "beta_skew", 0.0)
        else:
            if not 0.0 < self.alpha <= 2.0:
                raise ModelRejectedError("stable index alpha must lie in (0, 2]")
            if self.alpha == 2.0:
                raise ModelRejectedError(
                    "alpha = 2 is Brownian motion; use kind BrownianWithDrift")
            if not -1.0 <= self.beta_skew <= 1.0:
                raise ModelRejectedError("beta_skew must lie in [-1, 1]")
            if kind is Kind.SYMMETRIC_STABLE and self.beta_skew != 0.0:
                raise ModelRejectedError("SymmetricStable requires beta_skew = 0")
            object.__setattr__(self, "jump_rate", 0.0)

        if not _certify_K(self):
            raise ModelRejectedError(
                "condition (K) cannot be certified: need sigma > 0 or a stable component")
        if not check_condition_R(self):
            raise ModelRejectedError(
                "condition (R) cannot be certified: 0 is not regular for both half-lines")

    # -- derived quantities ---------------------------------------------

    @property
    def is_stable(self) -> bool:
        return self.kind in _STABLE_KINDS

    @property
    def index(self) -> float:
        """Self-similarity index (2 for the Gaussian kinds)."""
        return self.alpha

    @property
    def is_symmetric(self) -> bool:
        if self.kind is Kind.BROWNIAN_CP:
            return self.drift == 0.0 and self.jump_mean == 0.0
        return self.drift == 0.0 and self.beta_skew == 0.0

    @property
    def is_self_similar(self) -> bool:
        """True when X_s can be written as an affine map of X_1."""
        return self.kind is not Kind.BROWNIAN_CP

    @property
    def is_strictly_stable(self) -> bool:
        if self.kind is Kind.BROWNIAN:
            return self.drift == 0.0
        if self.is_stable:
            return self.drift == 0.0 or (self.alpha == 1.0 and self.beta_skew == 0.0)
        return False

    def positivity(self) -> float:
        """P(X_t > 0) for strictly stable models (constant in t)."""
        if not self.is_strictly_stable:
            raise UnsupportedModelError("positivity parameter needs a strictly stable model")
        if self.kind is Kind.BROWNIAN:
            return 0.5
        if self.alpha == 1.0:
            # Cauchy with drift mu: P(c Z + mu > 0)
            return 0.5 + math.atan(self.drift / self.sigma) / math.pi
        zeta = self.beta_skew * math.tan(math.pi * self.alpha / 2.0)
        return 0.5 + math.atan(zeta) / (math.pi * self.alpha)

    def dual(self) -> "LevyModel":
        """Model of -X."""
        return replace(self, drift=-self.drift, beta_skew=-self.beta_skew,
                       jump_mean=-self.jump_mean)

    def scale_at(self, t: float) -> float:
        """Typical spread of X_t (used for grid heuristics)."""
        if self.kind is Kind.BROWNIAN_CP:
            var = (self.sigma ** 2 + self.jump_rate * (self.jump_mean ** 2 + self.jump_sd ** 2)) * t
            return math.sqrt(var)
        return self.sigma * t ** (1.0 / self.alpha)

    def time_scaling(self, s: float) -> tuple[float, float]:
        """Return (a, b) with X_s equal in law to a * (X_1 - drift) + b.

        Only meaningful for self-similar kinds.
        """
        if not self.is_self_similar:
            raise UnsupportedModelError("compound Poisson part breaks self-similarity")
        a = s ** (1.0 / self.alpha)
        b = self.drift * s
        if self.is_stable and self.alpha == 1.0 and self.beta_skew != 0.0:
            b += 2.0 / math.pi * self.beta_skew * self.sigma * s * math.log(s)
        return a, b

    def increment_variance(self, t: float) -> float:
        """Var X_t, or inf for stable models."""
        if self.is_stable:
            return math.inf
        return (self.sigma ** 2 + self.jump_rate * (self.jump_mean ** 2 + self.jump_sd ** 2)) * t

    def increment_mean(self, t: float) -> float:
        if self.is_stable and self.alpha <= 1.0:
            return math.nan
        return (self.drift + self.jump_rate * self.jump_mean) * t


def brownian(sigma: float = 1.0, drift: float = 0.0) -> LevyModel:
    return LevyModel(Kind.BROWNIAN, sigma=sigma, drift=drift)


def symmetric_stable(alpha: float, scale: float = 1.0, drift: float = 0.0) -> LevyModel:
    return LevyModel(Kind.SYMMETRIC_STABLE, sigma=scale, drift=drift, alpha=alpha)


def asymmetric_stable(alpha: float, beta_skew: float, scale: float = 1.0,
                      drift: float = 0.0) -> LevyModel:
    return LevyModel(Kind.ASYMMETRIC_STABLE, sigma=scale, drift=drift, alpha=alpha,
                     beta_skew=beta_skew)


def brownian_plus_cp(sigma: float, jump_rate: float, jump_mean: float = 0.0,
                     jump_sd: float = 1.0, drift: float = 0.0) -> LevyModel:
    return LevyModel(Kind.BROWNIAN_CP, sigma=sigma, drift=drift, jump_rate=jump_rate,
                     jump_mean=jump_mean, jump_sd=jump_sd)


def char_exponent(model: LevyModel, u):
    """Characteristic exponent psi(u); vectorized over ``u``."""
    u = np.asarray(u, dtype=float)
    au = np.abs(u)
    if model.is_stable:
        a, c, b = model.alpha, model.sigma, model.beta_skew
        if a == 1.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                logu = np.where(au > 0, np.log(np.where(au > 0, au, 1.0)), 0.0)
            psi = c * au * (1.0 + 1j * b * (2.0 / np.pi) * np.sign(u) * logu)
        else:
            psi = (c ** a) * au ** a * (1.0 - 1j * b * np.sign(u) * np.tan(np.pi * a / 2.0))
        psi = psi - 1j * model.drift * u
    else:
        psi = 0.5 * model.sigma ** 2 * u ** 2 - 1j * model.drift * u + 0j
        if model.jump_rate > 0:
            psi = psi + model.jump_rate * (
                1.0 - np.exp(1j * model.jump_mean * u - 0.5 * (model.jump_sd * u) ** 2))
    if psi.ndim == 0:
        return complex(psi)
    return psi


def _certify_K(model: LevyModel) -> bool:
    if model.is_stable:
        return model.sigma > 0
    return model.sigma > 0


def check_condition_R(model: LevyModel) -> bool:
    """Whitelist of sufficient criteria for regularity of 0 for both half-lines.

    Accepted: a Gaussian component; stable with alpha > 1; stable with
    alpha <= 1, |beta| < 1 and no drift (alpha < 1) -- a drift dominates a
    finite-variation stable path at small times and destroys regularity on
    one side.
    """
    if not isinstance(model.kind, Kind):
        raise UnsupportedModelError(f"unsupported model kind {model.kind!r}")
    if model.kind in (Kind.BROWNIAN, Kind.BROWNIAN_CP):
        return model.sigma > 0
    if model.alpha > 1.0:
        return True
    if abs(model.beta_skew) >= 1.0:
        return False
    if model.alpha < 1.0 and model.drift != 0.0:
        return False
    return True


@dataclass(frozen=True)
class KCertificate:
    """Result of the (K) check: ``ok`` with an upper bound on the L1 norm."""

    ok: bool
    bound: float
    quad_part: float
    tail_part: float
    tail_exponent: float
    tail_coefficient: float

    def __bool__(self):
        return self.ok


def check_condition_K(model: LevyModel, t: float, u_max: float | None = None) -> KCertificate:
    """Bound ``int |exp(-t psi(u))| du`` by quadrature plus an analytic tail.

    The tail beyond ``u_max`` uses ``Re psi(u) >= k u^g`` with ``g`` fitted on
    the last decade ``[u_max/10, u_max]`` and ``k`` the minimum of
    ``Re psi / u^g`` there, so the returned bound is a certificate rather than
    an extrapolated guess.  Raises :class:`QuadratureError` when the finite
    part fails to converge.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if u_max is None:
        # point where t Re psi is comfortably large
        scale = model.scale_at(t)
        u_max = 60.0 / max(scale, 1e-12)

    def integrand(u):
        return math.exp(-t * char_exponent(model, u).real)

    quad, err = 0.0, 0.0
    edges = np.concatenate([[0.0], np.geomspace(u_max * 1e-4, u_max, 9)])
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(integrand, lo, hi, limit=200)
        quad += val
        err += e
    if not math.isfinite(quad) or err > 1e-6 * max(quad, 1e-300) + 1e-10:
        raise QuadratureError(f"quadrature did not converge (estimate {quad}, error {err})")

    uu = np.geomspace(u_max / 10.0, u_max, 64)
    re = np.real(char_exponent(model, uu))
    if np.any(re <= 0):
        return KCertificate(False, math.inf, 2 * quad, math.inf, 0.0, 0.0)
    g = float(np.polyfit(np.log(uu), np.log(re), 1)[0])
    if g <= 0.05:
        return KCertificate(False, math.inf, 2 * quad, math.inf, g, 0.0)
    k = float(np.min(re / uu ** g))
    # int_U^inf exp(-t k u^g) du = (t k)^(-1/g) / g * Gamma(1/g, t k U^g)
    lam = t * k
    tail = lam ** (-1.0 / g) / g * special.gamma(1.0 / g) * special.gammaincc(
        1.0 / g, lam * u_max ** g)
    bound = 2.0 * (quad + tail)
    return KCertificate(math.isfinite(bound), bound, 2 * quad, 2 * tail, g, k)


# -- flat key-value config --------------------------------------------------

CONFIG_KEYS = ("kind", "sigma", "drift", "alpha", "beta_skew", "jump_rate",
               "jump_mean", "jump_sd")


def model_to_config(model: LevyModel) -> dict:
    d = asdict(model)
    d["kind"] = model.kind.value
    return {k: d[k] for k in CONFIG_KEYS}


def model_from_config(cfg: dict) -> LevyModel:
    if "kind" not in cfg:
        raise ManifestError("model config needs a 'kind' key")
    kwargs = {}
    for key, value in cfg.items():
        if key not in CONFIG_KEYS:
            continue
        kwargs[key] = value if key == "kind" else float(value)
    return LevyModel(**kwargs)


def parse_flat_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ManifestError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ManifestError(f"line {lineno}: empty key")
        out[key] = value
    return out


def format_flat_config(cfg: dict) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in cfg.items())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_model_config(model: LevyModel, path) -> None:
    Path(path).write_text(format_flat_config(model_to_config(model)))


def read_model_config(path) -> LevyModel:
    return model_from_config(parse_flat_config(Path(path).read_text()))
