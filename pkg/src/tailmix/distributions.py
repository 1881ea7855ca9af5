"""Base probability kernels for the loss models.

Lognormal, zero-location generalized Pareto (GPD), right-truncated
lognormal and Pareto kernels, each with density, log-density, CDF,
quantile and sampler, plus the standard-normal CDF. All evaluators are
vectorized over ``x`` and pure; samplers only advance the generator they
are handed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, ndtri

from .exceptions import ParameterError

__all__ = [
    "LognParams",
    "GpdParams",
    "TruncLognParams",
    "ParetoParams",
    "std_normal_cdf",
    "std_normal_quantile",
    "logn_pdf",
    "logn_logpdf",
    "logn_cdf",
    "logn_quantile",
    "logn_sample",
    "gpd_pdf",
    "gpd_logpdf",
    "gpd_cdf",
    "gpd_quantile",
    "gpd_sample",
    "gpd_support_upper",
    "trunc_logn_pdf",
    "trunc_logn_logpdf",
    "trunc_logn_cdf",
    "trunc_logn_quantile",
    "trunc_logn_sample",
    "pareto_pdf",
    "pareto_logpdf",
    "pareto_cdf",
    "pareto_quantile",
    "pareto_sample",
]

# |xi| below this uses the exponential limiting forms; (1+xi*x/beta)^(-1/xi)
# loses all precision as xi -> 0.
XI_EXP_LIMIT = 1e-10

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


def _ret(out: np.ndarray, like) -> np.ndarray | float:
    """Return a float for scalar input, the array otherwise."""
    if np.ndim(like) == 0:
        return float(out)
    return out


def std_normal_cdf(z):
    """Standard-normal CDF via the complementary error function.

    Computed as ``erfc(-z/sqrt(2))/2``; absolute error is below 1e-15
    over the whole real line, well inside the 1e-12 contract.
    """
    z = np.asarray(z, dtype=float)
    return _ret(0.5 * erfc(-z / math.sqrt(2.0)), z)


def std_normal_quantile(u):
    """Inverse standard-normal CDF."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise ParameterError("quantile level must lie in [0, 1]")
    return _ret(ndtri(u), u)


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LognParams:
    """Lognormal parameters: log-scale location ``mu``, log-scale variance ``sigma2``."""

    mu: float
    sigma2: float

    def __post_init__(self):
        _require(np.isfinite(self.mu), f"mu must be finite, got {self.mu!r}")
        _require(
            np.isfinite(self.sigma2) and self.sigma2 > 0.0,
            f"sigma2 must be finite and > 0, got {self.sigma2!r}",
        )

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class GpdParams:
    """Zero-location GPD parameters: shape ``xi`` (any sign), scale ``beta`` > 0.

    For ``xi < 0`` the support is the bounded interval [0, -beta/xi];
    otherwise [0, inf).
    """

    xi: float
    beta: float

    def __post_init__(self):
        _require(np.isfinite(self.xi), f"xi must be finite, got {self.xi!r}")
        _require(
            np.isfinite(self.beta) and self.beta > 0.0,
            f"beta must be finite and > 0, got {self.beta!r}",
        )


@dataclass(frozen=True)
class TruncLognParams:
    """Lognormal right-truncated at ``xmin``: zero density beyond the cut."""

    mu: float
    sigma2: float
    xmin: float

    def __post_init__(self):
        _require(np.isfinite(self.mu), f"mu must be finite, got {self.mu!r}")
        _require(
            np.isfinite(self.sigma2) and self.sigma2 > 0.0,
            f"sigma2 must be finite and > 0, got {self.sigma2!r}",
        )
        _require(
            np.isfinite(self.xmin) and self.xmin > 0.0,
            f"xmin must be finite and > 0, got {self.xmin!r}",
        )

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def mass(self) -> float:
        """Untruncated lognormal mass on (0, xmin]."""
        return float(std_normal_cdf((math.log(self.xmin) - self.mu) / self.sigma))


@dataclass(frozen=True)
class ParetoParams:
    """Pareto (type I) parameters: scale ``xmin`` > 0, shape ``alpha`` > 0."""

    xmin: float
    alpha: float

    def __post_init__(self):
        _require(
            np.isfinite(self.xmin) and self.xmin > 0.0,
            f"xmin must be finite and > 0, got {self.xmin!r}",
        )
        _require(
            np.isfinite(self.alpha) and self.alpha > 0.0,
            f"alpha must be finite and > 0, got {self.alpha!r}",
        )


# ---------------------------------------------------------------------------
# lognormal
# ---------------------------------------------------------------------------


def logn_pdf(x, p: LognParams):
    """Lognormal density; zero for x <= 0."""
    x = np.asarray(x, dtype=float)
    out = np.exp(logn_logpdf(x, p))
    return _ret(out, x)


def logn_logpdf(x, p: LognParams):
    """Lognormal log-density; -inf for x <= 0."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    pos = x > 0.0
    if np.any(pos):
        lx = np.log(x[pos])
        z = (lx - p.mu) / p.sigma
        out[pos] = -lx - math.log(p.sigma) - _LOG_SQRT_2PI - 0.5 * z * z
    return _ret(out, x)


def logn_cdf(x, p: LognParams):
    """Lognormal CDF; zero for x <= 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    pos = x > 0.0
    if np.any(pos):
        out[pos] = std_normal_cdf((np.log(x[pos]) - p.mu) / p.sigma)
    return _ret(out, x)


def logn_quantile(u, p: LognParams):
    """Lognormal quantile for u in (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ParameterError("quantile level must lie in (0, 1)")
    return _ret(np.exp(p.mu + p.sigma * ndtri(u)), u)


def logn_sample(rng: np.random.Generator, p: LognParams, n: int) -> np.ndarray:
    """n i.i.d. lognormal draws: exp of a scaled normal."""
    return np.exp(p.mu + p.sigma * rng.standard_normal(int(n)))


# ---------------------------------------------------------------------------
# zero-location GPD
# ---------------------------------------------------------------------------


def gpd_support_upper(p: GpdParams) -> float:
    """Upper endpoint of the support: -beta/xi for xi < 0, inf otherwise."""
    if p.xi < 0.0:
        return -p.beta / p.xi
    return math.inf


def gpd_logpdf(x, p: GpdParams):
    """GPD log-density; -inf outside the support."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    if abs(p.xi) < XI_EXP_LIMIT:
        ok = x >= 0.0
        out[ok] = -math.log(p.beta) - x[ok] / p.beta
        return _ret(out, x)
    t = p.xi * x / p.beta
    ok = (x >= 0.0) & (t > -1.0)
    out[ok] = -math.log(p.beta) - (1.0 / p.xi + 1.0) * np.log1p(t[ok])
    return _ret(out, x)


def gpd_pdf(x, p: GpdParams):
    """GPD density; zero outside the support."""
    x = np.asarray(x, dtype=float)
    return _ret(np.exp(gpd_logpdf(x, p)), x)


def gpd_cdf(x, p: GpdParams):
    """GPD CDF; saturates at 1 beyond -beta/xi when xi < 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    if abs(p.xi) < XI_EXP_LIMIT:
        ok = x >= 0.0
        out[ok] = -np.expm1(-x[ok] / p.beta)
        return _ret(out, x)
    t = p.xi * x / p.beta
    inside = (x >= 0.0) & (t > -1.0)
    out[inside] = -np.expm1(-np.log1p(t[inside]) / p.xi)
    if p.xi < 0.0:
        out[t <= -1.0] = 1.0
    return _ret(out, x)


def _gpd_ppf(u: np.ndarray, p: GpdParams) -> np.ndarray:
    # accepts u in [0, 1); used by both the public quantile and the sampler
    if abs(p.xi) < XI_EXP_LIMIT:
        return -p.beta * np.log1p(-u)
    return (p.beta / p.xi) * np.expm1(-p.xi * np.log1p(-u))


def gpd_quantile(u, p: GpdParams):
    """GPD quantile: (beta/xi)((1-u)^(-xi) - 1), exponential form at xi ~ 0."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ParameterError("quantile level must lie in (0, 1)")
    return _ret(_gpd_ppf(u, p), u)


def gpd_sample(rng: np.random.Generator, p: GpdParams, n: int) -> np.ndarray:
    """n i.i.d. GPD draws by inverse-CDF transform."""
    return _gpd_ppf(rng.random(int(n)), p)


# ---------------------------------------------------------------------------
# right-truncated lognormal
# ---------------------------------------------------------------------------


def trunc_logn_logpdf(x, p: TruncLognParams):
    """Truncated-lognormal log-density; -inf for x <= 0 or x > xmin."""
    x = np.asarray(x, dtype=float)
    base = LognParams(p.mu, p.sigma2)
    out = np.asarray(logn_logpdf(x, base) - math.log(p.mass))
    out = np.where(x > p.xmin, -np.inf, out)
    return _ret(out, x)


def trunc_logn_pdf(x, p: TruncLognParams):
    """Truncated-lognormal density: lognormal renormalized to (0, xmin]."""
    x = np.asarray(x, dtype=float)
    return _ret(np.exp(trunc_logn_logpdf(x, p)), x)


def trunc_logn_cdf(x, p: TruncLognParams):
    """Truncated-lognormal CDF; reaches 1 at xmin."""
    x = np.asarray(x, dtype=float)
    base = LognParams(p.mu, p.sigma2)
    out = np.minimum(np.asarray(logn_cdf(x, base)) / p.mass, 1.0)
    return _ret(out, x)


def _trunc_logn_ppf(u: np.ndarray, p: TruncLognParams) -> np.ndarray:
    return np.exp(p.mu + p.sigma * ndtri(u * p.mass))


def trunc_logn_quantile(u, p: TruncLognParams):
    """Truncated-lognormal quantile on (0, 1); inverse-CDF on the truncated scale."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u > 1.0)):
        raise ParameterError("quantile level must lie in (0, 1]")
    return _ret(np.minimum(_trunc_logn_ppf(u, p), p.xmin), u)


def trunc_logn_sample(rng: np.random.Generator, p: TruncLognParams, n: int) -> np.ndarray:
    """n i.i.d. truncated-lognormal draws by inverse-CDF (no rejection)."""
    u = rng.random(int(n))
    # u = 0 maps to 0+ which is fine; clip the upper side against roundoff
    return np.minimum(_trunc_logn_ppf(u, p), p.xmin)


# ---------------------------------------------------------------------------
# Pareto
# ---------------------------------------------------------------------------


def pareto_logpdf(x, p: ParetoParams):
    """Pareto log-density; -inf below xmin."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    ok = x >= p.xmin
    out[ok] = (
        math.log(p.alpha)
        + p.alpha * math.log(p.xmin)
        - (p.alpha + 1.0) * np.log(x[ok])
    )
    return _ret(out, x)


def pareto_pdf(x, p: ParetoParams):
    """Pareto density; zero below xmin."""
    x = np.asarray(x, dtype=float)
    return _ret(np.exp(pareto_logpdf(x, p)), x)


def pareto_cdf(x, p: ParetoParams):
    """Pareto CDF: 1 - (xmin/x)^alpha for x >= xmin."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    ok = x >= p.xmin
    out[ok] = -np.expm1(p.alpha * (math.log(p.xmin) - np.log(x[ok])))
    return _ret(out, x)


def pareto_quantile(u, p: ParetoParams):
    """Pareto quantile: xmin (1-u)^(-1/alpha)."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u >= 1.0)):
        raise ParameterError("quantile level must lie in [0, 1)")
    return _ret(p.xmin * np.exp(-np.log1p(-u) / p.alpha), u)


def pareto_sample(rng: np.random.Generator, p: ParetoParams, n: int) -> np.ndarray:
    """n i.i.d. Pareto draws by inverse-CDF transform."""
    return p.xmin * np.exp(-np.log1p(-rng.random(int(n))) / p.alpha)
