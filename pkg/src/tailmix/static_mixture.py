"""Static two-component lognormal-GPD mixture.

The mixing weight ``p`` is a constant in (0, 1), both components live on
the positive half-line, and the density ``p f1 + (1-p) f2`` integrates to
one by construction: there is no junction point and no normalizing
constant to track.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .distributions import (
    GpdParams,
    LognParams,
    gpd_cdf,
    gpd_logpdf,
    gpd_quantile,
    gpd_sample,
    gpd_support_upper,
    logn_cdf,
    logn_logpdf,
    logn_quantile,
    logn_sample,
)
from .exceptions import DataError, NumericalError, ParameterError

__all__ = [
    "StaticMixParams",
    "mix_pdf",
    "mix_logpdf",
    "mix_loglik",
    "mix_cdf",
    "mix_quantile",
    "mix_sample",
]

PARAM_NAMES = ("p", "mu", "eta", "xi", "beta")


@dataclass(frozen=True)
class StaticMixParams:
    """Full parameter vector (p, mu, sigma2, xi, beta) of the static mixture."""

    p: float
    logn: LognParams
    gpd: GpdParams

    def __post_init__(self):
        if not (np.isfinite(self.p) and 0.0 < self.p < 1.0):
            raise ParameterError(f"mixing weight p must lie in (0, 1), got {self.p!r}")

    def as_vector(self) -> np.ndarray:
        """Raw parameter vector in the fixed ordering (p, mu, eta, xi, beta)."""
        return np.array(
            [self.p, self.logn.mu, self.logn.sigma2, self.gpd.xi, self.gpd.beta]
        )

    @classmethod
    def from_vector(cls, v) -> "StaticMixParams":
        p, mu, eta, xi, beta = (float(t) for t in v)
        return cls(p, LognParams(mu, eta), GpdParams(xi, beta))


def _check_data(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise DataError("empty data")
    bad = ~(np.isfinite(x) & (x > 0.0))
    if np.any(bad):
        rows = np.flatnonzero(bad)[:10]
        raise DataError(
            f"data must be positive and finite; offending indices (first 10): {rows.tolist()}"
        )
    return x


def mix_logpdf(x, theta: StaticMixParams):
    """Log-density of the mixture, stable for tail observations."""
    x = np.asarray(x, dtype=float)
    a = np.log(theta.p) + logn_logpdf(x, theta.logn)
    b = np.log1p(-theta.p) + gpd_logpdf(x, theta.gpd)
    out = np.logaddexp(a, b)
    if np.ndim(x) == 0:
        return float(out)
    return out


def mix_pdf(x, theta: StaticMixParams):
    """Mixture density p*f1 + (1-p)*f2; zero for x < 0."""
    x = np.asarray(x, dtype=float)
    out = np.exp(mix_logpdf(x, theta))
    if np.ndim(x) == 0:
        return float(out)
    return out


def mix_loglik(x, theta: StaticMixParams) -> float:
    """Observed log-likelihood, summed in log space."""
    x = _check_data(x)
    return float(np.sum(mix_logpdf(x, theta)))


def mix_cdf(x, theta: StaticMixParams):
    """Mixture CDF p*F1 + (1-p)*F2."""
    x = np.asarray(x, dtype=float)
    out = theta.p * np.asarray(logn_cdf(x, theta.logn)) + (1.0 - theta.p) * np.asarray(
        gpd_cdf(x, theta.gpd)
    )
    if np.ndim(x) == 0:
        return float(out)
    return out


def mix_quantile(u: float, theta: StaticMixParams) -> float:
    """Mixture quantile by bracketed root-finding on the CDF.

    No closed-form inverse exists; the root is bracketed by the larger of
    the two component quantiles (for xi < 0 the GPD side is capped by its
    finite upper endpoint, where the CDF plateaus).
    """
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ParameterError("quantile level must lie in (0, 1)")
    hi_logn = logn_quantile(u, theta.logn)
    upper = gpd_support_upper(theta.gpd)
    hi_gpd = gpd_quantile(u, theta.gpd) if np.isinf(upper) else upper
    hi = max(hi_logn, hi_gpd)
    # guard against roundoff leaving F(hi) marginally below u
    while mix_cdf(hi, theta) < u:
        hi *= 2.0
        if hi > 1e300:
            raise NumericalError("failed to bracket the mixture quantile")
    q = brentq(lambda t: mix_cdf(t, theta) - u, 0.0, hi, xtol=1e-13, rtol=8.9e-16)
    return float(q)


def mix_sample(
    rng: np.random.Generator,
    theta: StaticMixParams,
    n: int,
    return_labels: bool = False,
):
    """n i.i.d. draws: Bernoulli(p) picks the component, then its sampler.

    With ``return_labels=True`` also returns the latent indicator
    (True = lognormal component).
    """
    n = int(n)
    is_logn = rng.random(n) < theta.p
    out = np.empty(n)
    k = int(np.count_nonzero(is_logn))
    out[is_logn] = logn_sample(rng, theta.logn, k)
    out[~is_logn] = gpd_sample(rng, theta.gpd, n - k)
    if return_labels:
        return out, is_logn
    return out
