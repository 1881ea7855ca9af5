"""Composite (spliced) lognormal-Pareto model.

A right-truncated lognormal body joined to an exact Pareto tail at
``xmin``. Continuity and differentiability at the junction pin the
splicing weight ``r`` and the lognormal location ``mu``, leaving
(sigma2, alpha, xmin) as the free parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .distributions import (
    ParetoParams,
    TruncLognParams,
    pareto_cdf,
    pareto_logpdf,
    pareto_sample,
    std_normal_cdf,
    trunc_logn_cdf,
    trunc_logn_logpdf,
    trunc_logn_quantile,
    trunc_logn_sample,
)
from .exceptions import DataError, EstimationError, ParameterError

__all__ = [
    "CompositeParams",
    "composite_pdf",
    "composite_logpdf",
    "composite_cdf",
    "composite_quantile",
    "composite_sample",
    "composite_mle",
]

PARAM_NAMES = ("sigma2", "alpha", "xmin")


def _splice_weight(sigma: float, alpha: float) -> float:
    # r = X/(X+1) with X = sqrt(2*pi)*alpha*sigma*Phi(alpha*sigma)*exp((alpha*sigma)^2/2),
    # evaluated as 1/(1 + 1/X) so large alpha*sigma cannot overflow
    t = alpha * sigma
    inv_x = math.exp(-0.5 * t * t) / (math.sqrt(2.0 * math.pi) * t * std_normal_cdf(t))
    return 1.0 / (1.0 + inv_x)


@dataclass(frozen=True)
class CompositeParams:
    """Free parameters (sigma2, alpha, xmin) plus the derived (r, mu).

    ``r`` and ``mu`` are computed once at construction from the continuity
    and differentiability constraints; they cannot be set independently,
    and replacing any free field means building a new instance.
    """

    sigma2: float
    alpha: float
    xmin: float
    r: float = field(init=False)
    mu: float = field(init=False)

    def __post_init__(self):
        for name in ("sigma2", "alpha", "xmin"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be finite and > 0, got {v!r}")
        sigma = math.sqrt(self.sigma2)
        object.__setattr__(self, "r", _splice_weight(sigma, self.alpha))
        object.__setattr__(self, "mu", math.log(self.xmin) - self.alpha * self.sigma2)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def body(self) -> TruncLognParams:
        return TruncLognParams(self.mu, self.sigma2, self.xmin)

    @property
    def tail(self) -> ParetoParams:
        return ParetoParams(self.xmin, self.alpha)


def composite_logpdf(x, cp: CompositeParams):
    """Log-density of the spliced model."""
    x = np.asarray(x, dtype=float)
    left = math.log(cp.r) + np.asarray(trunc_logn_logpdf(x, cp.body))
    right = math.log1p(-cp.r) + np.asarray(pareto_logpdf(x, cp.tail))
    out = np.where(x > cp.xmin, right, left)
    if np.ndim(x) == 0:
        return float(out)
    return out


def composite_pdf(x, cp: CompositeParams):
    """Density: r * truncated lognormal below xmin, (1-r) * Pareto above."""
    x = np.asarray(x, dtype=float)
    out = np.exp(composite_logpdf(x, cp))
    if np.ndim(x) == 0:
        return float(out)
    return out


def composite_cdf(x, cp: CompositeParams):
    """CDF of the spliced model; equals r at the junction."""
    x = np.asarray(x, dtype=float)
    left = cp.r * np.asarray(trunc_logn_cdf(x, cp.body))
    right = cp.r + (1.0 - cp.r) * np.asarray(pareto_cdf(x, cp.tail))
    out = np.where(x > cp.xmin, right, left)
    if np.ndim(x) == 0:
        return float(out)
    return out


def composite_quantile(u, cp: CompositeParams):
    """Closed-form quantile: truncated-lognormal branch for u <= r, Pareto above."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ParameterError("quantile level must lie in (0, 1)")
    uu = np.atleast_1d(u)
    out = np.empty(uu.shape)
    lo = uu <= cp.r
    if np.any(lo):
        out[lo] = trunc_logn_quantile(uu[lo] / cp.r, cp.body)
    if np.any(~lo):
        out[~lo] = cp.xmin * ((1.0 - cp.r) / (1.0 - uu[~lo])) ** (1.0 / cp.alpha)
    if np.ndim(u) == 0:
        return float(out[0])
    return out.reshape(u.shape)


def composite_sample(rng: np.random.Generator, cp: CompositeParams, n: int) -> np.ndarray:
    """n i.i.d. draws: with probability r from the body, else from the tail."""
    n = int(n)
    is_body = rng.random(n) < cp.r
    out = np.empty(n)
    k = int(np.count_nonzero(is_body))
    out[is_body] = trunc_logn_sample(rng, cp.body, k)
    out[~is_body] = pareto_sample(rng, cp.tail, n - k)
    return out


def composite_loglik(x, cp: CompositeParams) -> float:
    """Log-likelihood of the sample under the spliced model."""
    x = np.asarray(x, dtype=float).ravel()
    return float(np.sum(composite_logpdf(x, cp)))


def composite_mle(x, xmin_quantiles=(0.7, 0.8, 0.9)) -> tuple[CompositeParams, float]:
    """Maximum likelihood over (log sigma2, log alpha, log xmin).

    The likelihood is multimodal in the junction point, so the simplex
    search is multi-started with ``xmin`` at several data quantiles; the
    tail index starts at the Hill estimate above each candidate junction.
    Returns the best (CompositeParams, loglik) pair.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 10:
        raise DataError(f"need at least 10 observations, got {x.size}")
    if np.any(~(np.isfinite(x) & (x > 0.0))):
        raise DataError("data must be positive and finite")

    lx = np.log(x)

    def nll(v):
        if not np.all(np.isfinite(v)) or np.any(np.abs(v) > 300.0):
            return np.inf
        try:
            cp = CompositeParams(math.exp(v[0]), math.exp(v[1]), math.exp(v[2]))
        except (ParameterError, OverflowError):
            return np.inf
        val = composite_loglik(x, cp)
        return np.inf if not np.isfinite(val) else -val

    best = None
    for q in xmin_quantiles:
        xmin0 = float(np.quantile(x, q))
        body = lx[x <= xmin0]
        sigma2_0 = float(np.var(body)) if body.size >= 5 else float(np.var(lx))
        sigma2_0 = max(sigma2_0, 1e-4)
        tail = x[x > xmin0]
        if tail.size >= 3:
            alpha0 = tail.size / float(np.sum(np.log(tail / xmin0)))
        else:
            alpha0 = 1.5
        alpha0 = min(max(alpha0, 0.05), 50.0)
        v0 = np.log([sigma2_0, alpha0, xmin0])
        res = minimize(
            nll,
            v0,
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-9, "maxfev": 2000},
        )
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise EstimationError("composite MLE failed from every start")
    cp = CompositeParams(*np.exp(best.x))
    return cp, -float(best.fun)
