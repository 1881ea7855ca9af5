"""Dynamic Cauchy-weighted lognormal-GPD mixture.

The mixing weight is the Cauchy CDF p(x) = 1/2 + arctan((x-mu_c)/tau)/pi,
so the GPD share grows with the observation size. The price is a
normalizing constant Z with no closed form; it is evaluated by adaptive
quadrature and cached on the parameter record until any field changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize

from .distributions import (
    GpdParams,
    LognParams,
    gpd_logpdf,
    gpd_pdf,
    gpd_quantile,
    gpd_sample,
    logn_pdf,
    logn_quantile,
    logn_sample,
)
from .exceptions import (
    DataError,
    EnvelopeError,
    EstimationError,
    NumericalError,
    ParameterError,
)

__all__ = [
    "DynamicMixParams",
    "dyn_weight",
    "dyn_normconst",
    "dyn_pdf",
    "dyn_logpdf",
    "dyn_loglik",
    "dyn_cdf",
    "dyn_quantile",
    "dyn_sample",
    "dyn_mle",
]

PARAM_NAMES = ("mu_c", "tau_c", "mu", "eta", "xi", "beta")

_PARAM_FIELDS = ("mu_c", "tau_c", "logn", "gpd")


@dataclass
class DynamicMixParams:
    """Parameters (mu_c, tau_c, mu, sigma2, xi, beta) with a lazy Z cache.

    Assigning to any parameter field invalidates the cached normalizing
    constant; the next read of ``z`` recomputes it from scratch.
    """

    mu_c: float
    tau_c: float
    logn: LognParams
    gpd: GpdParams
    _z_cache: float | None = field(default=None, repr=False, compare=False)

    def __setattr__(self, name, value):
        if name in _PARAM_FIELDS:
            object.__setattr__(self, "_z_cache", None)
        object.__setattr__(self, name, value)

    def __post_init__(self):
        if not np.isfinite(self.mu_c):
            raise ParameterError(f"mu_c must be finite, got {self.mu_c!r}")
        if not (np.isfinite(self.tau_c) and self.tau_c > 0.0):
            raise ParameterError(f"tau_c must be finite and > 0, got {self.tau_c!r}")

    @property
    def z(self) -> float:
        if self._z_cache is None:
            object.__setattr__(self, "_z_cache", dyn_normconst(self))
        return self._z_cache

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.mu_c, self.tau_c, self.logn.mu, self.logn.sigma2, self.gpd.xi, self.gpd.beta]
        )


def dyn_weight(x, mu_c: float, tau_c: float):
    """Cauchy CDF mixing weight, strictly increasing from 0 to 1."""
    if not (np.isfinite(tau_c) and tau_c > 0.0):
        raise ParameterError(f"tau_c must be finite and > 0, got {tau_c!r}")
    x = np.asarray(x, dtype=float)
    out = 0.5 + np.arctan((x - mu_c) / tau_c) / math.pi
    if np.ndim(x) == 0:
        return float(out)
    return out


def _split_points(theta: DynamicMixParams) -> list[float]:
    # the integrand changes sign near the lognormal median and bends at the
    # Cauchy location; anchor the quadrature there
    pts = {math.exp(theta.logn.mu)}
    if theta.mu_c > 0.0:
        pts.add(theta.mu_c)
    return sorted(pts)


def _quad_pieces(f, splits: list[float], epsabs: float, epsrel: float, what: str) -> float:
    total = 0.0
    edges = [0.0, *splits, np.inf]
    for a, b in zip(edges[:-1], edges[1:]):
        val, abserr, *rest = quad(f, a, b, epsabs=epsabs, epsrel=epsrel, full_output=1)
        if len(rest) > 1:  # QUADPACK appended an error message
            raise NumericalError(
                f"{what}: quadrature on ({a}, {b}) did not converge: {rest[1]} "
                f"(estimate {val!r}, abserr {abserr!r})"
            )
        total += val
    return total


def dyn_normconst(theta: DynamicMixParams) -> float:
    """Normalizing constant Z = 1 + I/pi by adaptive quadrature.

    I integrates (gpd - lognormal density) * arctan((x-mu_c)/tau) over the
    positive half line, split at the lognormal median and the Cauchy
    location, with the unbounded tail handled by the integrator's own
    variable change.
    """
    f1p = lambda t: logn_pdf(t, theta.logn)
    f2p = lambda t: gpd_pdf(t, theta.gpd)

    def integrand(t: float) -> float:
        return (f2p(t) - f1p(t)) * math.atan((t - theta.mu_c) / theta.tau_c)

    i_val = _quad_pieces(integrand, _split_points(theta), 1e-12, 1e-9, "normalizing constant")
    z = 1.0 + i_val / math.pi
    if not (np.isfinite(z) and z > 0.0):
        raise NumericalError(f"normalizing constant came out nonpositive: {z!r}")
    return z


def dyn_logpdf(x, theta: DynamicMixParams):
    """Log-density [(1-p(x)) f1 + p(x) f2] / Z in log space."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(dyn_weight(x, theta.mu_c, theta.tau_c))
    from .distributions import logn_logpdf

    a = np.log1p(-w) + np.asarray(logn_logpdf(x, theta.logn))
    b = np.log(w) + np.asarray(gpd_logpdf(x, theta.gpd))
    out = np.logaddexp(a, b) - math.log(theta.z)
    if np.ndim(x) == 0:
        return float(out)
    return out


def dyn_pdf(x, theta: DynamicMixParams):
    """Normalized density of the dynamic mixture."""
    x = np.asarray(x, dtype=float)
    out = np.exp(dyn_logpdf(x, theta))
    if np.ndim(x) == 0:
        return float(out)
    return out


def dyn_loglik(x, theta: DynamicMixParams) -> float:
    """Sample log-likelihood under the dynamic mixture."""
    x = np.asarray(x, dtype=float).ravel()
    return float(np.sum(dyn_logpdf(x, theta)))


def dyn_cdf(x, theta: DynamicMixParams):
    """Numeric CDF: cumulative piecewise quadrature of the density.

    Vectorized by sorting the evaluation points and integrating each
    consecutive segment once, so large inputs cost one quadrature per
    distinct point.
    """
    x = np.asarray(x, dtype=float)
    xv = np.atleast_1d(x)
    out = np.zeros(xv.shape)
    pos = xv > 0.0
    if np.any(pos):
        uniq, inv = np.unique(xv[pos], return_inverse=True)
        dens = lambda t: dyn_pdf(t, theta)
        inner_splits = [s for s in _split_points(theta)]
        edges = np.concatenate(([0.0], uniq))
        cum = np.empty(uniq.shape)
        acc = 0.0
        for i in range(uniq.size):
            a, b = float(edges[i]), float(edges[i + 1])
            pts = [s for s in inner_splits if a < s < b] or None
            val, _ = quad(dens, a, b, points=pts, epsabs=1e-11, epsrel=1e-9, limit=200)
            acc += val
            cum[i] = acc
        out[pos] = np.minimum(cum[inv], 1.0)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def dyn_quantile(u: float, theta: DynamicMixParams) -> float:
    """Quantile by bracketed root-finding on the numeric CDF."""
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ParameterError("quantile level must lie in (0, 1)")
    hi = max(logn_quantile(u, theta.logn), gpd_quantile(u, theta.gpd), theta.mu_c + 1.0)
    while dyn_cdf(hi, theta) < u:
        hi *= 2.0
        if hi > 1e300:
            raise NumericalError("failed to bracket the quantile")
    return float(brentq(lambda t: dyn_cdf(t, theta) - u, 0.0, hi, xtol=1e-10, rtol=1e-12))


def dyn_sample(rng: np.random.Generator, theta: DynamicMixParams, n: int) -> np.ndarray:
    """n i.i.d. draws by accept-reject.

    Proposals come from the unweighted even mixture (f1 + f2)/2, which
    dominates the unnormalized target (1-p)f1 + p f2 with constant 2, so
    the acceptance check never exceeds one and the expected acceptance
    rate is Z/2.
    """
    n = int(n)
    if n == 0:
        return np.empty(0)
    out = np.empty(n)
    got = 0
    proposed = 0
    rate = 0.5
    while got < n:
        k = int(min(max(1024, math.ceil(1.3 * (n - got) / max(rate, 1e-3))), 10_000_000))
        from_logn = rng.random(k) < 0.5
        prop = np.empty(k)
        k1 = int(np.count_nonzero(from_logn))
        prop[from_logn] = logn_sample(rng, theta.logn, k1)
        prop[~from_logn] = gpd_sample(rng, theta.gpd, k - k1)
        w = dyn_weight(prop, theta.mu_c, theta.tau_c)
        f1 = logn_pdf(prop, theta.logn)
        f2 = gpd_pdf(prop, theta.gpd)
        target = (1.0 - w) * f1 + w * f2
        accept = rng.random(k) * (f1 + f2) <= target
        acc = prop[accept]
        take = min(acc.size, n - got)
        out[got : got + take] = acc[:take]
        got += take
        proposed += k
        rate = max(got / proposed, 1e-6)
        if proposed >= 10_000 and rate < 1e-3:
            raise EnvelopeError(
                f"acceptance rate {rate:.2e} after {proposed} proposals"
            )
    return out


def dyn_mle(
    x,
    n_starts: int = 5,
    rng: np.random.Generator | None = None,
    maxfev: int = 4000,
) -> tuple[DynamicMixParams, float]:
    """Direct likelihood maximization over all six parameters.

    Simplex search on (mu_c, log tau, mu, log eta, xi, log beta) with Z
    recomputed at every objective evaluation. Starts are seeded from the
    static-mixture EM fit plus jitter; estimation of this model is known
    to be hard, so several starts are kept and the best one returned.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 20:
        raise DataError(f"need at least 20 observations, got {x.size}")
    if np.any(~(np.isfinite(x) & (x > 0.0))):
        raise DataError("data must be positive and finite")
    rng = rng if rng is not None else np.random.default_rng(0)

    from .em import fit_em

    try:
        em = fit_em(x)
        p_hat = em.theta_hat.p
        logn0, gpd0 = em.theta_hat.logn, em.theta_hat.gpd
    except Exception:
        p_hat = 0.5
        lx = np.log(x)
        logn0 = LognParams(float(np.mean(lx)), max(float(np.var(lx)), 1e-3))
        gpd0 = GpdParams(0.1, float(np.mean(x)) * 0.9)

    mu_c0 = float(np.quantile(x, min(max(p_hat, 0.05), 0.95)))
    q25, q75 = np.quantile(x, [0.25, 0.75])
    tau_c0 = max(float(q75 - q25) / 2.0, 1e-3)
    v_base = np.array(
        [
            mu_c0,
            math.log(tau_c0),
            logn0.mu,
            math.log(logn0.sigma2),
            gpd0.xi,
            math.log(gpd0.beta),
        ]
    )

    def nll(v):
        if not np.all(np.isfinite(v)) or np.any(np.abs(v) > 200.0):
            return np.inf
        try:
            theta = DynamicMixParams(
                float(v[0]),
                math.exp(v[1]),
                LognParams(float(v[2]), math.exp(v[3])),
                GpdParams(float(v[4]), math.exp(v[5])),
            )
            val = dyn_loglik(x, theta)
        except (ParameterError, NumericalError, OverflowError):
            return np.inf
        return np.inf if not np.isfinite(val) else -val

    best_v, best_f = None, np.inf
    for s in range(max(1, int(n_starts))):
        v0 = v_base if s == 0 else v_base + rng.normal(scale=0.3, size=6)
        res = minimize(
            nll,
            v0,
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-8, "maxfev": int(maxfev)},
        )
        if np.isfinite(res.fun) and res.fun < best_f:
            best_v, best_f = res.x, float(res.fun)
    if best_v is None:
        raise EstimationError("dynamic-mixture MLE failed from every start")
    theta = DynamicMixParams(
        float(best_v[0]),
        math.exp(best_v[1]),
        LognParams(float(best_v[2]), math.exp(best_v[3])),
        GpdParams(float(best_v[4]), math.exp(best_v[5])),
    )
    return theta, -best_f
