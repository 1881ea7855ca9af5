"""EM algorithm for maximum likelihood in the static lognormal-GPD mixture.

The E-step is the posterior probability that an observation came from the
lognormal component; the M-steps for (p, mu, eta) are closed-form weighted
moments of log x, while the GPD pair (xi, beta) is updated by maximizing
the weighted GPD log-likelihood with a derivative-free simplex search on
(xi, log beta), warm-started from the previous iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .distributions import XI_EXP_LIMIT, GpdParams, LognParams
from .exceptions import (
    DegenerateSupportError,
    EmptyComponentError,
    InitializationError,
)
from .static_mixture import StaticMixParams, _check_data, mix_loglik

__all__ = [
    "EmConfig",
    "FitReport",
    "e_step",
    "m_step_closed",
    "m_step_gpd",
    "gpd_mle",
    "initialize",
    "fit_em",
    "classify",
]

# mixing-weight guard: keeps log(p) and log(1-p) finite without meaningfully
# constraining the estimate
_P_MIN = 1e-6

# weights at or below this are treated as zero in the GPD M-step
_W_FLOOR = 1e-12


@dataclass(frozen=True)
class EmConfig:
    """Stopping rule and optimizer knobs.

    ``tol`` bounds the max absolute change of (p, mu, eta, xi, beta)
    between iterations; ``max_iter`` caps pathological runs;
    ``optimizer_restarts`` is the number of jittered retries the GPD
    M-step gets when the simplex search stalls.
    """

    tol: float = 1e-6
    max_iter: int = 1000
    optimizer_restarts: int = 2

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.optimizer_restarts < 0:
            raise ValueError("optimizer_restarts must be >= 0")


@dataclass
class FitReport:
    """EM output: estimates, likelihood trace, posteriors, diagnostics."""

    theta_hat: StaticMixParams
    loglik_trace: np.ndarray
    posteriors: np.ndarray
    n_iter: int
    converged: bool
    events: list = field(default_factory=list)

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])


def _component_logdens(x: np.ndarray, theta: StaticMixParams):
    from .distributions import gpd_logpdf, logn_logpdf

    return logn_logpdf(x, theta.logn), gpd_logpdf(x, theta.gpd)


def e_step(x, theta: StaticMixParams) -> np.ndarray:
    """Posterior probability tau_i that observation i is lognormal.

    Computed as 1/(1 + exp(d)) with d = log((1-p) f2) - log(p f1), so tail
    observations whose raw densities underflow still get exact posteriors.
    """
    x = _check_data(x)
    logf1, logf2 = _component_logdens(x, theta)
    f1_dead = np.isneginf(logf1)
    f2_dead = np.isneginf(logf2)
    dead = f1_dead & f2_dead
    if np.any(dead):
        i = int(np.flatnonzero(dead)[0])
        raise DegenerateSupportError(
            f"observation {i} (x={x[i]!r}) has zero density under both components"
        )
    with np.errstate(invalid="ignore"):
        d = (math.log1p(-theta.p) + logf2) - (math.log(theta.p) + logf1)
    tau = expit(-d)
    tau[f1_dead] = 0.0
    tau[f2_dead] = 1.0
    return tau


def m_step_closed(x, tau) -> tuple[float, float, float]:
    """Closed-form M-step for (p, mu, eta) from the lognormal weights."""
    x = _check_data(x)
    tau = np.asarray(tau, dtype=float)
    sw = float(np.sum(tau))
    if sw <= 0.0:
        raise EmptyComponentError("lognormal component received zero total weight")
    n = x.size
    p = sw / n
    lx = np.log(x)
    mu = float(tau @ lx) / sw
    eta = float(tau @ (lx - mu) ** 2) / sw
    return p, mu, eta


def _weighted_gpd_nll(x: np.ndarray, w: np.ndarray):
    """Negative weighted GPD log-likelihood as a function of (xi, log beta)."""
    sw = float(np.sum(w))

    def nll(v):
        xi, lb = float(v[0]), float(v[1])
        if not (np.isfinite(xi) and np.isfinite(lb)) or abs(lb) > 500.0:
            return np.inf
        beta = math.exp(lb)
        if abs(xi) < XI_EXP_LIMIT:
            return sw * lb + float(w @ x) / beta
        t = xi * x / beta
        if np.any(t <= -1.0):
            return np.inf
        return sw * lb + (1.0 / xi + 1.0) * float(w @ np.log1p(t))

    return nll


def m_step_gpd(
    x,
    tau2,
    warm_start: GpdParams,
    restarts: int = 2,
    step: tuple[float, float] | None = None,
) -> tuple[GpdParams, bool]:
    """Weighted GPD maximum likelihood on (xi, log beta) by Nelder-Mead.

    Guarantees the returned parameters do not decrease the weighted
    objective relative to ``warm_start``; on optimizer stall it retries
    from deterministically jittered starts and, failing that, keeps the
    warm start and reports ``stalled=True`` so the caller can log it.
    """
    x = np.asarray(x, dtype=float)
    tau2 = np.asarray(tau2, dtype=float)
    keep = tau2 > _W_FLOOR
    xs, w = x[keep], tau2[keep]
    if xs.size == 0 or float(np.sum(w)) <= 0.0:
        raise EmptyComponentError("GPD component received zero total weight")

    nll = _weighted_gpd_nll(xs, w)
    v_warm = np.array([warm_start.xi, math.log(warm_start.beta)])
    f_warm = nll(v_warm)

    h_xi, h_lb = step if step is not None else (0.1, 0.25)
    starts = [v_warm]
    for dxi, dlb in ((0.15, 0.3), (-0.15, -0.3), (0.3, -0.3))[: max(0, restarts)]:
        starts.append(v_warm + np.array([dxi, dlb]))

    best_v, best_f, success = v_warm, f_warm, False
    for s, v0 in enumerate(starts):
        simplex = np.array(
            [v0, v0 + np.array([h_xi, 0.0]), v0 + np.array([0.0, h_lb])]
        )
        res = minimize(
            nll,
            v0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": 1e-8,
                "fatol": 1e-10,
                "maxfev": 600,
            },
        )
        if res.fun < best_f:
            best_v, best_f = res.x, float(res.fun)
        if res.success and res.fun <= f_warm:
            success = True
            break
        # widen the restart simplex: the stall may be a too-local search
        h_xi, h_lb = max(h_xi, 0.1), max(h_lb, 0.25)

    stalled = not success and not (best_f < f_warm)
    if best_f > f_warm:  # never hand back something worse than the warm start
        best_v = v_warm
    return GpdParams(float(best_v[0]), math.exp(float(best_v[1]))), stalled


def gpd_mle(x, restarts: int = 2) -> GpdParams:
    """Unweighted GPD MLE with a moment-based start (xi0=0.1, beta0=mean*(1-xi0))."""
    x = _check_data(x)
    beta0 = float(np.mean(x)) * 0.9
    warm = GpdParams(0.1, beta0)
    est, _ = m_step_gpd(x, np.ones_like(x), warm, restarts=restarts, step=(0.1, 0.3))
    return est


def initialize(x) -> StaticMixParams:
    """Starting values: median-split mixing weight and full-sample MLEs.

    p0 is the fraction of observations strictly below the sample median;
    (mu0, eta0) are the lognormal MLEs and (xi0, beta0) the GPD MLEs, all
    computed from the complete sample.
    """
    x = _check_data(x)
    n = x.size
    if n < 5:
        raise InitializationError(f"need at least 5 observations, got {n}")
    if np.unique(x).size < 2:
        raise InitializationError("all observations identical")
    p0 = float(np.count_nonzero(x < np.median(x))) / n
    p0 = min(max(p0, _P_MIN), 1.0 - _P_MIN)
    lx = np.log(x)
    mu0 = float(np.mean(lx))
    eta0 = float(np.var(lx))
    gpd0 = gpd_mle(x)
    return StaticMixParams(p0, LognParams(mu0, eta0), gpd0)


def fit_em(x, cfg: EmConfig = EmConfig()) -> FitReport:
    """Fit the static mixture by EM.

    Alternates the posterior E-step, the closed-form (p, mu, eta) update
    and the simplex GPD update until the max absolute change of
    (p, mu, eta, xi, beta) drops below ``cfg.tol`` or ``cfg.max_iter`` is
    hit (reported via ``converged``, not raised). The observed
    log-likelihood is recorded every iteration and is nondecreasing.
    """
    x = _check_data(x)
    theta = initialize(x)
    trace = [mix_loglik(x, theta)]
    prev = theta.as_vector()
    events: list = []
    step = (0.1, 0.25)
    converged = False
    n_iter = 0

    for t in range(1, cfg.max_iter + 1):
        n_iter = t
        tau = e_step(x, theta)
        p, mu, eta = m_step_closed(x, tau)
        if not _P_MIN <= p <= 1.0 - _P_MIN:
            events.append(f"iteration {t}: mixing weight {p:.3g} clamped")
            p = min(max(p, _P_MIN), 1.0 - _P_MIN)
        gpd, stalled = m_step_gpd(
            x, 1.0 - tau, theta.gpd, restarts=cfg.optimizer_restarts, step=step
        )
        if stalled:
            events.append(f"iteration {t}: GPD M-step stalled, kept warm start")
        theta = StaticMixParams(p, LognParams(mu, eta), gpd)
        trace.append(mix_loglik(x, theta))

        vec = theta.as_vector()
        delta = np.abs(vec - prev)
        prev = vec
        # shrink the next warm-start simplex toward the current movement scale
        step = (
            float(np.clip(8.0 * delta[3], 1e-7, 0.1)),
            float(np.clip(8.0 * delta[4] / vec[4], 1e-7, 0.25)),
        )
        if float(np.max(delta)) < cfg.tol:
            converged = True
            break

    return FitReport(
        theta_hat=theta,
        loglik_trace=np.asarray(trace),
        posteriors=e_step(x, theta),
        n_iter=n_iter,
        converged=converged,
        events=events,
    )


def classify(report: FitReport, cut: float = 0.5) -> np.ndarray:
    """Label observations lognormal (True) iff their posterior is >= cut."""
    if not 0.0 < cut < 1.0:
        raise ValueError("cut must lie in (0, 1)")
    return report.posteriors >= cut
