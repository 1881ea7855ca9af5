"""Goodness-of-fit: KS and AD statistics with parametric-bootstrap p-values.

The asymptotic null distributions of both statistics are invalid once
parameters have been estimated from the same data, so p-values are
obtained by simulating from the fitted model and refitting on every
replicate. The plus-one rule keeps p strictly positive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Literal, NamedTuple

import numpy as np
from joblib import Parallel, delayed

from .exceptions import BootstrapError, DataError, NumericalError

__all__ = ["FittedModel", "GofResult", "ks_stat", "ad_stat", "gof_pboot"]

_F_CLIP = 1e-12


class FittedModel(NamedTuple):
    """What a fitter must hand back: a CDF and a sampler for the fitted law."""

    cdf: Callable[[np.ndarray], np.ndarray]
    sample: Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class GofResult:
    statistic: float
    p_value: float
    test: Literal["ks", "ad"]
    n_boot: int
    n_failed: int = 0


def _sorted_cdf_values(x, cdf) -> tuple[np.ndarray, int]:
    x = np.sort(np.asarray(x, dtype=float).ravel())
    n = x.size
    if n < 2:
        raise DataError(f"need at least 2 observations, got {n}")
    f = np.asarray(cdf(x), dtype=float)
    if np.any(np.isnan(f)):
        raise NumericalError("fitted CDF returned NaN")
    return f, n


def ks_stat(x, cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between the sample and a fitted CDF."""
    f, n = _sorted_cdf_values(x, cdf)
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - f, f - (i - 1) / n)))


def ad_stat(x, cdf: Callable) -> float:
    """Anderson-Darling statistic A^2 against a fitted CDF.

    CDF values landing exactly on 0 or 1 are clipped away from the
    boundary (with a warning) so the logs stay finite.
    """
    f, n = _sorted_cdf_values(x, cdf)
    if np.any((f <= 0.0) | (f >= 1.0)):
        warnings.warn(
            "CDF values at 0 or 1 clipped for the AD statistic", RuntimeWarning
        )
        f = np.clip(f, _F_CLIP, 1.0 - _F_CLIP)
    i = np.arange(1, n + 1)
    s = np.sum((2 * i - 1) * (np.log(f) + np.log1p(-f[::-1])))
    return float(-n - s / n)


_STATS = {"ks": ks_stat, "ad": ad_stat}


def _one_boot(fitter, sample_fn, n, test, rng):
    stat_fn = _STATS[test]
    try:
        xb = sample_fn(rng, n)
        refit = fitter(xb)
        return stat_fn(xb, refit.cdf)
    except Exception:
        return np.nan


def gof_pboot(
    x,
    fitter: Callable[[np.ndarray], FittedModel],
    test: Literal["ks", "ad"] = "ks",
    n_boot: int = 200,
    rng: np.random.Generator | None = None,
    n_jobs: int = 1,
) -> GofResult:
    """Parametric-bootstrap p-value for the KS or AD test.

    Fits the model once, measures the observed statistic against the
    fitted CDF, then repeatedly simulates same-size samples from the fit,
    refits each one and recomputes the statistic. The p-value is
    (1 + #{boot >= observed}) / (n_boot + 1).
    """
    x = np.asarray(x, dtype=float).ravel()
    if test not in _STATS:
        raise ValueError(f"unknown test {test!r}")
    rng = rng if rng is not None else np.random.default_rng()
    fitted = fitter(x)
    observed = _STATS[test](x, fitted.cdf)

    children = rng.spawn(int(n_boot))
    if n_jobs == 1:
        stats = [_one_boot(fitter, fitted.sample, x.size, test, c) for c in children]
    else:
        stats = Parallel(n_jobs=n_jobs)(
            delayed(_one_boot)(fitter, fitted.sample, x.size, test, c)
            for c in children
        )
    stats = np.asarray(stats, dtype=float)
    failed = int(np.count_nonzero(np.isnan(stats)))
    if failed > 0.2 * n_boot:
        raise BootstrapError(f"{failed} of {n_boot} parametric replicates failed")
    good = stats[~np.isnan(stats)]
    p = (1.0 + float(np.count_nonzero(good >= observed))) / (good.size + 1.0)
    return GofResult(
        statistic=observed, p_value=p, test=test, n_boot=int(good.size), n_failed=failed
    )
