"""tailmix: lognormal-GPD mixture modeling for heavy-tailed losses.

A static two-component mixture with a lognormal body and a zero-location
GPD tail, fitted by EM; two competing models (a spliced lognormal-Pareto
and a dynamically weighted Cauchy-lognormal-GPD mixture) for comparison;
and the downstream risk analytics: Value-at-Risk, bootstrap intervals and
goodness-of-fit testing.
"""

from .bench import (
    SimStudyResult,
    SimStudySpec,
    run_study,
    run_timing,
    summarize_median_metrics,
)
from .composite import (
    CompositeParams,
    composite_cdf,
    composite_logpdf,
    composite_mle,
    composite_pdf,
    composite_quantile,
    composite_sample,
)
from .distributions import (
    GpdParams,
    LognParams,
    ParetoParams,
    TruncLognParams,
    gpd_cdf,
    gpd_pdf,
    gpd_quantile,
    gpd_sample,
    logn_cdf,
    logn_pdf,
    logn_quantile,
    logn_sample,
    pareto_pdf,
    pareto_sample,
    std_normal_cdf,
    trunc_logn_pdf,
    trunc_logn_sample,
)
from .dynamic import (
    DynamicMixParams,
    dyn_cdf,
    dyn_mle,
    dyn_normconst,
    dyn_pdf,
    dyn_quantile,
    dyn_sample,
    dyn_weight,
)
from .em import EmConfig, FitReport, classify, e_step, fit_em, initialize
from .exceptions import (
    BootstrapError,
    DataError,
    DegenerateSupportError,
    EmptyComponentError,
    EnvelopeError,
    EstimationError,
    InitializationError,
    NumericalError,
    ParameterError,
    TailmixError,
)
from .gof import FittedModel, GofResult, ad_stat, gof_pboot, ks_stat
from .risk import BootstrapResult, VarEstimate, bootstrap, var_exact, var_mc
from .static_mixture import (
    StaticMixParams,
    mix_cdf,
    mix_loglik,
    mix_logpdf,
    mix_pdf,
    mix_quantile,
    mix_sample,
)

__version__ = "0.1.0"
