"""Random generalised-partition-of-unity bivariate copulas under a Dirichlet process prior."""

__version__ = "0.1.0"

from .data import (
    DataError,
    MixtureSimConfig,
    pseudo_observations,
    read_sample,
    simulate_mixture,
    split,
    validate_sample,
    write_sample,
)
from .drawfile import DrawHeader, read_draws, write_draws
from .evaluation import (
    LpsReport,
    density_grid,
    kendall_tau,
    lps,
    lps_parametric,
    predictive_sample,
)
from .parametric import CopulaFamily, ParametricCopula, fit_mle, param_to_tau, tau_to_param
from .partition import (
    Family,
    GeneratingSpec,
    alpha,
    breakpoint,
    component_logdensity,
    component_params,
    locate,
    mixture_logdensity,
    pmf,
    rotate,
    upper_tail_coefficient,
)
from .sampler import (
    ChainResult,
    PosteriorDraw,
    SamplerConfig,
    SamplerError,
    ThetaPrior,
    run_chain,
)
from ._rng import make_rng
