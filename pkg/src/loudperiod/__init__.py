"""Period function of Loud quadratic centers near the outer boundary."""
from .core import (
    Chart,
    HyperbolaGeometry,
    Parameter,
    RegionTag,
    annulus_anchor,
    classify_region,
    hyperbola_params,
    hyperbolicity_ratio,
)
from .errors import (
    BracketError,
    DegenerateError,
    DomainError,
    EscapeError,
    IllConditionedError,
    NotIsochroneError,
    PoleError,
    StepLimitError,
    UnsupportedCaseError,
)
from .flow import IntegratorConfig, half_period, half_period_physical, period_derivatives
from .expansion import build_model, eval_model, gamma1_coeffs, gamma2_coeffs, gamma3_coeffs
from .critical import find_critical_periods, locate_nu_star, solve_G, verify_isochrone

__version__ = "0.1.0"
