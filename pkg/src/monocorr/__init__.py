"""Local statistics of alpha*n^d mod 1 and point counts on diagonal hypersurfaces."""

from .correlation import (
    CorrelationResult,
    FejerBump,
    IndicatorInterval,
    TestFunction,
    fejer,
    indicator_box,
    r_ell,
    r_ell_naive,
    r_ell_windowed,
)
from .counting import DiagonalForm, ProjectivePoint, count_report, enumerate_points, two_var_count
from .errors import IndeterminateError, PrecisionDeficitError, ResourceError
from .exponents import d_ell, l_of, phi_of, poissonian_threshold, subsum_free_exponent
from .fourier import (
    build_frequency_set,
    coefficient_table,
    expectation_mc,
    poisson_identity_check,
    variance_mc,
)
from .gaps import gap_cdf, gap_report, taylor_sandwich
from .sequence import AlphaSpec, Mod1Sequence, generate, parse_alpha, sample_alpha

__version__ = "0.1.0"

__all__ = [
    "AlphaSpec",
    "CorrelationResult",
    "DiagonalForm",
    "FejerBump",
    "IndeterminateError",
    "IndicatorInterval",
    "Mod1Sequence",
    "PrecisionDeficitError",
    "ProjectivePoint",
    "ResourceError",
    "TestFunction",
    "build_frequency_set",
    "coefficient_table",
    "count_report",
    "d_ell",
    "enumerate_points",
    "expectation_mc",
    "fejer",
    "gap_cdf",
    "gap_report",
    "generate",
    "indicator_box",
    "l_of",
    "parse_alpha",
    "phi_of",
    "poisson_identity_check",
    "poissonian_threshold",
    "r_ell",
    "r_ell_naive",
    "r_ell_windowed",
    "sample_alpha",
    "subsum_free_exponent",
    "taylor_sandwich",
    "two_var_count",
    "variance_mc",
]
