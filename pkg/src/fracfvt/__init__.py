"""Generalized final-value theorems through fractional Cesàro means, and
periodicity tests for Caputo fractional differential equations."""

from .fraccalc import SampledSignal, TimeGrid, caputo_derivative, cesaro_profile, rl_integral
from .finval import LimitEstimate, classical_fvt, cross_validate, derivative_fvt, generalized_fvt
from .fodesim import FodeProblem, Trajectory, certificate_integral, periodicity_residual, solve
from .report import Report, ReportRecord
from .specfun import MLParams, mittag_leffler
from .xform import CatalogFunction, kernel_integral, laplace_numeric, make_catalog_function

__version__ = "0.1.0"

__all__ = [
    "CatalogFunction",
    "FodeProblem",
    "LimitEstimate",
    "MLParams",
    "Report",
    "ReportRecord",
    "SampledSignal",
    "TimeGrid",
    "Trajectory",
    "caputo_derivative",
    "certificate_integral",
    "cesaro_profile",
    "classical_fvt",
    "cross_validate",
    "derivative_fvt",
    "generalized_fvt",
    "kernel_integral",
    "laplace_numeric",
    "make_catalog_function",
    "mittag_leffler",
    "periodicity_residual",
    "rl_integral",
    "solve",
]
