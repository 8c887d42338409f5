"""Numerical laboratory for compressible Navier-Stokes flow with relaxing
(Cattaneo) heat conduction: dispersion analysis, explicit frequency-space
propagators, whole-space decay-rate verification, and a periodic pseudo-
spectral nonlinear solver with conservation/entropy monitors."""

from .params import (
    DEFAULT_PARAMS,
    NormalizedParams,
    PhysicalParams,
    from_perturbation,
    normalize,
    to_perturbation,
    validate,
)

__all__ = [
    "DEFAULT_PARAMS",
    "NormalizedParams",
    "PhysicalParams",
    "from_perturbation",
    "normalize",
    "to_perturbation",
    "validate",
]

__version__ = "0.1.0"
