"""Physical and normalized parameter sets and the perturbation change of variables.

The model couples the compressible Navier-Stokes equations to a relaxation
(hyperbolic) law for the heat flux,

    tau dq/dt + q + kappa grad(theta) = 0,

around the constant state (rho_*, 0, theta_*, 0).  Everything downstream works
in the scaled perturbation variables

    n   = (rho - rho_*)/rho_*        relative density
    w   = u / c                      velocity in units of the isothermal speed
    phi = (theta - theta_*)/(sqrt(gamma-1) theta_*)
    psi = q / a                      scaled heat flux

with the derived constants c, sigma, nu, eta, a, b defined in `normalize`.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidParams, NegativeTemperature, VacuumBreach


@dataclass(frozen=True)
class PhysicalParams:
    """The eight fluid constants in consistent units."""

    R: float = 1.0
    gamma: float = 5.0 / 3.0
    kappa: float = 1.0
    tau: float = 1.0
    nu_tilde: float = 1.0
    eta_tilde: float = 0.0
    rho_star: float = 1.0
    theta_star: float = 1.0


#: Default parameter set used by examples and golden tests; makes c = a = 1.
DEFAULT_PARAMS = PhysicalParams()

_PHYSICAL_FIELDS = (
    "R", "gamma", "kappa", "tau", "nu_tilde", "eta_tilde", "rho_star", "theta_star",
)


def validate(p: PhysicalParams) -> list[str]:
    """Return every violated constraint (with the offending value); empty = valid."""
    violations = []
    for name in ("R", "kappa", "tau", "rho_star", "theta_star"):
        value = getattr(p, name)
        if not value > 0:
            violations.append(f"{name} > 0 violated: {name} = {value}")
    if not p.gamma > 1:
        violations.append(f"gamma > 1 violated: gamma = {p.gamma}")
    if not p.nu_tilde > 0:
        violations.append(f"nu_tilde > 0 violated: nu_tilde = {p.nu_tilde}")
    if not p.eta_tilde + (2.0 / 3.0) * p.nu_tilde >= 0:
        violations.append(
            "eta_tilde + (2/3)*nu_tilde >= 0 violated: "
            f"{p.eta_tilde} + (2/3)*{p.nu_tilde} = {p.eta_tilde + (2.0 / 3.0) * p.nu_tilde}"
        )
    for name in _PHYSICAL_FIELDS:
        if not math.isfinite(getattr(p, name)):
            violations.append(f"{name} must be finite: {name} = {getattr(p, name)}")
    return violations


@dataclass(frozen=True)
class NormalizedParams:
    """Derived constants of the scaled system.

    c     = sqrt(R theta_*)                  isothermal sound speed
    sigma = sqrt((gamma-1) R theta_*)        thermo-acoustic coupling
    nu    = nu_tilde / rho_star              kinematic shear viscosity
    eta   = eta_tilde / rho_star             kinematic second viscosity
    a     = sqrt(kappa rho_* R theta_*^2 / tau)   heat-flux scale
    b     = sqrt(kappa (gamma-1) / (tau rho_* R)) flux-temperature coupling
    """

    c: float
    sigma: float
    nu: float
    eta: float
    a: float
    b: float
    tau: float

    @property
    def two_nu_eta(self) -> float:
        return 2.0 * self.nu + self.eta

    @property
    def c_hat(self) -> float:
        """Acoustic speed sqrt(c^2 + sigma^2) of the coupled low-frequency modes."""
        return math.sqrt(self.c**2 + self.sigma**2)

    @property
    def kappa_prime(self) -> float:
        """Diffusivity tau*b^2 recovered in the instantaneous-conduction limit."""
        return self.tau * self.b**2


def normalize(p: PhysicalParams) -> NormalizedParams:
    """Compute the six derived constants; raises InvalidParams if `validate` fails."""
    violations = validate(p)
    if violations:
        raise InvalidParams("; ".join(violations))
    return NormalizedParams(
        c=math.sqrt(p.R * p.theta_star),
        sigma=math.sqrt((p.gamma - 1.0) * p.R * p.theta_star),
        nu=p.nu_tilde / p.rho_star,
        eta=p.eta_tilde / p.rho_star,
        a=math.sqrt(p.kappa * p.rho_star * p.R * p.theta_star**2 / p.tau),
        b=math.sqrt(p.kappa * (p.gamma - 1.0) / (p.tau * p.rho_star * p.R)),
        tau=p.tau,
    )


@dataclass
class PerturbationFields:
    """Scaled perturbation fields (arrays of matching shape; w, psi carry a leading 3-axis)."""

    n: np.ndarray
    w: np.ndarray
    phi: np.ndarray
    psi: np.ndarray


def to_perturbation(rho, u, theta, q, p: PhysicalParams) -> PerturbationFields:
    """Map primitive fields to the scaled perturbation variables.

    Raises VacuumBreach / NegativeTemperature if rho or theta is non-positive
    anywhere.
    """
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(rho <= 0):
        raise VacuumBreach(f"rho must be positive everywhere; min = {rho.min()}")
    if np.any(theta <= 0):
        raise NegativeTemperature(f"theta must be positive everywhere; min = {theta.min()}")
    npar = normalize(p)
    return PerturbationFields(
        n=(rho - p.rho_star) / p.rho_star,
        w=np.asarray(u, dtype=float) / npar.c,
        phi=(theta - p.theta_star) / (math.sqrt(p.gamma - 1.0) * p.theta_star),
        psi=np.asarray(q, dtype=float) / npar.a,
    )


def from_perturbation(fields: PerturbationFields, p: PhysicalParams):
    """Inverse of `to_perturbation`; returns (rho, u, theta, q)."""
    npar = normalize(p)
    rho = p.rho_star * (1.0 + np.asarray(fields.n, dtype=float))
    u = npar.c * np.asarray(fields.w, dtype=float)
    theta = p.theta_star * (1.0 + math.sqrt(p.gamma - 1.0) * np.asarray(fields.phi, dtype=float))
    q = npar.a * np.asarray(fields.psi, dtype=float)
    return rho, u, theta, q


def physical_params_from_mapping(items: dict) -> PhysicalParams:
    """Build PhysicalParams from a `[physical]` config section; unknown keys are errors."""
    unknown = sorted(set(items) - set(_PHYSICAL_FIELDS))
    if unknown:
        raise InvalidParams(f"unknown keys in [physical] section: {', '.join(unknown)}")
    kwargs = {k: float(v) for k, v in items.items()}
    return PhysicalParams(**kwargs)
