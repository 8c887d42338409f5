import math

import numpy as np
import pytest

from nsclab.errors import InvalidParams, NegativeTemperature, VacuumBreach
from nsclab.params import (
    DEFAULT_PARAMS,
    PerturbationFields,
    PhysicalParams,
    from_perturbation,
    normalize,
    physical_params_from_mapping,
    to_perturbation,
    validate,
)


def test_validate_defaults_clean():
    assert validate(DEFAULT_PARAMS) == []


def test_validate_second_viscosity_combination():
    p = PhysicalParams(nu_tilde=1.0, eta_tilde=-1.0)
    violations = validate(p)
    assert len(violations) == 1
    assert "eta_tilde + (2/3)*nu_tilde" in violations[0]


def test_validate_gamma_boundary():
    violations = validate(PhysicalParams(gamma=1.0))
    assert any("gamma > 1" in v for v in violations)


def test_validate_collects_all_violations():
    p = PhysicalParams(R=-1.0, gamma=0.5, kappa=0.0, tau=-2.0)
    messages = "\n".join(validate(p))
    for name in ("R", "gamma", "kappa", "tau"):
        assert name in messages


def test_normalize_defaults():
    # direct arithmetic evaluation of the defining formulas
    npar = normalize(DEFAULT_PARAMS)
    assert npar.c == pytest.approx(1.0, abs=1e-15)
    assert npar.sigma == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-15)
    assert npar.nu == pytest.approx(1.0, abs=1e-15)
    assert npar.eta == pytest.approx(0.0, abs=1e-15)
    assert npar.a == pytest.approx(1.0, abs=1e-15)
    assert npar.b == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-15)
    assert npar.two_nu_eta == pytest.approx(2.0, abs=1e-15)
    assert npar.c_hat == pytest.approx(math.sqrt(5.0 / 3.0), abs=1e-15)
    assert npar.kappa_prime == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_normalize_tau_scaling():
    npar = normalize(PhysicalParams(tau=4.0))
    assert npar.a == pytest.approx(0.5, abs=1e-15)
    assert npar.b == pytest.approx(math.sqrt(1.0 / 6.0), abs=1e-15)
    assert npar.c == pytest.approx(1.0, abs=1e-15)
    assert npar.sigma == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-15)


def test_normalize_gamma_two():
    npar = normalize(PhysicalParams(gamma=2.0))
    assert (npar.c, npar.sigma, npar.a, npar.b) == pytest.approx((1.0, 1.0, 1.0, 1.0))


def test_normalize_reevaluation_random_params():
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = PhysicalParams(
            R=rng.uniform(0.1, 10),
            gamma=rng.uniform(1.01, 3),
            kappa=rng.uniform(0.1, 10),
            tau=rng.uniform(0.01, 10),
            nu_tilde=rng.uniform(0.1, 10),
            eta_tilde=rng.uniform(0.0, 5),
            rho_star=rng.uniform(0.1, 10),
            theta_star=rng.uniform(0.1, 10),
        )
        npar = normalize(p)
        assert npar.c == pytest.approx(math.sqrt(p.R * p.theta_star), rel=1e-14)
        assert npar.sigma == pytest.approx(math.sqrt((p.gamma - 1) * p.R * p.theta_star), rel=1e-14)
        assert npar.nu == pytest.approx(p.nu_tilde / p.rho_star, rel=1e-14)
        assert npar.eta == pytest.approx(p.eta_tilde / p.rho_star, rel=1e-14)
        assert npar.a == pytest.approx(
            math.sqrt(p.kappa * p.rho_star * p.R * p.theta_star**2 / p.tau), rel=1e-14)
        assert npar.b == pytest.approx(
            math.sqrt(p.kappa * (p.gamma - 1) / (p.tau * p.rho_star * p.R)), rel=1e-14)


def test_normalize_rejects_invalid():
    with pytest.raises(InvalidParams):
        normalize(PhysicalParams(gamma=1.0))


def test_equilibrium_maps_to_origin():
    shape = (4, 4, 4)
    fields = to_perturbation(
        rho=np.full(shape, 1.0),
        u=np.zeros((3,) + shape),
        theta=np.full(shape, 1.0),
        q=np.zeros((3,) + shape),
        p=DEFAULT_PARAMS,
    )
    assert np.all(fields.n == 0)
    assert np.all(fields.w == 0)
    assert np.all(fields.phi == 0)
    assert np.all(fields.psi == 0)


def test_density_perturbation_definition():
    fields = to_perturbation(
        rho=np.full(3, 1.1), u=np.zeros((3, 3)), theta=np.ones(3), q=np.zeros((3, 3)),
        p=DEFAULT_PARAMS,
    )
    assert fields.n == pytest.approx(0.1, rel=1e-14)


def test_round_trip_random_smooth_fields():
    # identity composition within 10 * machine epsilon relative error
    rng = np.random.default_rng(12)
    x = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    xx, yy, zz = np.meshgrid(x, x, x, indexing="ij")
    for p in (DEFAULT_PARAMS, PhysicalParams(R=2.3, gamma=1.4, kappa=0.7, tau=0.3,
                                              nu_tilde=0.9, eta_tilde=0.2,
                                              rho_star=1.7, theta_star=2.2)):
        rho = p.rho_star * (1 + 0.3 * np.sin(xx) * np.cos(yy))
        u = 0.2 * np.stack([np.sin(yy), np.cos(zz), np.sin(xx + zz)])
        theta = p.theta_star * (1 + 0.2 * np.cos(xx + yy))
        q = 0.1 * np.stack([np.cos(xx), np.sin(zz), np.cos(yy)])
        fields = to_perturbation(rho, u, theta, q, p)
        rho2, u2, theta2, q2 = from_perturbation(fields, p)
        eps = 10 * np.finfo(float).eps
        assert np.max(np.abs(rho2 - rho)) <= eps * np.max(np.abs(rho))
        assert np.max(np.abs(u2 - u)) <= eps * max(np.max(np.abs(u)), 1e-300)
        assert np.max(np.abs(theta2 - theta)) <= eps * np.max(np.abs(theta))
        assert np.max(np.abs(q2 - q)) <= eps * max(np.max(np.abs(q)), 1e-300)
    _ = rng


def test_vacuum_and_temperature_errors():
    ok = np.ones(4)
    bad = np.array([1.0, -0.1, 1.0, 1.0])
    with pytest.raises(VacuumBreach):
        to_perturbation(bad, np.zeros((3, 4)), ok, np.zeros((3, 4)), DEFAULT_PARAMS)
    with pytest.raises(NegativeTemperature):
        to_perturbation(ok, np.zeros((3, 4)), bad, np.zeros((3, 4)), DEFAULT_PARAMS)


def test_physical_section_parsing():
    p = physical_params_from_mapping({"R": "1", "gamma": "1.4", "tau": "0.5"})
    assert p.gamma == 1.4
    assert p.tau == 0.5
    with pytest.raises(InvalidParams, match="unknown"):
        physical_params_from_mapping({"R": "1", "bogus": "3"})


def test_perturbation_fields_container():
    f = PerturbationFields(n=np.zeros(2), w=np.zeros((3, 2)), phi=np.zeros(2),
                           psi=np.zeros((3, 2)))
    assert f.n.shape == (2,)
