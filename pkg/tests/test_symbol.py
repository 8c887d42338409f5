import math
import warnings

import numpy as np
import pytest

from nsclab.errors import BoundViolation, Degenerate, TrackingAmbiguityWarning
from nsclab.params import DEFAULT_PARAMS, PhysicalParams, normalize
from nsclab.symbol import (
    EigenSet,
    QuarticCoeffs,
    build_symbol,
    eigen_branches,
    high_freq_expansion,
    longitudinal_quartic,
    low_freq_expansion,
    solve_quartic,
    spectral_bounds,
    verify_expansions,
)

NPAR = normalize(DEFAULT_PARAMS)


def match_multisets(a, b):
    """Max distance under greedy nearest matching of two complex multisets."""
    a = list(np.asarray(a, dtype=complex))
    worst = 0.0
    for v in np.asarray(b, dtype=complex):
        i = int(np.argmin(np.abs(np.array(a) - v)))
        worst = max(worst, abs(a[i] - v))
        a.pop(i)
    return worst


def test_symbol_at_zero_frequency():
    B = build_symbol([0.0, 0.0, 0.0], NPAR).entries
    expected = np.diag([0, 0, 0, 0, 0, 1, 1, 1]).astype(complex)
    assert np.abs(B - expected).max() == 0.0


def test_symbol_entries_unit_frequency():
    B = build_symbol([1.0, 0.0, 0.0], NPAR).entries
    assert B[0, 1] == pytest.approx(1j)
    assert B[1, 1] == pytest.approx(2.0)  # nu + (nu + eta)
    assert B[2, 2] == pytest.approx(1.0)
    assert B[3, 3] == pytest.approx(1.0)
    assert B[4, 5] == pytest.approx(1j * math.sqrt(2.0 / 3.0))
    # symmetry of the full block structure
    assert np.abs(B - B.T).max() < 1e-15


def test_symbol_rotation_invariance():
    rng = np.random.default_rng(3)
    for _ in range(20):
        xi = rng.normal(size=3)
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        ev1 = np.linalg.eigvals(build_symbol(xi, NPAR).entries)
        ev2 = np.linalg.eigvals(build_symbol(Q @ xi, NPAR).entries)
        assert match_multisets(ev1, ev2) < 1e-10


def test_quartic_coefficients_defaults_r1():
    qc = longitudinal_quartic(1.0, NPAR)
    assert qc.a4 == pytest.approx(1.0)
    assert qc.a3 == pytest.approx(3.0)
    assert qc.a2 == pytest.approx(13.0 / 3.0)
    assert qc.a1 == pytest.approx(3.0)
    assert qc.a0 == pytest.approx(2.0 / 3.0)


def test_quartic_degenerates_at_r0():
    qc = longitudinal_quartic(0.0, NPAR)
    assert (qc.a4, qc.a3, qc.a2, qc.a1, qc.a0) == (1.0, 1.0, 0.0, 0.0, 0.0)
    roots = solve_quartic(qc)
    assert match_multisets(roots, [0, 0, 0, -1]) < 1e-12


def test_solve_quartic_factored_form():
    roots = solve_quartic(QuarticCoeffs(1, 1, 0, 0, 0, r=0.0))
    assert match_multisets(roots, [0, 0, 0, -1]) < 1e-12


def test_solve_quartic_residual_and_conjugacy():
    rng = np.random.default_rng(5)
    for _ in range(60):
        r = 10.0 ** rng.uniform(-3, 3)
        qc = longitudinal_quartic(r, NPAR)
        roots = solve_quartic(qc)
        coeffs = qc.as_array()
        res = np.abs(np.polyval(coeffs, roots))
        scale = np.max(np.abs(coeffs)) * np.maximum(1.0, np.abs(roots)) ** 4
        assert np.all(res < 1e-10 * scale)
        # complex roots occur in conjugate pairs
        complex_roots = roots[np.abs(roots.imag) > 1e-12 * np.abs(roots)]
        assert match_multisets(complex_roots, np.conj(complex_roots)) < 1e-8 * max(
            1.0, np.abs(roots).max())


def test_solve_quartic_degenerate_leading_coefficient():
    with pytest.raises(Degenerate):
        solve_quartic(QuarticCoeffs(0.0, 1.0, 0.0, 0.0, 0.0, r=1.0))


def test_vieta_identities():
    rng = np.random.default_rng(11)
    for _ in range(40):
        r = 10.0 ** rng.uniform(-3, 3)
        qc = longitudinal_quartic(r, NPAR)
        roots = solve_quartic(qc)
        total = roots.sum()
        prod = np.prod(roots)
        assert abs(total - (-qc.a3 / qc.a4)) <= 1e-10 * max(1.0, abs(qc.a3 / qc.a4))
        assert abs(prod - (qc.a0 / qc.a4)) <= 1e-10 * max(1.0, abs(qc.a0 / qc.a4))


def test_full_symbol_ties_to_quartic_reduction():
    # eigenvalues of -B equal {l1, l1, l2, l2, quartic roots}
    rng = np.random.default_rng(17)
    for _ in range(100):
        xi = rng.normal(size=3) * 10.0 ** rng.uniform(-2, 2)
        r = np.linalg.norm(xi)
        ev = np.linalg.eigvals(-build_symbol(xi, NPAR).entries)
        lam = solve_quartic(longitudinal_quartic(r, NPAR))
        expected = np.concatenate([[-NPAR.nu * r**2] * 2, [-1.0 / NPAR.tau] * 2, lam])
        scale = max(1.0, np.abs(expected).max())
        assert match_multisets(ev, expected) < 1e-9 * scale


def test_branch_values_near_r_0p1():
    # oracle values frozen from the companion-matrix solve at defaults, r=0.1
    roots = solve_quartic(longitudinal_quartic(0.1, NPAR))
    relax = roots[np.argmin(np.abs(roots + 1.0))]
    assert relax == pytest.approx(-0.9933340932-0j, abs=1e-8)
    assert abs(relax - (-1.0 + (2.0 / 3.0) * 0.01)) < 1e-5  # matches -1/tau + tau b^2 r^2
    pair = roots[np.abs(roots.imag) > 1e-8]
    plus = pair[np.argmax(pair.imag)]
    assert plus.real == pytest.approx(-17.0 / 15.0 * 0.01, abs=2e-4)
    assert plus.imag == pytest.approx(math.sqrt(5.0 / 3.0) * 0.1, abs=2e-4)


def test_low_freq_expansion_printed_values():
    lam = low_freq_expansion(0.1, NPAR)
    assert lam[0] == pytest.approx(-0.99333333333 + 0j, abs=1e-9)
    assert lam[1] == pytest.approx(-0.011333333333 + 0.12909944487j, abs=1e-9)
    assert lam[2] == pytest.approx(np.conj(lam[1]), abs=1e-15)
    assert lam[3] == pytest.approx(-0.004 + 0j, abs=1e-12)


def test_low_freq_expansion_at_zero():
    lam = low_freq_expansion(0.0, NPAR)
    assert lam[0] == pytest.approx(-1.0 + 0j)
    assert np.all(lam[1:] == 0)


def test_high_freq_expansion_printed_values():
    lam = high_freq_expansion(100.0, NPAR)
    assert lam[0] == pytest.approx(-0.5 + 0j, abs=1e-12)
    assert lam[1] == pytest.approx(-2.0 / 3.0 + 100.0 * math.sqrt(2.0 / 3.0) * 1j, abs=1e-9)
    assert lam[2] == pytest.approx(np.conj(lam[1]), abs=1e-15)
    assert lam[3] == pytest.approx(-2.0 * 100.0**2 + 5.0 / 3.0 / 2.0 + 0j, abs=1e-9)


def test_eigen_branches_seed_case():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrackingAmbiguityWarning)
        sets = eigen_branches([0.0], NPAR)
    es = sets[0]
    assert es.lambdas[0] == pytest.approx(-1.0, abs=1e-12)
    assert np.abs(es.lambdas[1:]).max() < 1e-12
    assert es.ambiguous  # triple root at zero


def test_eigen_branches_conjugacy_along_log_grid():
    grid = np.geomspace(1e-3, 1e3, 200)
    sets = eigen_branches(grid, NPAR)
    for es in sets:
        l4, l5 = es.lambdas[1], es.lambdas[2]
        if abs(l4.imag) > 1e-10:
            assert l5 == pytest.approx(np.conj(l4), rel=1e-8)


def test_eigen_branches_thermal_small_r():
    es = eigen_branches([1e-2], NPAR)[0]
    assert es.lambdas[3] == pytest.approx(-0.4e-4 + 0j, abs=1e-9)


def test_eigen_branches_tracking_through_collision():
    # strongly damped acoustics: the pair turns real inside the scan range
    npar = normalize(PhysicalParams(nu_tilde=10.0))
    grid = np.geomspace(1e-3, 10.0, 400)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrackingAmbiguityWarning)
        sets = eigen_branches(grid, npar)
    became_real = any(abs(es.lambdas[1].imag) < 1e-10 for es in sets)
    assert became_real
    for prev, cur in zip(sets, sets[1:]):
        jump = np.abs(cur.lambdas - prev.lambdas).max()
        gap = cur.r - prev.r
        assert jump < 50.0 * max(gap * cur.r, 1e-3)  # branches move continuously


def test_verify_expansions_low_band():
    report = verify_expansions(NPAR, "low", [0.04, 0.02, 0.01])
    assert report.passed
    for _, claimed, measured, ok in report.branch_rows():
        assert ok
        assert measured >= claimed - 0.3


def test_verify_expansions_high_band():
    report = verify_expansions(NPAR, "high", [50.0, 100.0, 200.0])
    assert report.passed


def test_verify_expansions_error_ratios():
    # relaxation branch: remainder at least O(r^4) => halving ratio >= ~16
    report = verify_expansions(NPAR, "low", [0.02, 0.01, 0.005])
    e = report.errors
    assert e[2, 0] / e[1, 0] > 12.0
    # acoustic branch: O(r^3) => ratio ~ 8
    assert 6.0 < e[2, 1] / e[1, 1] < 10.0
    # high band relaxation branch: at least O(r^-2)
    report_h = verify_expansions(NPAR, "high", [50.0, 100.0, 200.0])
    eh = report_h.errors
    assert eh[0, 0] / eh[1, 0] > 3.0


def test_spectral_bounds_positive_defaults():
    grid = np.geomspace(1e-4, 1e4, 500)
    bounds = spectral_bounds(eigen_branches(grid, NPAR), r0=0.1, R0=10.0)
    assert bounds.beta > 0
    assert bounds.R1 > 0
    assert bounds.R2 > 0
    # the thermal branch is the slowest in the low band
    assert bounds.beta <= 0.4 + 1e-6


def test_spectral_bounds_flux_branch_independent_of_r():
    for tau in (0.3, 1.0, 5.0):
        npar = normalize(PhysicalParams(tau=tau))
        for r in (0.01, 1.0, 100.0):
            es = eigen_branches([r], npar)[0]
            assert es.lambda2 == pytest.approx(-1.0 / tau, rel=1e-15)


def test_spectral_bounds_requires_coverage():
    sets = eigen_branches([1.0], NPAR)
    with pytest.raises(ValueError):
        spectral_bounds(sets, r0=0.1, R0=10.0)


def test_spectral_bounds_detects_violation():
    grid = np.geomspace(1e-2, 100.0, 50)
    sets = eigen_branches(grid, NPAR)
    # flip a sign to simulate the wrong lambda convention
    broken = [EigenSet(r=es.r, lambda1=es.lambda1, lambda2=es.lambda2,
                       lambdas=-es.lambdas) for es in sets]
    with pytest.raises(BoundViolation):
        spectral_bounds(broken, r0=0.1, R0=10.0)


def test_all_branches_stable_random_params():
    rng = np.random.default_rng(23)
    for _ in range(25):
        p = PhysicalParams(
            R=rng.uniform(0.2, 5), gamma=rng.uniform(1.05, 2.5),
            kappa=rng.uniform(0.2, 5), tau=rng.uniform(0.05, 20),
            nu_tilde=rng.uniform(0.1, 5), eta_tilde=rng.uniform(0, 3),
            rho_star=rng.uniform(0.2, 5), theta_star=rng.uniform(0.2, 5),
        )
        npar = normalize(p)
        for r in 10.0 ** rng.uniform(-3, 3, size=8):
            roots = solve_quartic(longitudinal_quartic(r, npar))
            assert np.all(roots.real < 1e-10 * max(1.0, np.abs(roots).max()))


def test_spectra_match_at_rotated_frequency():
    rng = np.random.default_rng(31)
    for _ in range(10):
        xi = rng.normal(size=3)
        r = np.linalg.norm(xi)
        ev1 = np.linalg.eigvals(build_symbol(xi, NPAR).entries)
        ev2 = np.linalg.eigvals(build_symbol([r, 0.0, 0.0], NPAR).entries)
        assert match_multisets(ev1, ev2) < 1e-10 * max(1.0, r**2)
