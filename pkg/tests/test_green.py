import numpy as np
import pytest
from scipy.integrate import solve_ivp

from nsclab.errors import EigenvalueCollision, OutOfBand
from nsclab.green import (
    apply_green,
    gk_hk,
    green_auto,
    green_explicit,
    green_expm,
    green_lowfreq_leading,
)
from nsclab.params import DEFAULT_PARAMS, PhysicalParams, normalize
from nsclab.symbol import build_symbol, eigen_branches

NPAR = normalize(DEFAULT_PARAMS)


def test_gk_hk_degenerate_values():
    from nsclab.errors import TrackingAmbiguityWarning

    with pytest.warns(TrackingAmbiguityWarning):
        es = eigen_branches([1e-14], NPAR)[0]
    w = gk_hk(es, NPAR)
    # at r ~ 0 the relaxation root -1/tau makes g vanish exactly
    assert abs(w.g[0]) < 1e-10
    # the vanishing roots give g = h = 0
    assert np.abs(w.g[1:]).max() < 1e-10
    assert np.abs(w.h[1:]).max() < 1e-10


def test_gk_hk_reevaluation():
    es = eigen_branches([1.0], NPAR)[0]
    w = gk_hk(es, NPAR)
    for k in range(4):
        lam = es.lambdas[k]
        g_direct = lam**2 + lam / NPAR.tau + NPAR.b**2
        h_direct = lam**2 + NPAR.two_nu_eta * lam + NPAR.c**2
        assert abs(w.g[k] - g_direct) < 1e-12 * max(1.0, abs(g_direct))
        assert abs(w.h[k] - h_direct) < 1e-12 * max(1.0, abs(h_direct))


def test_explicit_identity_at_t0():
    for xi in ([0.3, 0.0, 0.0], [0.1, -0.2, 0.7], [5.0, 1.0, -2.0]):
        G = green_explicit(xi, 0.0, NPAR)
        assert np.abs(G.entries - np.eye(8)).max() < 1e-9


def test_explicit_matches_expm_spot():
    G1 = green_explicit([0.3, 0.0, 0.0], 2.0, NPAR)
    G2 = green_expm([0.3, 0.0, 0.0], 2.0, NPAR)
    assert np.abs(G1.entries - G2.entries).max() < 1e-8


def test_explicit_matches_expm_random():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(200):
        r = 10.0 ** rng.uniform(-3, 3)
        d = rng.normal(size=3)
        xi = r * d / np.linalg.norm(d)
        t = rng.uniform(0.0, 100.0)
        try:
            Ge = green_explicit(xi, t, NPAR)
        except EigenvalueCollision:
            continue
        Gm = green_expm(xi, t, NPAR)
        scale = 1.0 + np.abs(Gm.entries).max()
        worst = max(worst, np.abs(Ge.entries - Gm.entries).max() / scale)
    assert worst < 1e-7


def test_decay_at_large_time():
    G = green_explicit([0.1, 0.0, 0.0], 1e4, NPAR)
    assert np.abs(G.entries).max() < 1e-6


def test_expm_at_zero_frequency():
    t = 1.7
    G = green_expm([0.0, 0.0, 0.0], t, NPAR)
    e = np.exp(-t / NPAR.tau)
    expected = np.diag([1, 1, 1, 1, 1, e, e, e])
    assert np.abs(G.entries - expected).max() < 1e-12


def test_expm_semigroup():
    xi = [0.7, -0.3, 0.2]
    G1 = green_expm(xi, 0.9, NPAR).entries
    G2 = green_expm(xi, 1.4, NPAR).entries
    G12 = green_expm(xi, 2.3, NPAR).entries
    assert np.abs(G1 @ G2 - G12).max() < 1e-10


def test_expm_against_ode_integration():
    # independent high-order adaptive integration of dG/dt = -B G
    xi = np.array([1.0, 0.0, 0.0])
    B = build_symbol(xi, NPAR).entries
    t_end = 1.0

    def rhs(_, y):
        return (-B @ y.reshape(8, 8)).ravel()

    sol = solve_ivp(rhs, (0.0, t_end), np.eye(8, dtype=complex).ravel(),
                    method="DOP853", rtol=1e-12, atol=1e-13)
    G_ode = sol.y[:, -1].reshape(8, 8)
    G = green_expm(xi, t_end, NPAR).entries
    col_err = np.abs(np.linalg.norm(G - G_ode, axis=0))
    assert col_err.max() < 1e-9


def test_realness_symmetry():
    rng = np.random.default_rng(9)
    for _ in range(20):
        xi = rng.normal(size=3)
        t = rng.uniform(0, 5)
        Gp = green_explicit(xi, t, NPAR).entries
        Gm = green_explicit(-xi, t, NPAR).entries
        assert np.abs(Gm - np.conj(Gp)).max() < 1e-12 * (1 + np.abs(Gp).max())


def test_transverse_decoupling():
    r, t = 0.8, 1.3
    G = green_explicit([r, 0.0, 0.0], t, NPAR).entries
    e1 = np.exp(-NPAR.nu * r**2 * t)
    e2 = np.exp(-t / NPAR.tau)
    for idx, factor in ((2, e1), (3, e1), (6, e2), (7, e2)):
        row = G[idx].copy()
        col = G[:, idx].copy()
        assert row[idx] == pytest.approx(factor, rel=1e-12)
        row[idx] = 0.0
        col[idx] = 0.0
        assert np.abs(row).max() < 1e-12
        assert np.abs(col).max() < 1e-12


def test_collision_detection_and_fallback():
    # overdamped acoustics collide on the real axis for large viscosity
    npar = normalize(PhysicalParams(nu_tilde=10.0))
    from nsclab.symbol import longitudinal_quartic, solve_quartic

    rs = np.linspace(0.05, 0.5, 4000)
    best_r, best_sep = None, np.inf
    for r in rs:
        lam = solve_quartic(longitudinal_quartic(r, npar))
        sep = np.abs(lam[:, None] - lam[None, :])
        np.fill_diagonal(sep, np.inf)
        rel = sep.min() / np.abs(lam).max()
        if rel < best_sep:
            best_sep, best_r = rel, r
    if best_sep < 1e-6:
        with pytest.raises(EigenvalueCollision):
            green_explicit([best_r, 0.0, 0.0], 1.0, npar)
    G = green_auto([best_r, 0.0, 0.0], 1.0, npar)
    Gm = green_expm([best_r, 0.0, 0.0], 1.0, npar)
    assert np.abs(G.entries - Gm.entries).max() < 1e-7


def test_lowfreq_out_of_band():
    with pytest.raises(OutOfBand):
        green_lowfreq_leading([0.5, 0.0, 0.0], 1.0, NPAR, r0=0.1)


def test_lowfreq_g34_matches_expm():
    xi = np.array([0.01, 0.0, 0.0])
    Gl = green_lowfreq_leading(xi, 10.0, NPAR).entries
    Gm = green_expm(xi, 10.0, NPAR).entries
    rel = abs(Gl[4, 5] - Gm[4, 5]) / abs(Gm[4, 5])
    assert rel < 5.0 * 0.01  # relative error O(|xi|)


def test_lowfreq_coefficients_sum_to_one():
    # the density-density leading coefficients telescope to 1 at t=0 up to O(r)
    for r in (0.01, 0.005):
        G = green_lowfreq_leading([r, 0.0, 0.0], 0.0, NPAR).entries
        assert abs(G[0, 0] - 1.0) < 1.0 * r**2 + 1e-12
        assert np.abs(G - np.eye(8)).max() < 1.0 * r + 1e-12
    c2, s2 = NPAR.c**2, NPAR.sigma**2
    assert c2 / (2 * (c2 + s2)) * 2 + s2 / (c2 + s2) == pytest.approx(1.0, abs=1e-15)


def test_lowfreq_convergence_scan():
    # relative error of the full 8x8 leading matrix vs expm decreases ~ |xi|
    # at fixed scaled time |xi|^2 t
    errs = []
    radii = [0.08, 0.04, 0.02, 0.01]
    for r in radii:
        xi = np.array([r, 0.0, 0.0])
        t = 1.0 / r**2
        Gl = green_lowfreq_leading(xi, t, NPAR).entries
        Gm = green_expm(xi, t, NPAR).entries
        errs.append(np.abs(Gl - Gm).max() / np.abs(Gm).max())
    slope = np.polyfit(np.log(radii), np.log(errs), 1)[0]
    assert slope >= 0.5
    assert errs[-1] < 0.5 * errs[0]


def test_apply_green_identity_and_zero():
    G = green_expm([0.4, 0.1, 0.0], 0.0, NPAR)
    u = np.arange(8.0) + 1j * np.arange(8.0)
    assert np.abs(apply_green(G, u) - u).max() < 1e-12
    Gt = green_expm([0.4, 0.1, 0.0], 3.0, NPAR)
    assert np.abs(apply_green(Gt, np.zeros(8))).max() == 0.0


def test_apply_green_oracle_equivalence():
    rng = np.random.default_rng(21)
    for _ in range(30):
        r = 10.0 ** rng.uniform(-2, 2)
        d = rng.normal(size=3)
        xi = r * d / np.linalg.norm(d)
        t = rng.uniform(0, 10)
        u0 = rng.normal(size=8) + 1j * rng.normal(size=8)
        try:
            ve = apply_green(green_explicit(xi, t, NPAR), u0)
        except EigenvalueCollision:
            continue
        vm = apply_green(green_expm(xi, t, NPAR), u0)
        assert np.abs(ve - vm).max() < 1e-8 * (1 + np.abs(vm).max())


def test_spectral_radius_bounded():
    rng = np.random.default_rng(33)
    for _ in range(20):
        xi = rng.normal(size=3)
        t = rng.uniform(0, 20)
        G = green_expm(xi, t, NPAR).entries
        rho = np.abs(np.linalg.eigvals(G)).max()
        assert rho <= 1.0 + 1e-9
