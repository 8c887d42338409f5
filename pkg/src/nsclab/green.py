"""Frequency-space propagator G_hat(xi, t) = exp(-B(xi) t), three ways.

* `green_explicit`  - spectral-sum formulas over the four longitudinal roots
  (residues of the resolvent), plus the transverse factors exp(lambda1 t) and
  exp(lambda2 t) on the projector complementary to xi xi^T/|xi|^2.
* `green_expm`      - matrix exponential (scaling-and-squaring, diagonal Pade);
  valid at eigenvalue collisions and at xi = 0, used as the oracle.
* `green_lowfreq_leading` - leading small-|xi| form of every entry, assembled
  from the tracked longitudinal roots.

All three return the 8x8 matrix in the ordering (n, w1..3, phi, psi1..3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EigenvalueCollision, OutOfBand
from .params import NormalizedParams
from .symbol import EigenSet, build_symbol, longitudinal_quartic, solve_quartic

#: Pairwise root separation below `COLLISION_FACTOR * max|lambda|` routes the
#: explicit evaluator to the matrix exponential (the residue denominators
#: Prod(lambda_k - lambda_j) blow up at collisions).
COLLISION_FACTOR = 1e-6


@dataclass
class GreenMatrix:
    entries: np.ndarray
    xi: np.ndarray
    t: float
    method: str


@dataclass
class SpectralWeights:
    """The per-root weights g_k, h_k entering the explicit entry formulas."""

    g: np.ndarray
    h: np.ndarray


def gk_hk(eigs: EigenSet, npar: NormalizedParams) -> SpectralWeights:
    """g_k = l^2 + l/tau + b^2 r^2 and h_k = l^2 + (2nu+eta) r^2 l + c^2 r^2."""
    lam = eigs.lambdas
    r2 = eigs.r**2
    g = lam**2 + lam / npar.tau + npar.b**2 * r2
    h = lam**2 + npar.two_nu_eta * r2 * lam + npar.c**2 * r2
    return SpectralWeights(g=g, h=h)


def _longitudinal_scalars(lam, g, h, D, E, r2, npar):
    """The ten distinct entry amplitudes, as sums over the four roots.

    Vector entries carry an implicit factor i*xi and tensor entries a factor
    xi xi^T; s22 and s44 are already normalized by |xi|^2.
    """
    c, sigma, b, tau = npar.c, npar.sigma, npar.b, npar.tau
    s11 = np.sum(-(c**2) * r2 * g * E / (lam * D), axis=-1)
    s12 = np.sum(-c * g * E / D, axis=-1)
    s13 = np.sum(-c * sigma * r2 * (lam + 1.0 / tau) * E / D, axis=-1)
    s14 = np.sum(c * sigma * b * r2 * E / D, axis=-1)
    s22 = np.sum(g * lam * E / (r2 * D), axis=-1)
    s23 = np.sum(-sigma * lam * (lam + 1.0 / tau) * E / D, axis=-1)
    s24 = np.sum(-sigma * b * lam * E / D, axis=-1)
    s33 = np.sum((lam + 1.0 / tau) * h * E / D, axis=-1)
    s34 = np.sum(-b * h * E / D, axis=-1)
    s44 = np.sum(lam * (h + sigma**2 * r2) * E / (r2 * D), axis=-1)
    return s11, s12, s13, s14, s22, s23, s24, s33, s34, s44


def _assemble(xi, r, s, e1, e2):
    """Place the ten amplitudes into the symmetric 8x8 layout."""
    s11, s12, s13, s14, s22, s23, s24, s33, s34, s44 = s
    xh = xi / r
    P = np.outer(xh, xh)
    Q = np.eye(3) - P
    ixi = 1j * xi
    xxt = np.outer(xi, xi)
    G = np.zeros((8, 8), dtype=complex)
    G[0, 0] = s11
    G[0, 1:4] = s12 * ixi
    G[1:4, 0] = s12 * ixi
    G[0, 4] = s13
    G[4, 0] = s13
    G[0, 5:8] = s14 * ixi
    G[5:8, 0] = s14 * ixi
    G[1:4, 1:4] = s22 * xxt + Q * e1
    G[1:4, 4] = s23 * ixi
    G[4, 1:4] = s23 * ixi
    G[1:4, 5:8] = s24 * xxt
    G[5:8, 1:4] = s24 * xxt
    G[4, 4] = s33
    G[4, 5:8] = s34 * ixi
    G[5:8, 4] = s34 * ixi
    G[5:8, 5:8] = s44 * xxt + Q * e2
    return G


def green_explicit(xi, t: float, npar: NormalizedParams) -> GreenMatrix:
    """Explicit spectral-sum propagator; requires |xi| > 0 and separated roots.

    Raises EigenvalueCollision when the minimum pairwise root separation falls
    below COLLISION_FACTOR * max|lambda|; callers should fall back to
    `green_expm` (see `green_auto`).
    """
    xi = np.asarray(xi, dtype=float)
    r = float(np.linalg.norm(xi))
    if r == 0.0:
        raise ValueError("green_explicit requires |xi| > 0; use green_expm at xi = 0")
    lam = solve_quartic(longitudinal_quartic(r, npar))
    sep = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(sep, np.inf)
    threshold = COLLISION_FACTOR * np.abs(lam).max()
    if sep.min() < threshold:
        raise EigenvalueCollision(
            f"root separation {sep.min():.3e} below threshold {threshold:.3e} at |xi|={r}"
        )
    r2 = r * r
    g = lam**2 + lam / npar.tau + npar.b**2 * r2
    h = lam**2 + npar.two_nu_eta * r2 * lam + npar.c**2 * r2
    D = np.ones_like(lam)
    for k in range(4):
        for j in range(4):
            if j != k:
                D[k] = D[k] * (lam[k] - lam[j])
    E = np.exp(lam * t)
    s = _longitudinal_scalars(lam, g, h, D, E, r2, npar)
    e1 = np.exp(-npar.nu * r2 * t)
    e2 = np.exp(-t / npar.tau)
    return GreenMatrix(entries=_assemble(xi, r, s, e1, e2), xi=xi, t=t, method="explicit")


def green_expm(xi, t: float, npar: NormalizedParams) -> GreenMatrix:
    """Propagator by matrix exponential of -B(xi) t; valid everywhere."""
    xi = np.asarray(xi, dtype=float)
    B = build_symbol(xi, npar).entries
    return GreenMatrix(entries=scipy.linalg.expm(-B * t), xi=xi, t=t, method="expm")


def green_auto(xi, t: float, npar: NormalizedParams) -> GreenMatrix:
    """Explicit evaluator with automatic fallback to expm at collisions/xi=0."""
    try:
        return green_explicit(xi, t, npar)
    except (EigenvalueCollision, ValueError):
        return green_expm(xi, t, npar)


def green_lowfreq_leading(xi, t: float, npar: NormalizedParams, r0: float = 0.1) -> GreenMatrix:
    """Leading small-frequency form of every entry, using tracked roots.

    Valid for |xi| <= r0 (raises OutOfBand beyond).  Entry errors are O(|xi|)
    relative; the exponents exp(lambda_k t) use the numerically exact roots,
    only the residue coefficients are truncated.
    """
    xi = np.asarray(xi, dtype=float)
    r = float(np.linalg.norm(xi))
    if r > r0:
        raise OutOfBand(f"|xi| = {r} exceeds the low band cutoff r0 = {r0}")
    if r == 0.0:
        raise ValueError("leading-order form needs |xi| > 0")
    from .symbol import eigen_branches

    es = eigen_branches([r], npar)[0]
    l3, l4, l5, l6 = es.lambdas
    e1 = np.exp(es.lambda1 * t)
    e2 = np.exp(es.lambda2 * t)
    e3, e4, e5, e6 = np.exp(np.array([l3, l4, l5, l6]) * t)

    c, sigma, b, tau = npar.c, npar.sigma, npar.b, npar.tau
    c2, s2 = c * c, sigma * sigma
    ch2 = c2 + s2
    ch = np.sqrt(ch2)
    r2 = r * r
    xh = xi / r
    P = np.outer(xh, xh)
    Q = np.eye(3) - P
    ixi = 1j * xi
    xxt = np.outer(xi, xi)

    g11 = (-c2 * b**4 * tau**6 * r**6 * e3
           + c2 / (2 * ch2) * (e4 + e5) + s2 / ch2 * e6)
    g12 = (c * b**4 * tau**5 * r**4 * ixi * e3
           - c * xi / (2 * ch * r) * e4 + c * xi / (2 * ch * r) * e5
           - c * b**2 * s2 * tau / ch2**2 * e6 * ixi)
    g13 = (c * b**2 * sigma * tau**4 * r**4 * e3
           + c * sigma / (2 * ch2) * (e4 + e5) - c * sigma / ch2 * e6)
    g14 = (-c * b * sigma * tau**3 * r2 * ixi * e3
           - c * b * sigma * tau / (2 * ch2) * (e4 - e5) * ixi
           + c * b * sigma * tau / ch2 * e6 * ixi)
    g22 = (Q * e1 + b**4 * tau**4 * r2 * xxt * e3
           + 0.5 * P * (e4 + e5) - c2 * b**4 * s2 * tau**2 / ch2**3 * xxt * e6)
    g23 = (-b**2 * sigma * tau**3 * r2 * ixi * e3
           - sigma * xi / (2 * ch * r) * (e4 - e5)
           + c2 * b**2 * sigma * tau / ch2**2 * ixi * e6)
    g24 = (-b * sigma * tau**2 * xxt * e3
           + 1j * b * sigma * tau / (2 * ch * r) * xxt * (e4 - e5)
           + c2 * b**3 * sigma * tau**2 / ch2**2 * xxt * e6)
    g33 = (-b**2 * tau**2 * r2 * e3
           + s2 / (2 * ch2) * (e4 + e5) + c2 / ch2 * e6)
    g34 = (b * tau * ixi * e3
           - b * s2 * tau / (2 * ch2) * ixi * (e4 + e5) - c2 * b * tau / ch2 * ixi * e6)
    g44 = (Q * e2 + P * e3
           - b**2 * s2 * tau**2 / (2 * ch2) * xxt * (e4 + e5)
           - c2 * b**2 * tau**2 / ch2 * xxt * e6)

    G = np.zeros((8, 8), dtype=complex)
    G[0, 0] = g11
    G[0, 1:4] = g12
    G[1:4, 0] = g12
    G[0, 4] = g13
    G[4, 0] = g13
    G[0, 5:8] = g14
    G[5:8, 0] = g14
    G[1:4, 1:4] = g22
    G[1:4, 4] = g23
    G[4, 1:4] = g23
    G[1:4, 5:8] = g24
    G[5:8, 1:4] = g24
    G[4, 4] = g33
    G[4, 5:8] = g34
    G[5:8, 4] = g34
    G[5:8, 5:8] = g44
    return GreenMatrix(entries=G, xi=xi, t=t, method="lowfreq")


def apply_green(G: GreenMatrix, u0_hat) -> np.ndarray:
    """Propagate an 8-component frequency-space state: G @ u0_hat."""
    u0_hat = np.asarray(u0_hat, dtype=complex)
    if u0_hat.shape != (8,):
        raise ValueError(f"u0_hat must have shape (8,), got {u0_hat.shape}")
    return G.entries @ u0_hat
