"""Vectorized real-reduced propagators for radially symmetric frequency data.

For a radial frequency of magnitude r the longitudinal components evolve by a
4x4 system.  Writing the state as the real profile vector

    v = (n_hat, -i w_L, phi_hat, -i psi_L)

(the physical-realness convention: vector profiles enter as i * profile *
xi/|xi|), the propagator is a real 4x4 matrix.  Its entries are assembled from
the residues of the dispersion quartic; nodes whose roots nearly collide fall
back to a dense matrix exponential.

The instantaneous-conduction comparator reduces the same way to a real 3x3 on
(n_hat, -i w_L, phi_hat).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .params import NormalizedParams
from .symbol import longitudinal_quartic, solve_quartic_many

_COLLISION_REL = 1e-6


def quartic_roots_at(nodes: np.ndarray, npar: NormalizedParams) -> np.ndarray:
    """Longitudinal quartic roots for every radius in `nodes`; shape (n, 4)."""
    rows = np.empty((nodes.size, 5))
    for i, r in enumerate(nodes):
        rows[i] = longitudinal_quartic(float(r), npar).as_array()
    return solve_quartic_many(rows)


def _quartic_rows(nodes, npar):
    c2, s2, b2 = npar.c**2, npar.sigma**2, npar.b**2
    tn, tau = npar.two_nu_eta, npar.tau
    r2 = nodes**2
    rows = np.empty((nodes.size, 5))
    rows[:, 0] = tau
    rows[:, 1] = 1.0 + tau * tn * r2
    rows[:, 2] = (tau * (c2 + b2 + s2) + tn) * r2
    rows[:, 3] = (c2 + s2 + tau * b2 * tn * r2) * r2
    rows[:, 4] = tau * c2 * b2 * r2**2
    return rows


def real_generator(r: float, npar: NormalizedParams) -> np.ndarray:
    """Generator of the real-reduced longitudinal flow: dv/dt = A(r) v."""
    c, sg, b, tau, tn = npar.c, npar.sigma, npar.b, npar.tau, npar.two_nu_eta
    return np.array([
        [0.0, c * r, 0.0, 0.0],
        [-c * r, -tn * r**2, -sg * r, 0.0],
        [0.0, sg * r, 0.0, b * r],
        [0.0, 0.0, -b * r, -1.0 / tau],
    ])


class LongitudinalEvolver:
    """Per-node spectral data reused across evaluation times."""

    def __init__(self, nodes: np.ndarray, npar: NormalizedParams):
        self.nodes = np.asarray(nodes, dtype=float)
        self.npar = npar
        lam = solve_quartic_many(_quartic_rows(self.nodes, npar))
        r2 = (self.nodes**2)[:, None]
        self.lam = lam
        self.g = lam**2 + lam / npar.tau + npar.b**2 * r2
        self.h = lam**2 + npar.two_nu_eta * r2 * lam + npar.c**2 * r2
        D = np.ones_like(lam)
        for k in range(4):
            for j in range(4):
                if j != k:
                    D[:, k] = D[:, k] * (lam[:, k] - lam[:, j])
        self.D = D
        sep = np.abs(lam[:, :, None] - lam[:, None, :])
        sep[:, np.arange(4), np.arange(4)] = np.inf
        self.collided = sep.min(axis=(1, 2)) < _COLLISION_REL * np.abs(lam).max(axis=1)

    def matrices(self, t: float) -> np.ndarray:
        """Real 4x4 propagators at time t, shape (n, 4, 4)."""
        npar = self.npar
        lam, g, h, D = self.lam, self.g, self.h, self.D
        r = self.nodes
        r2 = (r**2)[:, None]
        E = np.exp(lam * t)
        c, sg, b, tau = npar.c, npar.sigma, npar.b, npar.tau
        s11 = np.sum(-(c**2) * r2 * g * E / (lam * D), axis=1).real
        s12 = np.sum(-c * g * E / D, axis=1).real
        s13 = np.sum(-c * sg * r2 * (lam + 1.0 / tau) * E / D, axis=1).real
        s14 = np.sum(c * sg * b * r2 * E / D, axis=1).real
        s22 = np.sum(g * lam * E / D, axis=1).real
        s23 = np.sum(-sg * lam * (lam + 1.0 / tau) * E / D, axis=1).real
        s24 = np.sum(-sg * b * lam * E / D, axis=1).real
        s33 = np.sum((lam + 1.0 / tau) * h * E / D, axis=1).real
        s34 = np.sum(-b * h * E / D, axis=1).real
        s44 = np.sum(lam * (h + sg**2 * r2) * E / D, axis=1).real
        G = np.empty((r.size, 4, 4))
        G[:, 0, 0] = s11
        G[:, 0, 1] = -s12 * r
        G[:, 0, 2] = s13
        G[:, 0, 3] = -s14 * r
        G[:, 1, 0] = s12 * r
        G[:, 1, 1] = s22
        G[:, 1, 2] = s23 * r
        G[:, 1, 3] = s24 * r**2
        G[:, 2, 0] = s13
        G[:, 2, 1] = -s23 * r
        G[:, 2, 2] = s33
        G[:, 2, 3] = -s34 * r
        G[:, 3, 0] = s14 * r
        G[:, 3, 1] = s24 * r**2
        G[:, 3, 2] = s34 * r
        G[:, 3, 3] = s44
        if self.collided.any():
            for i in np.flatnonzero(self.collided):
                G[i] = scipy.linalg.expm(real_generator(self.nodes[i], npar) * t)
        return G


def fourier_real_generator(r: float, npar: NormalizedParams) -> np.ndarray:
    """Real-reduced generator of the instantaneous-conduction comparator."""
    c, sg, tn = npar.c, npar.sigma, npar.two_nu_eta
    kp = npar.kappa_prime
    return np.array([
        [0.0, c * r, 0.0],
        [-c * r, -tn * r**2, -sg * r],
        [0.0, sg * r, -kp * r**2],
    ])


class FourierEvolver:
    """Eigendecomposition-based evolver for the 3x3 comparator system."""

    def __init__(self, nodes: np.ndarray, npar: NormalizedParams):
        self.nodes = np.asarray(nodes, dtype=float)
        self.npar = npar
        A = np.zeros((self.nodes.size, 3, 3))
        for i, r in enumerate(self.nodes):
            A[i] = fourier_real_generator(float(r), npar)
        mu, V = np.linalg.eig(A)
        sep = np.abs(mu[:, :, None] - mu[:, None, :])
        sep[:, np.arange(3), np.arange(3)] = np.inf
        scale = np.maximum(np.abs(mu).max(axis=1), 1e-300)
        self.defective = sep.min(axis=(1, 2)) < 1e-9 * scale
        self.mu = mu
        self.V = V
        self.Vinv = np.linalg.inv(V)
        self.A = A

    def matrices(self, t: float) -> np.ndarray:
        E = np.exp(self.mu * t)
        G = np.einsum("nik,nk,nkj->nij", self.V, E, self.Vinv).real
        if self.defective.any():
            for i in np.flatnonzero(self.defective):
                G[i] = scipy.linalg.expm(self.A[i] * t)
        return G
