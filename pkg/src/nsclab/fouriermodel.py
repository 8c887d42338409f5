"""Classical instantaneous-conduction comparator (q = -kappa grad theta).

Substituting the instantaneous law into the energy equation and applying the
same perturbation scalings yields a 5x5 system on (n, w, phi) whose only
difference from the relaxing model is the diffusion entry kappa' |xi|^2,
kappa' = tau b^2, in the phi diagonal.  kappa' is independent of tau, so the
comparator is the tau -> 0 limit at fixed heat conductivity.

The induced heat flux is reported as psi_F = -tau b grad(phi) in scaled units,
dimensionally commensurate with the relaxing model's psi.  The sharpest
contrast between the two laws (the highest-derivative decay rate) is a
regularity phenomenon invisible to smooth-data numerics; only the shared
rates are tested here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linsim import (
    FOUR_PI,
    DEFAULT_BANDS,
    FrequencyBands,
    NormSeries,
    RadialDataSpec,
    _normalize_components,
    initial_edges,
    request_key,
)
from .params import NormalizedParams
from .propagators import FourierEvolver
from .quadrature import integrate_adaptive, values_with_errors
from .symbol import solve_quartic_many


@dataclass
class FourierSymbol:
    """5x5 symbol in the ordering (n, w1..3, phi)."""

    entries: np.ndarray
    xi: np.ndarray


def build_symbol_fourier(xi, npar: NormalizedParams) -> FourierSymbol:
    """Acoustic blocks as in the relaxing model, diffusion kappa'|xi|^2 on phi."""
    xi = np.asarray(xi, dtype=float)
    r2 = float(xi @ xi)
    B = np.zeros((5, 5), dtype=complex)
    B[0, 1:4] = 1j * npar.c * xi
    B[1:4, 0] = 1j * npar.c * xi
    B[1:4, 1:4] = npar.nu * r2 * np.eye(3) + (npar.nu + npar.eta) * np.outer(xi, xi)
    B[1:4, 4] = 1j * npar.sigma * xi
    B[4, 1:4] = 1j * npar.sigma * xi
    B[4, 4] = npar.kappa_prime * r2
    return FourierSymbol(entries=B, xi=xi)


def longitudinal_cubic(r: float, npar: NormalizedParams) -> np.ndarray:
    """Monic cubic whose roots are the longitudinal comparator eigenvalues."""
    tn, kp = npar.two_nu_eta, npar.kappa_prime
    c2s2 = npar.c**2 + npar.sigma**2
    return np.array([
        1.0,
        (tn + kp) * r**2,
        c2s2 * r**2 + kp * tn * r**4,
        kp * npar.c**2 * r**4,
    ])


def solve_cubic(coeffs: np.ndarray) -> np.ndarray:
    return np.roots(coeffs)


class _FourierState:
    def __init__(self, data: RadialDataSpec, npar: NormalizedParams,
                 nodes: np.ndarray, t: float):
        self.nodes = nodes
        self.npar = npar
        evolver = FourierEvolver(nodes, npar)
        v0 = data.profiles(nodes)[:, :3]
        self.v = np.einsum("nij,nj->ni", evolver.matrices(t), v0)
        tr0 = data.transverse(nodes)[:, 0]
        self.w_trans = np.exp(-npar.nu * nodes**2 * t) * tr0

    def component_sq(self, component) -> np.ndarray:
        total = np.zeros(self.nodes.size)
        for name in _normalize_components(component):
            if name == "n":
                total += self.v[:, 0] ** 2
            elif name == "w":
                total += self.v[:, 1] ** 2 + self.w_trans**2
            elif name == "phi":
                total += self.v[:, 2] ** 2
            elif name == "psi":
                # induced flux: psi_F_hat = -tau b (i xi) phi_hat
                total += (self.npar.tau * self.npar.b * self.nodes * self.v[:, 2]) ** 2
        return total


def evolve_series_fourier(data: RadialDataSpec, npar: NormalizedParams, times,
                          requests, bands: FrequencyBands = DEFAULT_BANDS,
                          rel_tol: float = 1e-9, max_panels: int = 20000) -> NormSeries:
    """Exact comparator evolution; request format matches `evolve_series`.

    The component name "psi" refers to the induced flux psi_F.
    """
    times = np.asarray(times, dtype=float)
    requests = [(_normalize_components(c), int(k), band) for c, k, band in requests]
    columns = {request_key(c, k, band): np.empty(times.size) for c, k, band in requests}
    errors = {key: np.empty(times.size) for key in columns}
    k_max = max(k for _, k, _ in requests)

    for i, t in enumerate(times):
        def reference(nodes):
            state = _FourierState(data, npar, nodes, t)
            return (FOUR_PI * nodes**2 * (1.0 + nodes ** (2 * k_max))
                    * state.component_sq(("n", "w", "phi", "psi")))

        edges = initial_edges(data, npar, t, bands)
        _, _, edges = integrate_adaptive(reference, edges, rel_tol=rel_tol,
                                         max_panels=max_panels)

        def all_integrands(nodes):
            state = _FourierState(data, npar, nodes, t)
            cols = np.empty((nodes.size, len(requests)))
            for j, (component, k, band) in enumerate(requests):
                w = FOUR_PI * nodes ** (2 + 2 * k) * bands.weight(band, nodes)
                cols[:, j] = w * state.component_sq(component)
            return cols

        vals_sq, errs_sq = values_with_errors(all_integrands, edges)
        vals_sq = np.maximum(vals_sq, 0.0)
        for j, (c, k, band) in enumerate(requests):
            key = request_key(c, k, band)
            columns[key][i] = np.sqrt(vals_sq[j])
            errors[key][i] = (errs_sq[j] / max(2.0 * np.sqrt(vals_sq[j]), 1e-300)
                              if vals_sq[j] > 0 else 0.0)
    return NormSeries(times=times, columns=columns, errors=errors)


def relaxation_limit_errors(npar_for_tau, taus, r: float = 1.0) -> dict:
    """Branch distance between the relaxing and comparator spectra per tau.

    `npar_for_tau` maps tau to NormalizedParams at fixed heat conductivity.
    For each tau the root nearest -1/tau is removed and the remaining three
    are matched greedily against the comparator cubic roots; the returned
    value is the largest matched distance (expected O(tau)).
    """
    out = {}
    for tau in taus:
        npar = npar_for_tau(tau)
        from .symbol import longitudinal_quartic

        quartic_roots = solve_quartic_many(
            longitudinal_quartic(r, npar).as_array()[None, :])[0]
        cubic_roots = solve_cubic(longitudinal_cubic(r, npar))
        stiff = np.argmin(np.abs(quartic_roots + 1.0 / tau))
        slow = np.delete(quartic_roots, stiff)
        remaining = list(slow)
        worst = 0.0
        for target in cubic_roots:
            i = int(np.argmin(np.abs(np.array(remaining) - target)))
            worst = max(worst, abs(remaining[i] - target))
            remaining.pop(i)
        out[tau] = worst
    return out
