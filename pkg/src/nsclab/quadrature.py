"""Adaptive panel Gauss-Legendre quadrature for smooth-but-oscillatory radial integrands.

Degree-16 Gauss-Legendre per panel; a panel's error is estimated by comparing
against its two halves, and the worst panels are bisected until the summed
estimate meets the tolerance.  Integrands are evaluated vectorized over node
arrays and must be pure; panel order is deterministic, so results are
bit-reproducible for a fixed panel set.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure

GAUSS_DEGREE = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_DEGREE)


def panel_nodes_weights(edges: np.ndarray):
    """All Gauss nodes/weights for the panels defined by `edges` (increasing)."""
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def split_edges(edges: np.ndarray) -> np.ndarray:
    """Bisect every panel."""
    edges = np.asarray(edges, dtype=float)
    mids = 0.5 * (edges[1:] + edges[:-1])
    return np.sort(np.concatenate([edges, mids]))


def _panel_integrals(f, edges):
    nodes, weights = panel_nodes_weights(edges)
    vals = np.asarray(f(nodes), dtype=float)
    return (vals * weights).reshape(-1, GAUSS_DEGREE).sum(axis=1)


def integrate_adaptive(f, edges, rel_tol=1e-9, abs_floor=0.0, max_panels=20000):
    """Adaptively refine `edges` until the error estimate meets the tolerance.

    Returns (value, error_estimate, final_edges).  The estimate for each panel
    is |I_panel - I_halves|; refinement bisects the worst offenders.  Raises
    QuadratureFailure once max_panels is exceeded while still above tolerance.
    """
    edges = np.asarray(edges, dtype=float)
    for _ in range(60):
        coarse = _panel_integrals(f, edges)
        fine_edges = split_edges(edges)
        fine = _panel_integrals(f, fine_edges)
        fine_pairs = fine.reshape(-1, 2).sum(axis=1)
        panel_err = np.abs(coarse - fine_pairs)
        value = float(fine.sum())
        err = float(panel_err.sum())
        tol = rel_tol * abs(value) + abs_floor
        if err <= tol:
            return value, err, edges
        if edges.size - 1 >= max_panels:
            raise QuadratureFailure(
                f"refinement budget exhausted: {edges.size - 1} panels, "
                f"error {err:.3e} > tolerance {tol:.3e}"
            )
        # bisect every panel contributing more than its fair share
        cutoff = max(tol / max(panel_err.size, 1), np.partition(panel_err, -1)[-1] * 1e-3)
        refine = panel_err > cutoff
        if not refine.any():
            refine[np.argmax(panel_err)] = True
        new_edges = [edges[0]]
        for i, split in enumerate(refine):
            if split:
                new_edges.append(0.5 * (edges[i] + edges[i + 1]))
            new_edges.append(edges[i + 1])
        edges = np.array(new_edges)
    raise QuadratureFailure("adaptive refinement did not converge")


def values_with_errors(fs, edges):
    """Evaluate several integrands on a shared panel set.

    Returns (values, errors): each value comes from the half-split panels, the
    error estimate from the difference against the unsplit panels.  `fs` maps
    a node array to an array of shape (n_nodes, n_integrands).
    """
    nodes_c, w_c = panel_nodes_weights(edges)
    nodes_f, w_f = panel_nodes_weights(split_edges(edges))
    vals_c = np.asarray(fs(nodes_c), dtype=float)
    vals_f = np.asarray(fs(nodes_f), dtype=float)
    coarse = w_c @ vals_c
    fine = w_f @ vals_f
    return fine, np.abs(fine - coarse)
