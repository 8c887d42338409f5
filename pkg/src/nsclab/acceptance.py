"""The acceptance suite: every headline claim as an executable criterion.

Each criterion reports its measured values, the tolerance it was held to, the
wall time against its runtime budget, and a pass flag.  Criteria that share an
expensive computation (the long decay runs) reuse it through the suite
context so budgets reflect honest costs.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from .config import ExperimentConfig
from .errors import EigenvalueCollision
from .fitting import fit_decay
from .fouriermodel import evolve_series_fourier, relaxation_limit_errors
from .green import green_expm, green_explicit
from .linsim import (
    RadialDataSpec,
    duhamel_reconstruct_psi,
    evolve_series,
    make_lowerbound_data,
    request_key,
    sobolev_norm,
    z1_lower_integral,
)
from .nonlinsim import LinearPropagator, PeriodicGrid, init_state, run
from .params import PhysicalParams, normalize
from .symbol import eigen_branches, spectral_bounds, verify_expansions


class _Context:
    def __init__(self, physical: PhysicalParams):
        self.physical = physical
        self.npar = normalize(physical)
        self.cache = {}

    def decay_series(self):
        """Shared 40-sample decay run on the optimality data, k = 0, 1, 2."""
        if "decay" not in self.cache:
            data = make_lowerbound_data(1.0, 0.1, 10.0)
            times = np.geomspace(1e2, 1e5, 40)
            requests = [(("n", "w", "phi"), k, "full") for k in (0, 1, 2)]
            requests += [("psi", k, "full") for k in (0, 1, 2)]
            requests += [("n", 0, "full")]
            series = evolve_series(data, self.npar, times, requests)
            self.cache["decay"] = (data, times, series)
        return self.cache["decay"]


def _c1_eigenvalue_asymptotics(ctx):
    low = verify_expansions(ctx.npar, "low", [0.04, 0.02, 0.01])
    high = verify_expansions(ctx.npar, "high", [50.0, 100.0, 200.0])
    orders = {
        "low": {label: measured for label, _, measured, _ in low.branch_rows()},
        "high": {label: measured for label, _, measured, _ in high.branch_rows()},
    }
    return {
        "passed": low.passed and high.passed,
        "measured": orders,
        "tolerance": "empirical order >= claimed order - 0.3 per branch, both bands",
    }


def _c2_spectral_gaps(ctx):
    radii = np.geomspace(1e-4, 1e4, 500)
    gaps = {}
    ok = True
    taus = sorted({0.1, 1.0, 10.0, ctx.physical.tau})
    for tau in taus:
        npar = normalize(dataclasses.replace(ctx.physical, tau=tau))
        bounds = spectral_bounds(eigen_branches(radii, npar), r0=0.1, R0=10.0)
        gaps[f"tau={tau}"] = {"beta": bounds.beta, "R1": bounds.R1, "R2": bounds.R2}
        ok = ok and min(bounds.beta, bounds.R1, bounds.R2) > 0
    return {
        "passed": ok,
        "measured": gaps,
        "tolerance": "beta, R1, R2 > 0 for every tau (no upper restriction on tau)",
    }


def _c3_green_oracle(ctx):
    rng = np.random.default_rng(2024)
    worst = 0.0
    collisions = 0
    n_samples = 1000
    for _ in range(n_samples):
        r = 10.0 ** rng.uniform(-3, 3)
        d = rng.normal(size=3)
        xi = r * d / np.linalg.norm(d)
        t = rng.uniform(0.0, 100.0)
        try:
            Ge = green_explicit(xi, t, ctx.npar).entries
        except EigenvalueCollision:
            collisions += 1
            continue
        Gm = green_expm(xi, t, ctx.npar).entries
        tol_scale = 1.0 + np.abs(Gm).max()
        worst = max(worst, np.abs(Ge - Gm).max() / tol_scale)
    return {
        "passed": worst <= 1e-7 and collisions < 0.01 * n_samples,
        "measured": {"worst_scaled_error": worst, "collisions": collisions},
        "tolerance": "max entry error <= 1e-7 (absolute + relative); collisions < 1%",
    }


def _c4_upper_decay_rates(ctx):
    _, times, series = ctx.decay_series()
    slopes = {}
    ok = True
    for k in (0, 1, 2):
        s = fit_decay(times, series.columns[request_key(("n", "w", "phi"), k, "full")]).slope
        slopes[f"(n,w,phi) k={k}"] = s
        ok = ok and abs(s - (-0.75 - 0.5 * k)) <= 0.05
        s_psi = fit_decay(times, series.columns[request_key("psi", k, "full")]).slope
        slopes[f"psi k={k}"] = s_psi
        ok = ok and abs(s_psi - (-1.25 - 0.5 * k)) <= 0.05
    return {
        "passed": ok,
        "measured": slopes,
        "tolerance": "slopes -3/4-k/2 (fluid) and -5/4-k/2 (flux) +- 0.05, k = 0..2",
    }


def _c5_optimality(ctx):
    _, times, series = ctx.decay_series()
    comp_n = (1.0 + times) ** 0.75 * series.columns[request_key("n", 0, "full")]
    comp_psi = (1.0 + times) ** 1.25 * series.columns[request_key("psi", 0, "full")]
    ratio_n = comp_n.min() / comp_n.max()
    ratio_psi = comp_psi.min() / comp_psi.max()
    return {
        "passed": ratio_n > 0.2 and ratio_psi > 0.2,
        "measured": {"compensated_n_min_over_max": ratio_n,
                     "compensated_psi_min_over_max": ratio_psi},
        "tolerance": "rate-compensated norms bounded: min > 0.2 * max over [1e2, 1e5]",
    }


def _c6_z1_scaling(ctx):
    ts = (1e3, 4e3, 1.6e4)
    comp = [z1_lower_integral(t, 1.0, ctx.npar) * t**1.5 for t in ts]
    spread = (max(comp) - min(comp)) / max(comp)
    return {
        "passed": spread < 0.10,
        "measured": {"compensated_values": dict(zip(map(str, ts), comp)),
                     "relative_spread": spread},
        "tolerance": "t^(3/2)-compensated value varies by < 10% across {1e3, 4e3, 1.6e4}",
    }


def _c7_damping_reconstruction(ctx):
    data = make_lowerbound_data(1.0, 0.1, 10.0)
    discrepancies = {}
    ok = True
    for t in (1.0, 10.0, 100.0):
        _, _, rel = duhamel_reconstruct_psi(data, ctx.npar, t)
        discrepancies[str(t)] = rel
        ok = ok and rel < 1e-6
    return {
        "passed": ok,
        "measured": discrepancies,
        "tolerance": "relative L2 discrepancy < 1e-6 at t in {1, 10, 100}",
    }


def _c8_fourier_comparison(ctx):
    data, times, cat = ctx.decay_series()
    reqs = [(("n", "w", "phi"), 0, "full"), ("psi", 0, "full")]
    fou = evolve_series_fourier(data, ctx.npar, times, reqs)
    diffs = {}
    ok = True
    for key in (request_key(("n", "w", "phi"), 0, "full"), request_key("psi", 0, "full")):
        s_cat = fit_decay(times, cat.columns[key]).slope
        s_fou = fit_decay(times, fou.columns[key]).slope
        diffs[key] = {"cattaneo": s_cat, "fourier": s_fou, "difference": abs(s_cat - s_fou)}
        ok = ok and abs(s_cat - s_fou) < 0.05

    def npar_for_tau(tau):
        return normalize(dataclasses.replace(ctx.physical, tau=tau))

    errs = relaxation_limit_errors(npar_for_tau, [1.0, 0.1, 0.01], r=1.0)
    linear_in_tau = errs[0.01] / errs[0.1] < 0.3 and errs[0.1] / errs[1.0] < 0.3
    ok = ok and linear_in_tau and errs[0.01] < 10.0 * 0.01
    return {
        "passed": ok,
        "measured": {"slopes": diffs, "relaxation_limit_errors": {str(k): v for k, v in errs.items()}},
        "tolerance": "model slopes agree within 0.05; branch errors O(tau) at tau = 0.01",
    }


def _c9_nonlinear_invariants(ctx):
    grid = PeriodicGrid(N=16)
    p = ctx.physical
    npar = ctx.npar
    measured = {}

    report, _ = run(p, grid, tmax=10.0, dt=0.05, amplitude=1e-3, seed=17)
    arrays = report.as_arrays()
    norm_n0 = np.sqrt(grid.l2_norm_sq(init_state(grid, npar, amplitude=1e-3, seed=17).coeffs[0]))
    mass_drift = np.abs(arrays["mass"] - arrays["mass"][0]).max() / max(norm_n0, 1e-300)
    measured["relative_mass_drift"] = mass_drift
    entropy_increase = float(np.diff(arrays["entropy"]).max())
    measured["max_entropy_increase_per_step"] = entropy_increase

    drifts = {}
    for dt in (0.05, 0.025):
        rep, _ = run(p, grid, tmax=5.0, dt=dt, amplitude=0.05, seed=13)
        arr = rep.as_arrays()
        drifts[dt] = np.abs(arr["energy_identity"] - arr["energy_identity"][0]).max()
    energy_ratio = drifts[0.05] / drifts[0.025]
    measured["energy_drift_ratio_dt_halving"] = energy_ratio

    errs = {}
    for eps in (1e-3, 5e-4):
        state0 = init_state(grid, npar, amplitude=eps, seed=31)
        _, out = run(p, grid, tmax=1.0, dt=0.05, state0=state0)
        exact = LinearPropagator(grid, npar, 1.0).apply(state0.coeffs)
        errs[eps] = np.sqrt(sum(grid.l2_norm_sq(out.coeffs[i] - exact[i]) for i in range(8)))
    linear_ratio = errs[1e-3] / errs[5e-4]
    measured["linear_consistency_ratio"] = linear_ratio

    ok = (mass_drift < 1e-10 and entropy_increase <= 1e-9
          and 3.0 <= energy_ratio <= 5.0 and 3.5 <= linear_ratio <= 4.5)
    return {
        "passed": ok,
        "measured": measured,
        "tolerance": ("mass drift < 1e-10; entropy non-increasing within 1e-9/step; "
                      "energy drift ratio in [3,5]; linearization ratio in [3.5,4.5]"),
    }


def _c10_norm_engine_exactness(ctx):
    data = RadialDataSpec(n0=lambda r: np.where(r <= 1.0, 1.0, 0.0),
                          r_support=2.0, breakpoints=(1.0,))
    checks = {
        "k0": (sobolev_norm(data, ctx.npar, 0.0, "n", k=0), np.sqrt(4 * np.pi / 3)),
        "k1": (sobolev_norm(data, ctx.npar, 0.0, "n", k=1), np.sqrt(4 * np.pi / 5)),
    }
    from .linsim import negative_norm

    checks["ell1"] = (negative_norm(data, ctx.npar, 0.0, ell=1.0), np.sqrt(4 * np.pi))
    worst = max(abs(a - b) / b for a, b in checks.values())
    return {
        "passed": worst < 1e-9,
        "measured": {name: {"value": a, "exact": b} for name, (a, b) in checks.items()},
        "tolerance": "t = 0 quadrature norms match closed forms to 1e-9 relative",
    }


CRITERIA = [
    ("C1", "eigenvalue asymptotics", 1.0, _c1_eigenvalue_asymptotics),
    ("C2", "spectral gaps across tau", 2.0, _c2_spectral_gaps),
    ("C3", "green function oracle equivalence", 5.0, _c3_green_oracle),
    ("C4", "upper decay rates", 60.0, _c4_upper_decay_rates),
    ("C5", "optimality (two-sided bounds)", 60.0, _c5_optimality),
    ("C6", "oscillatory lower-bound integral scaling", 1.0, _c6_z1_scaling),
    ("C7", "flux damping reconstruction", 10.0, _c7_damping_reconstruction),
    ("C8", "relaxing vs instantaneous conduction", 90.0, _c8_fourier_comparison),
    ("C9", "nonlinear conservation and entropy", 300.0, _c9_nonlinear_invariants),
    ("C10", "norm engine exactness", 1.0, _c10_norm_engine_exactness),
]


def run_acceptance_suite(config: ExperimentConfig | None = None,
                         criteria=None, progress=None) -> dict:
    """Execute every criterion; failures are recorded, never raised.

    Returns a JSON-serializable report with one entry per criterion, the
    resolved configuration, and the overall pass flag.
    """
    config = config or ExperimentConfig()
    ctx = _Context(config.physical)
    selected = criteria or [c[0] for c in CRITERIA]
    entries = []
    for cid, name, budget, func in CRITERIA:
        if cid not in selected:
            continue
        start = time.perf_counter()
        try:
            result = func(ctx)
        except Exception as exc:  # record, do not throw
            result = {"passed": False, "measured": {"error": repr(exc)},
                      "tolerance": "criterion raised"}
        elapsed = time.perf_counter() - start
        entry = {
            "id": cid,
            "name": name,
            "passed": bool(result["passed"]) and elapsed < budget,
            "criterion_passed": bool(result["passed"]),
            "measured": _jsonable(result["measured"]),
            "tolerance": result["tolerance"],
            "seconds": elapsed,
            "runtime_budget_seconds": budget,
        }
        entries.append(entry)
        if progress is not None:
            progress(entry)
    report = {
        "criteria": entries,
        "all_passed": all(e["passed"] for e in entries),
        "config": config.resolved(),
    }
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj
