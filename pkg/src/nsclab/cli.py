"""Command-line interface: experiment orchestration and report emission.

Every report path writes delimited output (CSV) plus a JSON summary embedding
the full resolved configuration, and renders matplotlib figures to files next
to them (disable with --no-plot).  Output is deterministic for a fixed
configuration and seed: re-running a command reproduces the CSV byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .acceptance import run_acceptance_suite
from .config import ExperimentConfig, load_config
from .errors import NsclabError
from .fitting import fit_decay
from .fouriermodel import evolve_series_fourier, relaxation_limit_errors
from .green import green_expm, green_explicit, green_lowfreq_leading
from .linsim import (
    FrequencyBands,
    RadialDataSpec,
    evolve_series,
    make_gaussian_data,
    make_lowerbound_data,
    request_key,
    z1_lower_integral,
)
from .nonlinsim import PeriodicGrid, run, write_snapshot
from .params import normalize
from .symbol import BRANCH_LABELS, eigen_branches, verify_expansions


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _parse_times(spec: str) -> np.ndarray:
    """Time grids like log:1e2:1e5:40 (log-spaced) or lin:0:10:11."""
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] not in ("log", "lin"):
        raise NsclabError(f"bad time grid {spec!r}; expected log:a:b:n or lin:a:b:n")
    a, b, n = float(parts[1]), float(parts[2]), int(parts[3])
    return np.geomspace(a, b, n) if parts[0] == "log" else np.linspace(a, b, n)


def _parse_components(spec: str):
    """Component sets: "n,w,phi;psi" -> [("n","w","phi"), ("psi",)]."""
    return [tuple(group.split(",")) for group in spec.split(";")]


def _build_data(args, cfg: ExperimentConfig) -> RadialDataSpec:
    kind = getattr(args, "data", None) or cfg.data.get("kind", "lowerbound")
    if kind == "lowerbound":
        return make_lowerbound_data(args.mu0, args.r0, args.R0)
    if kind == "gaussian":
        return make_gaussian_data(amplitude=cfg.data.get("amplitude", 1.0),
                                  width=cfg.data.get("width", 1.0),
                                  components=tuple(
                                      cfg.data.get("components", "n").split(",")))
    if kind == "file":
        if not args.data_file:
            raise NsclabError("--data file requires --data-file")
        return _data_from_csv(Path(args.data_file))
    raise NsclabError(f"unknown data kind {kind!r}")


def _data_from_csv(path: Path) -> RadialDataSpec:
    """Tabulated radial profiles: columns r, n0, w0, phi0, psi0 (interpolated)."""
    table = np.genfromtxt(path, delimiter=",", names=True)
    r = table["r"]

    def interp(col):
        vals = table[col] if col in table.dtype.names else np.zeros_like(r)
        return lambda rr: np.interp(rr, r, vals, left=vals[0], right=0.0)

    return RadialDataSpec(n0=interp("n0"), w0=interp("w0"), phi0=interp("phi0"),
                          psi0=interp("psi0"), r_support=float(r.max()))


def cmd_spectrum(args, cfg, out_dir: Path) -> int:
    npar = normalize(cfg.physical)
    radii = np.geomspace(args.rmin, args.rmax, args.num)
    sets = eigen_branches(radii, npar)
    header = ["r", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2"]
    for label in BRANCH_LABELS:
        header += [f"re_{label}", f"im_{label}"]
    header += ["ambiguous"]
    rows = []
    for es in sets:
        row = [es.r, es.lambda1, 0.0, es.lambda2, 0.0]
        for lam in es.lambdas:
            row += [lam.real, lam.imag]
        row.append(float(es.ambiguous))
        rows.append(row)
    csv_path = out_dir / "spectrum.csv"
    _write_csv(csv_path, header, rows)
    if not args.no_plot:
        plotting.plot_spectrum(radii, sets, out_dir / "spectrum.png")
    print(f"wrote {csv_path}")
    return 0


def cmd_verify_expansions(args, cfg, out_dir: Path) -> int:
    npar = normalize(cfg.physical)
    bands = ["low", "high"] if args.band == "both" else [args.band]
    defaults = {"low": [0.04, 0.02, 0.01], "high": [50.0, 100.0, 200.0]}
    report = {"bands": {}, "config": cfg.resolved()}
    all_passed = True
    for band in bands:
        radii = ([float(x) for x in args.radii.split(",")] if args.radii
                 else defaults[band])
        rep = verify_expansions(npar, band, radii)
        report["bands"][band] = {
            "radii": list(map(float, rep.radii)),
            "branches": [
                {"label": label, "claimed_order": claimed,
                 "empirical_order": measured, "passed": ok}
                for label, claimed, measured, ok in rep.branch_rows()
            ],
            "passed": rep.passed,
        }
        all_passed = all_passed and rep.passed
    report["all_passed"] = all_passed
    path = out_dir / "verify_expansions.json"
    _write_json(path, report)
    print(f"wrote {path}: {'PASS' if all_passed else 'FAIL'}")
    return 0 if all_passed else 1


def cmd_green(args, cfg, out_dir: Path) -> int:
    npar = normalize(cfg.physical)
    if args.xi:
        xi = np.array([float(x) for x in args.xi.split(",")])
        if xi.size != 3:
            raise NsclabError("--xi needs three comma-separated components")
    else:
        xi = np.array([args.r, 0.0, 0.0])
    method = {"explicit": green_explicit, "expm": green_expm,
              "lowfreq": green_lowfreq_leading}[args.method]
    G = method(xi, args.t, npar)
    payload = {
        "xi": list(map(float, xi)),
        "t": args.t,
        "method": G.method,
        "entries_re": [[float(v.real) for v in row] for row in G.entries],
        "entries_im": [[float(v.imag) for v in row] for row in G.entries],
        "config": cfg.resolved(),
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_linear_decay(args, cfg, out_dir: Path) -> int:
    npar = normalize(cfg.physical)
    data = _build_data(args, cfg)
    times = _parse_times(args.times)
    ks = [int(k) for k in args.k.split(",")]
    requests = [(comp, k, args.band)
                for comp in _parse_components(args.components) for k in ks]
    series = evolve_series(data, npar, times, requests,
                           bands=FrequencyBands(args.r0, args.R0))
    keys = [request_key(c, k, band) for c, k, band in requests]
    rows = [[t] + [series.columns[key][i] for key in keys]
            for i, t in enumerate(times)]
    csv_path = out_dir / "linear_decay.csv"
    _write_csv(csv_path, ["time"] + keys, rows)

    fits = {}
    summary = {"columns": {}, "config": cfg.resolved()}
    for key in keys:
        try:
            fit = fit_decay(times, series.columns[key])
            fits[key] = fit.slope
            summary["columns"][key] = {
                "slope": fit.slope, "stderr": fit.stderr,
                "intercept": fit.intercept, "window": list(fit.window),
                "n_points": fit.n_points,
            }
        except NsclabError as exc:
            summary["columns"][key] = {"error": str(exc)}
    json_path = out_dir / "linear_decay.json"
    _write_json(json_path, summary)
    if not args.no_plot:
        plotting.plot_norm_series(times, {k: series.columns[k] for k in keys},
                                  out_dir / "linear_decay.png",
                                  "linear decay", fits)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_lower_bound(args, cfg, out_dir: Path) -> int:
    npar = normalize(cfg.physical)
    data = make_lowerbound_data(args.mu0, args.r0, args.R0)
    times = _parse_times(args.times)
    series = evolve_series(data, npar, times,
                           [("n", 0, "full"), ("psi", 0, "full")])
    comp_n = (1 + times) ** 0.75 * series.columns[request_key("n", 0, "full")]
    comp_psi = (1 + times) ** 1.25 * series.columns[request_key("psi", 0, "full")]
    z1 = {str(t): z1_lower_integral(t, args.mu0, npar, args.r0)
          for t in (1e3, 4e3, 1.6e4)}
    rows = [[t, comp_n[i], comp_psi[i]] for i, t in enumerate(times)]
    csv_path = out_dir / "lower_bound.csv"
    _write_csv(csv_path, ["time", "compensated_n", "compensated_psi"], rows)
    payload = {
        "bracket_n": [float(comp_n.min()), float(comp_n.max())],
        "bracket_psi": [float(comp_psi.min()), float(comp_psi.max())],
        "ratio_n": float(comp_n.min() / comp_n.max()),
        "ratio_psi": float(comp_psi.min() / comp_psi.max()),
        "z1_compensated": {k: v * float(k) ** 1.5 for k, v in z1.items()},
        "config": cfg.resolved(),
    }
    _write_json(out_dir / "lower_bound.json", payload)
    if not args.no_plot:
        plotting.plot_compensated(times, {"(1+t)^{3/4} ||n||": comp_n,
                                          "(1+t)^{5/4} ||psi||": comp_psi},
                                  out_dir / "lower_bound.png",
                                  "rate-compensated norms")
    print(f"(1+t)^(3/4) ||n(t)||  in [{payload['bracket_n'][0]:.6g}, "
          f"{payload['bracket_n'][1]:.6g}]")
    print(f"(1+t)^(5/4) ||psi(t)|| in [{payload['bracket_psi'][0]:.6g}, "
          f"{payload['bracket_psi'][1]:.6g}]")
    return 0


def cmd_compare_fourier(args, cfg, out_dir: Path) -> int:
    npar = normalize(cfg.physical)
    data = make_lowerbound_data(args.mu0, args.r0, args.R0)
    times = _parse_times(args.times)
    reqs = [(("n", "w", "phi"), 0, "full"), ("psi", 0, "full")]
    cat = evolve_series(data, npar, times, reqs)
    fou = evolve_series_fourier(data, npar, times, reqs)
    keys = [request_key(c, k, b) for c, k, b in reqs]
    rows = [[t] + [cat.columns[k][i] for k in keys] + [fou.columns[k][i] for k in keys]
            for i, t in enumerate(times)]
    header = ["time"] + [f"cattaneo_{k}" for k in keys] + [f"fourier_{k}" for k in keys]
    csv_path = out_dir / "compare_fourier.csv"
    _write_csv(csv_path, header, rows)

    def npar_for_tau(tau):
        return normalize(dataclasses.replace(cfg.physical, tau=tau))

    errs = relaxation_limit_errors(npar_for_tau, [1.0, 0.1, 0.01], r=1.0)
    payload = {"slopes": {}, "relaxation_limit_errors": {str(k): v for k, v in errs.items()},
               "config": cfg.resolved()}
    for key in keys:
        s_cat = fit_decay(times, cat.columns[key]).slope
        s_fou = fit_decay(times, fou.columns[key]).slope
        payload["slopes"][key] = {"cattaneo": s_cat, "fourier": s_fou,
                                  "difference": abs(s_cat - s_fou)}
    _write_json(out_dir / "compare_fourier.json", payload)
    if not args.no_plot:
        cols = {f"cattaneo {k}": cat.columns[k] for k in keys}
        cols.update({f"fourier {k}": fou.columns[k] for k in keys})
        plotting.plot_norm_series(times, cols, out_dir / "compare_fourier.png",
                                  "relaxing vs instantaneous conduction")
    print(f"wrote {csv_path}")
    return 0


def cmd_nonlinear(args, cfg, out_dir: Path) -> int:
    grid = PeriodicGrid(N=args.grid or cfg.grid.get("N", 16),
                        L=args.L or cfg.grid.get("L", 1.0))
    tmax = args.tmax or cfg.time.get("tmax", 10.0)
    dt = args.dt or cfg.time.get("dt")
    cfl = args.cfl or cfg.time.get("cfl")
    snapshot_times = ([float(x) for x in args.snapshot_times.split(",")]
                      if args.snapshot_times else [])
    writer = None
    if snapshot_times:
        def writer(state):
            path = out_dir / f"state_t{state.time:012.6f}.bin"
            write_snapshot(path, state)
            print(f"wrote {path}")

    report, _ = run(cfg.physical, grid, tmax=tmax, dt=dt, cfl=cfl,
                    kind=args.kind or cfg.data.get("kind", "random"),
                    amplitude=args.amplitude or cfg.data.get("amplitude", 1e-3),
                    seed=args.seed if args.seed is not None else cfg.data.get("seed", 0),
                    monitor_every=args.monitor_every or cfg.time.get("monitor_every", 1),
                    snapshot_times=snapshot_times, snapshot_writer=writer)
    arrays = report.as_arrays()
    header = list(arrays.keys())
    rows = [[arrays[k][i] for k in header] for i in range(arrays["time"].size)]
    csv_path = out_dir / "nonlinear_monitors.csv"
    _write_csv(csv_path, header, rows)
    _write_json(out_dir / "nonlinear_monitors.json", {
        "steps": report.steps_taken, "dt_min": report.dt_min, "dt_max": report.dt_max,
        "final_entropy": arrays["entropy"][-1], "config": cfg.resolved(),
    })
    if not args.no_plot:
        plotting.plot_monitors(arrays, out_dir / "nonlinear_monitors.png")
    print(f"wrote {csv_path}")
    return 0


def cmd_fit(args, cfg, out_dir: Path) -> int:
    table = np.genfromtxt(args.csv, delimiter=",", names=True)
    if args.column not in table.dtype.names:
        raise NsclabError(
            f"column {args.column!r} not in {list(table.dtype.names)}")
    window = (args.tmin, args.tmax) if args.tmin is not None else None
    fit = fit_decay(table["time"], table[args.column], window=window)
    payload = {"column": args.column, "slope": fit.slope, "stderr": fit.stderr,
               "intercept": fit.intercept, "window": list(fit.window),
               "n_points": fit.n_points, "config": cfg.resolved()}
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def cmd_accept(args, cfg, out_dir: Path) -> int:
    wanted = args.criteria.split(",") if args.criteria else None

    def progress(entry):
        status = "PASS" if entry["passed"] else "FAIL"
        print(f"[{status}] {entry['id']:>3} {entry['name']} "
              f"({entry['seconds']:.2f}s / budget {entry['runtime_budget_seconds']:.0f}s)")

    report = run_acceptance_suite(cfg, criteria=wanted, progress=progress)
    path = out_dir / "acceptance.json"
    _write_json(path, report)
    print(f"wrote {path}")
    return 0 if report["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsclab",
        description="Numerical laboratory for compressible flow with relaxing "
                    "(hyperbolic) heat conduction",
    )
    parser.add_argument("--config", help="experiment configuration file (INI sections)")
    parser.add_argument("--out-dir", default=".", help="directory for reports")
    parser.add_argument("--no-plot", action="store_true",
                        help="skip rendering PNG figures")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalue branches over a radial grid (CSV)")
    p.add_argument("--rmin", type=float, default=1e-3)
    p.add_argument("--rmax", type=float, default=1e3)
    p.add_argument("--num", type=int, default=400)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify-expansions",
                       help="empirical orders of the eigenvalue expansions (JSON)")
    p.add_argument("--band", choices=["low", "high", "both"], default="both")
    p.add_argument("--radii", help="comma-separated radii (defaults per band)")
    p.set_defaults(func=cmd_verify_expansions)

    p = sub.add_parser("green", help="one propagator matrix as JSON (Re/Im pairs)")
    p.add_argument("--xi", help="three comma-separated frequency components")
    p.add_argument("--r", type=float, help="radial frequency (along e1)")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--method", choices=["explicit", "expm", "lowfreq"], default="expm")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("linear-decay", help="norm time series and fitted slopes")
    p.add_argument("--data", choices=["lowerbound", "gaussian", "file"],
                   default="lowerbound")
    p.add_argument("--data-file", help="CSV with columns r,n0,w0,phi0,psi0")
    p.add_argument("--mu0", type=float, default=1.0)
    p.add_argument("--r0", type=float, default=0.1)
    p.add_argument("--R0", type=float, default=10.0)
    p.add_argument("--times", default="log:1e2:1e5:40")
    p.add_argument("--components", default="n,w,phi;psi",
                   help="semicolon-separated component groups")
    p.add_argument("--k", default="0", help="comma-separated derivative orders")
    p.add_argument("--band", choices=["full", "low", "high"], default="full")
    p.set_defaults(func=cmd_linear_decay)

    p = sub.add_parser("lower-bound", help="optimality suite: compensated brackets")
    p.add_argument("--mu0", type=float, default=1.0)
    p.add_argument("--r0", type=float, default=0.1)
    p.add_argument("--R0", type=float, default=10.0)
    p.add_argument("--times", default="log:1e2:1e5:40")
    p.set_defaults(func=cmd_lower_bound)

    p = sub.add_parser("compare-fourier",
                       help="paired decay runs for the two conduction laws")
    p.add_argument("--mu0", type=float, default=1.0)
    p.add_argument("--r0", type=float, default=0.1)
    p.add_argument("--R0", type=float, default=10.0)
    p.add_argument("--times", default="log:1e2:1e5:40")
    p.set_defaults(func=cmd_compare_fourier)

    p = sub.add_parser("nonlinear", help="periodic-box nonlinear run with monitors")
    p.add_argument("--grid", type=int, help="points per axis (power of two)")
    p.add_argument("--L", type=float, help="box half-period scale")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--tmax", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--cfl", type=float, help="fraction of the advective bound")
    p.add_argument("--monitor-every", type=int)
    p.add_argument("--kind", choices=["random", "single_mode"])
    p.add_argument("--snapshot-times", help="comma-separated times for binary snapshots")
    p.set_defaults(func=cmd_nonlinear)

    p = sub.add_parser("fit", help="power-law fit of a CSV column")
    p.add_argument("--csv", required=True)
    p.add_argument("--column", required=True)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("accept", help="run the acceptance suite (exit 0 iff all pass)")
    p.add_argument("--criteria", help="comma-separated criterion ids, e.g. C1,C3")
    p.set_defaults(func=cmd_accept)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return args.func(args, cfg, out_dir)
    except NsclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
