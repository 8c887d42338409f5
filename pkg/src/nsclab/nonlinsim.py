"""Periodic-box pseudo-spectral solver for the full scaled nonlinear system.

The box [0, 2 pi L)^3 replaces whole space, so no algebraic decay rates are
expected here; this solver exercises the nonlinear terms and monitors the
conservation / entropy structure at desk scale.  Time stepping is Strang
splitting: a half step of the exact per-mode linear flow exp(-B(k) dt/2), a
full explicit-midpoint step of the dealiased nonlinearity, and another half
linear step.  The stiff relaxation 1/tau and the viscosity are handled exactly
by the linear flow, leaving only an advective CFL restriction.

Quadratic products are dealiased by the 2/3 rule; the rational factors
n/(1+n) are evaluated pointwise in physical space (no series truncation),
accepting the standard pseudo-spectral aliasing of smooth rational terms,
which the resolution-study tests quantify.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AmplitudeTooLarge, CFLViolation, NegativeTemperature, VacuumBreach
from .params import NormalizedParams, PhysicalParams, normalize
from .propagators import real_generator
import scipy.linalg

_FIELD_NAMES = ("n", "w1", "w2", "w3", "phi", "psi1", "psi2", "psi3")


@dataclass
class PeriodicGrid:
    """Cubic grid with 2/3-rule dealiasing; domain [0, 2 pi L)^3."""

    N: int
    L: float = 1.0

    def __post_init__(self):
        N = self.N
        if N < 8 or (N & (N - 1)) != 0:
            raise ValueError("N must be a power of two, at least 8")
        m1 = np.fft.fftfreq(N, d=1.0 / N)          # integer frequencies
        m3 = np.arange(N // 2 + 1, dtype=float)
        self.m = np.array(np.meshgrid(m1, m1, m3, indexing="ij"))
        self.k = self.m / self.L                    # physical wavenumbers
        self.k_sq = np.sum(self.k**2, axis=0)
        kmag = np.sqrt(self.k_sq)
        with np.errstate(invalid="ignore", divide="ignore"):
            self.khat = np.where(kmag > 0, self.k / np.where(kmag > 0, kmag, 1.0), 0.0)
        cut = N / 3.0
        self.dealias = np.all(np.abs(self.m) <= cut, axis=0)
        # group modes by |m|^2 for shared per-radius propagators
        msq = np.rint(np.sum(self.m**2, axis=0)).astype(np.int64)
        self.unique_msq, self.group = np.unique(msq, return_inverse=True)
        self.group = self.group.reshape(msq.shape)
        self.dx = 2.0 * np.pi * self.L / N
        self.volume = (2.0 * np.pi * self.L) ** 3
        # rfft stores half the spectrum: double-count weights for Parseval
        w = np.full(N // 2 + 1, 2.0)
        w[0] = 1.0
        if N % 2 == 0:
            w[-1] = 1.0
        self.parseval_weight = np.broadcast_to(w, (N, N, N // 2 + 1))

    def to_physical(self, f_hat):
        return np.fft.irfftn(f_hat, s=(self.N, self.N, self.N), axes=(-3, -2, -1))

    def to_spectral(self, f):
        return np.fft.rfftn(f, axes=(-3, -2, -1))

    def l2_norm_sq(self, f_hat, weight=None):
        """Volume integral of |f|^2 from the spectrum (Parseval)."""
        mag = np.abs(f_hat) ** 2 * self.parseval_weight
        if weight is not None:
            mag = mag * weight
        return self.volume * float(mag.sum()) / self.N**6


@dataclass
class StateField:
    """Spectral coefficients of (n, w, phi, psi) plus the current time."""

    grid: PeriodicGrid
    coeffs: np.ndarray          # (8, N, N, N//2+1) complex
    time: float = 0.0

    def copy(self) -> "StateField":
        return StateField(grid=self.grid, coeffs=self.coeffs.copy(), time=self.time)

    def physical(self) -> np.ndarray:
        return self.grid.to_physical(self.coeffs)


def init_state(grid: PeriodicGrid, npar: NormalizedParams, kind: str = "random",
               amplitude: float = 1e-3, seed: int = 0, band: int = 2) -> StateField:
    """Band-limited random or single-mode initial data, Hermitian by construction.

    Each field is scaled so its max absolute physical value equals `amplitude`;
    raises AmplitudeTooLarge when the positivity margin 1 + n > 0.5 (and its
    temperature analogue) would be violated.
    """
    N = grid.N
    coeffs = np.zeros((8, N, N, N // 2 + 1), dtype=complex)
    if kind == "random":
        rng = np.random.default_rng(seed)
        mask = np.all(np.abs(grid.m) <= band, axis=0)
        for i in range(8):
            f = rng.standard_normal((N, N, N))
            f_hat = grid.to_spectral(f) * mask
            f_hat[0, 0, 0] = 0.0
            f = grid.to_physical(f_hat)
            peak = np.abs(f).max()
            if peak > 0:
                coeffs[i] = grid.to_spectral(f * (amplitude / peak))
    elif kind == "single_mode":
        x = np.arange(N) * grid.dx
        n = amplitude * np.cos(x / grid.L)[:, None, None] * np.ones((1, N, N))
        coeffs[0] = grid.to_spectral(n)
    else:
        raise ValueError(f"unknown init kind {kind!r}")
    state = StateField(grid=grid, coeffs=coeffs, time=0.0)
    n_phys = grid.to_physical(coeffs[0])
    gm1 = (npar.sigma / npar.c) ** 2
    phi_phys = grid.to_physical(coeffs[4])
    if (1.0 + n_phys).min() <= 0.5 or (1.0 + np.sqrt(gm1) * phi_phys).min() <= 0.5:
        raise AmplitudeTooLarge(
            f"amplitude {amplitude} violates the positivity margin 1 + n > 1/2")
    return state


def _gradient(grid, f_hat):
    return 1j * grid.k * f_hat[None, ...]


def rhs_nonlinear(state: StateField, npar: NormalizedParams) -> np.ndarray:
    """Spectral tendencies (f1, f2, f3, 0), products formed on the dealiased grid."""
    grid = state.grid
    c, sigma, nu, eta, b = npar.c, npar.sigma, npar.nu, npar.eta, npar.b
    gm1 = (sigma / c) ** 2                      # gamma - 1
    Uh = state.coeffs * grid.dealias

    n = grid.to_physical(Uh[0])
    w = grid.to_physical(Uh[1:4])
    phi = grid.to_physical(Uh[4])
    psi = grid.to_physical(Uh[5:8])
    one_plus_n = 1.0 + n
    if one_plus_n.min() <= 0.0:
        raise VacuumBreach(f"1 + n reached {one_plus_n.min():.3e} during a RHS evaluation")

    grad_n = grid.to_physical(_gradient(grid, Uh[0]))
    grad_phi = grid.to_physical(_gradient(grid, Uh[4]))
    dw = np.empty((3, 3) + n.shape)             # dw[i, j] = d_i w_j
    for j in range(3):
        dw[:, j] = grid.to_physical(_gradient(grid, Uh[1 + j]))
    div_w = dw[0, 0] + dw[1, 1] + dw[2, 2]
    div_psi_hat = 1j * (grid.k[0] * Uh[5] + grid.k[1] * Uh[6] + grid.k[2] * Uh[7])
    div_psi = grid.to_physical(div_psi_hat)
    lap_w = grid.to_physical(-grid.k_sq[None, ...] * Uh[1:4])
    div_w_hat = 1j * (grid.k[0] * Uh[1] + grid.k[1] * Uh[2] + grid.k[2] * Uh[3])
    grad_div_w = grid.to_physical(_gradient(grid, div_w_hat))

    # f1 = -c div(n w), kept in divergence form for exact mass conservation
    nw_hat = grid.to_spectral(n[None, ...] * w)
    f1_hat = -c * 1j * (grid.k[0] * nw_hat[0] + grid.k[1] * nw_hat[1]
                        + grid.k[2] * nw_hat[2])

    # f2 = -c w.grad w + (c n - sigma phi) grad n/(1+n)
    #      - (nu n lap w + (nu+eta) n grad div w)/(1+n)
    advect = np.einsum("i...,ij...->j...", w, dw)
    ratio = n / one_plus_n
    f2 = (-c * advect
          + ((c * n - sigma * phi) / one_plus_n)[None, ...] * grad_n
          - nu * ratio[None, ...] * lap_w
          - (nu + eta) * ratio[None, ...] * grad_div_w)

    # f3 = -c w.grad phi - c (gamma-1) phi div w
    #      + sigma (2 nu |Dw|^2 + eta (div w)^2)/(c (1+n)) + b n div psi/(1+n)
    deform_sq = 0.25 * np.sum((dw + dw.transpose(1, 0, 2, 3, 4)) ** 2, axis=(0, 1))
    f3 = (-c * np.einsum("i...,i...->...", w, grad_phi)
          - c * gm1 * phi * div_w
          + sigma * (2.0 * nu * deform_sq + eta * div_w**2) / (c * one_plus_n)
          + b * ratio * div_psi)

    out = np.zeros_like(state.coeffs)
    out[0] = f1_hat
    out[1:4] = grid.to_spectral(f2)
    out[4] = grid.to_spectral(f3)
    return out * grid.dealias


class LinearPropagator:
    """Exact per-mode linear flow exp(-B(k) dt) on the spectral state."""

    def __init__(self, grid: PeriodicGrid, npar: NormalizedParams, dt: float):
        self.grid = grid
        self.npar = npar
        self.dt = dt
        radii = np.sqrt(grid.unique_msq.astype(float)) / grid.L
        self.tables = np.empty((radii.size, 4, 4))
        for i, r in enumerate(radii):
            self.tables[i] = scipy.linalg.expm(real_generator(float(r), npar) * dt)
        self.M = self.tables[grid.group]                   # (N,N,Nz,4,4)
        self.e_visc = np.exp(-npar.nu * grid.k_sq * dt)
        self.e_relax = float(np.exp(-dt / npar.tau))

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        grid = self.grid
        kh = grid.khat
        w = coeffs[1:4]
        psi = coeffs[5:8]
        w_l = np.einsum("i...,i...->...", kh, w)
        psi_l = np.einsum("i...,i...->...", kh, psi)
        v = np.stack([coeffs[0], -1j * w_l, coeffs[4], -1j * psi_l])
        v_new = np.einsum("...ij,j...->i...", self.M, v)
        out = np.empty_like(coeffs)
        out[0] = v_new[0]
        out[4] = v_new[2]
        w_l_new = 1j * v_new[1]
        psi_l_new = 1j * v_new[3]
        out[1:4] = (w - kh * w_l) * self.e_visc + kh * w_l_new
        out[5:8] = (psi - kh * psi_l) * self.e_relax + kh * psi_l_new
        return out


def cfl_bound(state: StateField, npar: NormalizedParams) -> float:
    """Advective step bound 0.5 dx / max|c w| (inf when the velocity vanishes)."""
    w = state.grid.to_physical(state.coeffs[1:4])
    speed = npar.c * np.sqrt(np.sum(w**2, axis=0)).max()
    return np.inf if speed == 0.0 else 0.5 * state.grid.dx / speed


def step(state: StateField, npar: NormalizedParams, dt: float,
         half_propagator: Optional[LinearPropagator] = None) -> StateField:
    """One Strang step: exact linear half step, explicit midpoint on the
    nonlinearity, exact linear half step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    bound = cfl_bound(state, npar)
    if dt > bound:
        raise CFLViolation(f"dt = {dt} exceeds the advective bound {bound:.3e}")
    if half_propagator is None or half_propagator.dt != 0.5 * dt:
        half_propagator = LinearPropagator(state.grid, npar, 0.5 * dt)
    c1 = half_propagator.apply(state.coeffs)
    mid = StateField(grid=state.grid, coeffs=c1, time=state.time)
    k1 = rhs_nonlinear(mid, npar)
    mid2 = StateField(grid=state.grid, coeffs=c1 + 0.5 * dt * k1, time=state.time)
    k2 = rhs_nonlinear(mid2, npar)
    c2 = c1 + dt * k2
    c3 = half_propagator.apply(c2)
    return StateField(grid=state.grid, coeffs=c3, time=state.time + dt)


@dataclass
class MonitorReport:
    """Aligned time series of the conservation/entropy monitors."""

    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy_identity: list = field(default_factory=list)
    entropy: list = field(default_factory=list)
    hs_norm: list = field(default_factory=list)
    min_density_factor: list = field(default_factory=list)
    min_temperature_factor: list = field(default_factory=list)
    steps_taken: int = 0
    dt_min: float = np.inf
    dt_max: float = 0.0

    def as_arrays(self) -> dict:
        return {
            "time": np.array(self.times),
            "mass": np.array(self.mass),
            "energy_identity": np.array(self.energy_identity),
            "entropy": np.array(self.entropy),
            "hs_norm": np.array(self.hs_norm),
            "min_density_factor": np.array(self.min_density_factor),
            "min_temperature_factor": np.array(self.min_temperature_factor),
        }


def monitors(state: StateField, p: PhysicalParams,
             npar: Optional[NormalizedParams] = None, sobolev_index: int = 3) -> dict:
    """Monitor row: mass, conserved energy combination, relative entropy, H^s norm.

    All integrals are grid means times the box volume; the dealiased fields are
    band-limited, so the polynomial integrands are integrated exactly, while
    the logarithmic terms inherit spectral accuracy.
    """
    npar = npar or normalize(p)
    grid = state.grid
    n = grid.to_physical(state.coeffs[0])
    w = grid.to_physical(state.coeffs[1:4])
    phi = grid.to_physical(state.coeffs[4])
    psi = grid.to_physical(state.coeffs[5:8])

    gm1 = p.gamma - 1.0
    rho = p.rho_star * (1.0 + n)
    u = npar.c * w
    theta = p.theta_star * (1.0 + np.sqrt(gm1) * phi)
    q = npar.a * psi
    if rho.min() <= 0:
        raise VacuumBreach("density non-positive in monitor evaluation")
    if theta.min() <= 0:
        raise NegativeTemperature("temperature non-positive in monitor evaluation")

    V = grid.volume
    mean = lambda f: float(f.mean())
    u_sq = np.sum(u**2, axis=0)
    q_sq = np.sum(q**2, axis=0)
    mass = V * mean(n)
    energy = V * mean(0.5 * rho * u_sq + p.R / gm1 * rho * (theta - p.theta_star))
    entropy = V * mean(
        p.R * p.theta_star * (rho * np.log(rho / p.rho_star) - rho + p.rho_star)
        + 0.5 * rho * u_sq
        + p.R / gm1 * rho * (theta - p.theta_star - p.theta_star * np.log(theta / p.theta_star))
        + p.tau * p.theta_star / (2.0 * p.kappa * theta**2) * q_sq
    )
    sob_weight = sum(grid.k_sq**j for j in range(sobolev_index + 1))
    hs_sq = sum(grid.l2_norm_sq(state.coeffs[i], weight=sob_weight) for i in range(8))
    return {
        "time": state.time,
        "mass": mass,
        "energy_identity": energy,
        "entropy": entropy,
        "hs_norm": float(np.sqrt(hs_sq)),
        "min_density_factor": float((1.0 + n).min()),
        "min_temperature_factor": float((1.0 + np.sqrt(gm1) * phi).min()),
    }


def run(p: PhysicalParams, grid: PeriodicGrid, tmax: float, dt: Optional[float] = None,
        cfl: Optional[float] = None, kind: str = "random", amplitude: float = 1e-3,
        seed: int = 0, monitor_every: int = 1, guard_floor: float = 0.25,
        snapshot_times=(), snapshot_writer=None,
        state0: Optional[StateField] = None):
    """Fixed-step or CFL-adaptive loop with monitor cadence.

    Returns (MonitorReport, final state).  Aborts (never clips) when the
    density or temperature factor reaches `guard_floor`; the partial report is
    attached to the raised error.
    """
    npar = normalize(p)
    state = state0.copy() if state0 is not None else init_state(
        grid, npar, kind=kind, amplitude=amplitude, seed=seed)
    report = MonitorReport()
    row = monitors(state, p, npar)
    _append(report, row)
    snapshot_times = sorted(snapshot_times)
    if dt is None and cfl is None:
        dt = 0.05
    half_prop = LinearPropagator(grid, npar, 0.5 * dt) if dt is not None else None

    steps = 0
    while state.time < tmax - 1e-12:
        if dt is not None:
            dt_step = min(dt, tmax - state.time)
        else:
            dt_step = min(cfl * cfl_bound(state, npar), tmax - state.time)
        if half_prop is None or half_prop.dt != 0.5 * dt_step:
            half_prop = LinearPropagator(grid, npar, 0.5 * dt_step)
        try:
            state = step(state, npar, dt_step, half_prop)
        except (VacuumBreach, NegativeTemperature) as exc:
            exc.partial_report = report
            raise
        steps += 1
        report.steps_taken = steps
        report.dt_min = min(report.dt_min, dt_step)
        report.dt_max = max(report.dt_max, dt_step)
        row = monitors(state, p, npar)
        if (row["min_density_factor"] <= guard_floor
                or row["min_temperature_factor"] <= guard_floor):
            err = VacuumBreach(
                f"positivity guard tripped at t = {state.time:.4f}: "
                f"density factor {row['min_density_factor']:.3f}, "
                f"temperature factor {row['min_temperature_factor']:.3f}")
            err.partial_report = report
            raise err
        if steps % monitor_every == 0:
            _append(report, row)
        while snapshot_times and state.time >= snapshot_times[0] - 1e-12:
            snapshot_times.pop(0)
            if snapshot_writer is not None:
                snapshot_writer(state)
    if report.times[-1] != state.time:
        _append(report, monitors(state, p, npar))
    return report, state


def _append(report: MonitorReport, row: dict):
    report.times.append(row["time"])
    report.mass.append(row["mass"])
    report.energy_identity.append(row["energy_identity"])
    report.entropy.append(row["entropy"])
    report.hs_norm.append(row["hs_norm"])
    report.min_density_factor.append(row["min_density_factor"])
    report.min_temperature_factor.append(row["min_temperature_factor"])


# --- binary snapshots --------------------------------------------------------

_SNAPSHOT_MAGIC = b"NSCSNAP1"


def write_snapshot(path, state: StateField):
    """Binary layout: magic, u32 N, f64 L, f64 time, then 8 contiguous
    coefficient blocks (complex128, Re/Im interleaved, little-endian)."""
    with open(path, "wb") as fh:
        fh.write(_SNAPSHOT_MAGIC)
        fh.write(struct.pack("<Idd", state.grid.N, state.grid.L, state.time))
        for i in range(8):
            fh.write(np.ascontiguousarray(state.coeffs[i]).astype("<c16").tobytes())


def read_snapshot(path) -> StateField:
    with open(path, "rb") as fh:
        magic = fh.read(len(_SNAPSHOT_MAGIC))
        if magic != _SNAPSHOT_MAGIC:
            raise ValueError(f"not a snapshot file: bad magic {magic!r}")
        N, L, time = struct.unpack("<Idd", fh.read(4 + 16))
        grid = PeriodicGrid(N=N, L=L)
        shape = (N, N, N // 2 + 1)
        count = int(np.prod(shape))
        coeffs = np.empty((8,) + shape, dtype=complex)
        for i in range(8):
            block = np.frombuffer(fh.read(count * 16), dtype="<c16")
            coeffs[i] = block.reshape(shape)
    return StateField(grid=grid, coeffs=coeffs, time=time)
