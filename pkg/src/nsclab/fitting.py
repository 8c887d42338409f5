"""Algebraic decay-exponent estimation by least squares on log(1+t) vs log(value)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveValue, WindowTooSmall


@dataclass
class DecayFit:
    """Fitted exponent of value ~ (1+t)^slope over [t_min, t_max]."""

    slope: float
    intercept: float
    stderr: float
    window: tuple
    n_points: int


def fit_decay(times, values, window=None) -> DecayFit:
    """Least-squares power-law fit on (log(1+t), log(value)).

    Requires at least 8 points inside the window spanning a factor >= 10 in
    time; all values in the window must be positive.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (float(times.min()), float(times.max()))
    t_min, t_max = float(window[0]), float(window[1])
    mask = (times >= t_min) & (times <= t_max)
    t_w = times[mask]
    v_w = values[mask]
    if t_w.size < 8:
        raise WindowTooSmall(f"only {t_w.size} points in window [{t_min}, {t_max}]; need >= 8")
    if t_w.max() < 10.0 * max(t_w.min(), 1e-300):
        raise WindowTooSmall(
            f"window spans [{t_w.min()}, {t_w.max()}]; need t_max >= 10 t_min")
    if np.any(v_w <= 0):
        raise NonPositiveValue("all values in the fit window must be positive")

    x = np.log1p(t_w)
    y = np.log(v_w)
    n = x.size
    x_mean = x.mean()
    sxx = np.sum((x - x_mean) ** 2)
    slope = float(np.sum((x - x_mean) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x_mean)
    resid = y - (intercept + slope * x)
    variance = float(np.sum(resid**2) / max(n - 2, 1))
    stderr = float(np.sqrt(variance / sxx))
    return DecayFit(slope=slope, intercept=intercept, stderr=stderr,
                    window=(t_min, t_max), n_points=n)
