import numpy as np
import pytest

from nsclab.errors import NonPositiveValue, WindowTooSmall
from nsclab.fitting import fit_decay


def test_exact_power_law():
    t = np.geomspace(1.0, 1e4, 30)
    y = (1 + t) ** (-0.75)
    fit = fit_decay(t, y)
    assert fit.slope == pytest.approx(-0.75, abs=1e-12)
    assert fit.stderr < 1e-12


def test_perturbed_power_law():
    t = np.geomspace(10.0, 1e5, 60)
    y = (1 + t) ** (-1.25) * (1 + 0.01 * np.sin(np.log(t)))
    fit = fit_decay(t, y)
    assert fit.slope == pytest.approx(-1.25, abs=0.01)


def test_constant_series():
    t = np.geomspace(1.0, 100.0, 20)
    fit = fit_decay(t, np.full_like(t, 3.7))
    assert fit.slope == pytest.approx(0.0, abs=1e-13)
    assert fit.intercept == pytest.approx(np.log(3.7), abs=1e-12)


def test_window_selection():
    t = np.geomspace(1.0, 1e4, 50)
    y = (1 + t) ** (-2.0)
    fit = fit_decay(t, y, window=(10.0, 1e3))
    assert fit.window == (10.0, 1e3)
    assert fit.n_points == np.count_nonzero((t >= 10) & (t <= 1e3))
    assert fit.slope == pytest.approx(-2.0, abs=1e-6)


def test_nonpositive_values_rejected():
    t = np.geomspace(1.0, 100.0, 20)
    y = np.ones_like(t)
    y[5] = 0.0
    with pytest.raises(NonPositiveValue):
        fit_decay(t, y)


def test_window_too_small():
    t = np.geomspace(1.0, 100.0, 20)
    y = (1 + t) ** (-1.0)
    with pytest.raises(WindowTooSmall):
        fit_decay(t, y, window=(50.0, 60.0))
    with pytest.raises(WindowTooSmall):
        fit_decay(t[:5], y[:5])
