import numpy as np
import pytest
from scipy.integrate import solve_ivp

from nlhelm.ode import IntegrationError, dormand_prince


def test_exponential_decay():
    xs, ys, stats = dormand_prince(lambda x, y: -y, 0.0, 3.0, [1.0], rtol=1e-10, atol=1e-12)
    assert xs[0] == 0.0 and xs[-1] == 3.0
    np.testing.assert_allclose(ys[:, 0], np.exp(-xs), rtol=1e-8)
    assert stats["accepted_steps"] == len(xs) - 1


def test_harmonic_oscillator_against_scipy():
    f = lambda x, y: np.array([y[1], -y[0]])
    xs, ys, _ = dormand_prince(f, 0.0, 10.0, [0.0, 1.0], rtol=1e-9, atol=1e-12)
    ref = solve_ivp(f, (0, 10), [0.0, 1.0], method="DOP853", t_eval=xs, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(ys, ref.y.T, atol=1e-7)


def test_final_point_exact_and_max_step():
    xs, _, stats = dormand_prince(lambda x, y: np.zeros_like(y), 1.0, 2.0, [1.0], max_step=0.01)
    assert xs[-1] == 2.0
    assert np.diff(xs).max() <= 0.01 + 1e-15
    assert stats["max_step"] <= 0.01 + 1e-15


def test_rejects_and_recovers_on_stiff_start():
    f = lambda x, y: -200.0 * (y - np.cos(x))
    xs, ys, stats = dormand_prince(f, 0.0, 1.0, [0.0], rtol=1e-6, atol=1e-9)
    assert stats["rejected_steps"] > 0
    assert abs(ys[-1, 0] - np.cos(1.0)) < 1e-2


def test_blowup_aborts_with_diagnostics():
    with pytest.raises(IntegrationError) as info:
        dormand_prince(lambda x, y: y * y, 0.0, 2.0, [1.0])
    assert info.value.diagnostics


def test_nan_aborts():
    with pytest.raises(IntegrationError):
        dormand_prince(lambda x, y: np.full_like(y, np.nan), 0.0, 1.0, [1.0])


def test_bad_arguments():
    with pytest.raises(ValueError):
        dormand_prince(lambda x, y: y, 1.0, 1.0, [1.0])
    with pytest.raises(ValueError):
        dormand_prince(lambda x, y: y, 0.0, 1.0, [1.0], rtol=0)
