from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from kgconc.odeint import StepSizeUnderflow, dopri5


def _oscillator(t, y):
    return np.stack([y[1], -y[0] - 0.1 * y[1] ** 3])


def test_matches_solve_ivp_on_nonlinear_oscillator():
    y0 = np.array([[1.0], [0.0]])
    res = dopri5(_oscillator, 0.0, y0, 10.0, rtol=1e-11, atol=1e-13)
    ref = solve_ivp(lambda t, y: _oscillator(t, y), (0.0, 10.0), y0[:, 0], method="DOP853", rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(res.y[:, 0] - ref.y[:, -1])) < 1e-9


def test_exact_exponential_backwards():
    res = dopri5(lambda t, y: -y, 2.0, np.ones((1, 1)), 0.0, rtol=1e-12, atol=1e-15)
    assert res.y[0, 0] == pytest.approx(math.exp(2.0), rel=1e-10)


@given(st.lists(st.floats(0.1, 3.0), min_size=2, max_size=6))
def test_batch_columns_are_independent(rates):
    k = np.array(rates)[None, :]
    res = dopri5(lambda t, y: -k * y, 0.0, np.ones((1, k.size)), 1.5, rtol=1e-11, atol=1e-14)
    assert np.allclose(res.y[0], np.exp(-1.5 * k[0]), rtol=1e-9, atol=0.0)


def test_event_located_to_tolerance():
    # y' = 1, stop where y = 0.7
    res = dopri5(lambda t, y: np.ones_like(y), 0.0, np.zeros((1, 1)), 5.0, event=lambda t, y: y[0, 0] - 0.7, event_tol=1e-13)
    assert res.event_t == pytest.approx(0.7, abs=1e-12)
    assert abs(res.y[0, 0] - 0.7) <= 1e-13


def test_record_keeps_the_step_history():
    res = dopri5(lambda t, y: -y, 0.0, np.ones((1, 1)), 1.0, record=True)
    assert res.ts[0] == 0.0 and res.ts[-1] == 1.0
    assert np.all(np.diff(res.ts) > 0.0)
    assert len(res.ys) == len(res.ts) == len(res.fs)


def test_zero_span_is_a_no_op():
    res = dopri5(lambda t, y: y, 1.0, np.ones((1, 1)), 1.0)
    assert res.n_steps == 0 and res.y[0, 0] == 1.0


def test_step_budget_exhaustion_raises():
    with pytest.raises(StepSizeUnderflow):
        dopri5(lambda t, y: np.stack([y[1], -1e6 * y[0]]), 0.0, np.array([[1.0], [0.0]]), 10.0, max_steps=50)
