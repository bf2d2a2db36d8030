from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgconc.errors import ConfigError, KinematicsError
from kgconc.trajectory import ConstantBeta, PolynomialBeta, TanhBeta, check_admissible, make_trajectory


def _fd(f, t, h=1e-4):
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)


@given(st.floats(-3.0, 3.0))
def test_tanh_derivatives_match_finite_differences(t):
    tr = TanhBeta(0.4, 0.1, k=1.3)
    assert float(tr.dbeta(t)) == pytest.approx(float(_fd(tr.beta, t)), abs=1e-10)
    assert float(tr.d2beta(t)) == pytest.approx(float(_fd(tr.dbeta, t)), abs=1e-9)
    assert float(tr.d3beta(t)) == pytest.approx(float(_fd(tr.d2beta, t)), abs=1e-9)
    assert float(tr.velocity(t)) == pytest.approx(float(_fd(tr.position, t)), abs=1e-10)


@given(st.floats(-2.0, 2.0))
def test_sigma_and_gamma_beta_derivatives(t):
    tr = TanhBeta(0.4, 0.1)
    assert float(tr.sigma(t)) == pytest.approx(-0.5 * np.log(float(tr.gamma(t))), rel=1e-14)
    assert float(tr.dsigma(t)) == pytest.approx(float(_fd(tr.sigma, t)), abs=1e-10)
    assert float(tr.d2sigma(t)) == pytest.approx(float(_fd(tr.dsigma, t)), abs=1e-9)
    gb = lambda x: tr.gamma(x) * tr.beta(x)  # noqa: E731
    assert float(tr.d_gamma_beta(t)) == pytest.approx(float(_fd(gb, t)), abs=1e-10)
    assert float(tr.d2_gamma_beta(t)) == pytest.approx(float(_fd(tr.d_gamma_beta, t)), abs=1e-9)


def test_polynomial_position_integrates_beta():
    tr = PolynomialBeta((0.3, 0.05, -0.01))
    t = np.linspace(-1, 1, 7)
    assert np.allclose(tr.velocity(t), _fd(tr.position, t), atol=1e-10)
    assert float(tr.position(0.0)) == 0.0


def test_admissibility_bounds_for_tanh():
    adm = check_admissible(TanhBeta(0.4, 0.1), (-2.0, 2.0))
    assert adm.eps1 == pytest.approx(0.4 + 0.1 * np.tanh(2.0))
    assert adm.beta_check == pytest.approx(0.4 - 0.1 * np.tanh(2.0))
    assert adm.b_min == pytest.approx(1 / adm.eps1 - adm.eps1)
    assert adm.b_max == pytest.approx(1 / adm.beta_check - adm.beta_check)


@pytest.mark.parametrize(
    "traj",
    [ConstantBeta(1.0), ConstantBeta(0.0), PolynomialBeta((0.0, 0.5))],
)
def test_inadmissible_trajectories_raise(traj):
    with pytest.raises(KinematicsError):
        check_admissible(traj, (-1.0, 1.0))


def test_make_trajectory_dispatch_and_errors():
    assert make_trajectory("constant", {"beta0": 0.3}) == ConstantBeta(0.3)
    assert make_trajectory("polynomial", {"coeffs": "0.3, 0.01"}) == PolynomialBeta((0.3, 0.01))
    with pytest.raises(ConfigError):
        make_trajectory("tanh", {"beta0": 0.3})
    with pytest.raises(ConfigError):
        make_trajectory("spiral", {})
