from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from kgconc.errors import ParameterDomainError
from kgconc.nonlinearity import (
    GAUSS_CONST,
    closed_form_gprime,
    equilibrium_residual,
    eval_g,
    holder_sup,
    linear_nonlinearity,
    logarithmic_nonlinearity,
    make_ground_state,
    nonlinearity_from_ground_state,
)


@pytest.fixture(scope="module")
def families():
    out = {}
    for kind, p in (("gaussian", None), ("power_law", 1.0), ("exponential", 0.5)):
        gs = make_ground_state(kind, p)
        out[kind] = (gs, nonlinearity_from_ground_state(gs))
    return out


def _lap_ratio_fd(f, r, h=1e-3):
    d1 = (f(r + h) - f(r - h)) / (2 * h)
    d2 = (f(r + h) - 2 * f(r) + f(r - h)) / h**2
    return (d2 + 2 * d1 / r) / f(r)


def test_gaussian_constant_is_pi_to_minus_three_quarters():
    gs = make_ground_state("gaussian")
    assert gs.psi(0.0) == pytest.approx(math.pi**-0.75, rel=1e-15)
    assert gs.psi(0.0) == pytest.approx(0.4237772081237562, rel=1e-14)


@pytest.mark.parametrize("kind,p", [("gaussian", None), ("power_law", 1.0), ("power_law", 2.5), ("exponential", 0.5)])
def test_ground_state_normalised_and_decreasing(kind, p):
    gs = make_ground_state(kind, p, nu=1.3)
    val, _ = integrate.quad(lambda r: float(gs.psi(r)) ** 2 * 4 * math.pi * r * r, 0, np.inf, epsrel=1e-12, limit=200)
    assert val == pytest.approx(1.3**2, rel=1e-9)
    r = np.linspace(1e-3, 30, 3000)
    assert np.all(gs.psi(r) > 0) and np.all(gs.dpsi(r) < 0)


def test_power_law_with_p_one_is_inverse_quadratic():
    gs = make_ground_state("power_law", 1.0)
    r = np.linspace(0, 5, 11)
    assert np.allclose(gs.psi(r) * (1 + r * r), gs.psi(0.0), rtol=1e-14)


@pytest.mark.parametrize("kind,p", [("power_law", 0.5), ("power_law", 0.75), ("exponential", 0.0), ("exponential", None)])
def test_invalid_exponents_raise(kind, p):
    with pytest.raises(ParameterDomainError):
        make_ground_state(kind, p)


@given(st.floats(0.0, 6.0))
def test_profile_derivatives_match_finite_differences(r):
    for kind, p in (("power_law", 1.2), ("exponential", 0.7), ("gaussian", None)):
        gs = make_ground_state(kind, p)
        r0 = r + 0.05
        ratio = float(gs.laplacian_ratio(r0))
        assert ratio == pytest.approx(_lap_ratio_fd(lambda x: float(gs.psi(x)), r0, 1e-4), rel=1e-5, abs=1e-6)


def test_derived_gaussian_matches_logarithmic_closed_form(families):
    gs, nl = families["gaussian"]
    s = np.geomspace(1e-8, gs.norm_const**2, 400)
    closed = -np.log(s / gs.norm_const**2) - 3.0
    assert np.max(np.abs(nl.g1prime(s) - closed)) < 1e-10
    assert float(nl.g1prime(gs.norm_const**2)) == pytest.approx(-3.0, abs=1e-12)


def test_exponential_example_against_radial_laplacian(families):
    gs, nl = families["exponential"]
    s = gs.norm_const**2 * math.exp(-4.0)
    # ln(c^2/s) = 4 -> 2 (1+r^2)^(1/2) = 4 -> r^2 = 3
    oracle = _lap_ratio_fd(lambda r: math.exp(-math.sqrt(1 + r * r)), math.sqrt(3.0), 1e-4)
    assert oracle == pytest.approx(-0.375, abs=1e-6)
    assert float(nl.g1prime(s)) == pytest.approx(-0.375, abs=1e-12)
    assert float(closed_form_gprime(gs, s)) == pytest.approx(-0.375, abs=1e-14)


@pytest.mark.parametrize("kind", ["power_law", "exponential"])
def test_inverted_gprime_matches_closed_form(families, kind):
    gs, nl = families[kind]
    s = np.geomspace(1e-12, 1.0, 200) * gs.psi2_origin
    assert np.max(np.abs(nl.g1prime(s) - closed_form_gprime(gs, s))) < 1e-9


def test_power_law_g_matches_exact_antiderivative(families):
    gs, nl = families["power_law"]
    c = gs.norm_const
    s = np.array([1e-6, 1e-3, 0.3, 1.0]) * c * c
    # p = 1: G' = 2 sqrt(s)/c - 8 s/c^2
    exact = (4.0 / 3.0) * s**1.5 / c - 4.0 * s * s / (c * c)
    assert np.allclose(nl.g1(s), exact, rtol=1e-9, atol=0.0)


def test_exponential_g_matches_quadrature_of_gprime(families):
    gs, nl = families["exponential"]
    s0 = gs.psi2_origin
    for x in (0.5 * s0, 1.5 * s0, 3.0 * s0):
        pts = [s0, 2 * s0] if x > s0 else None
        ref, _ = integrate.quad(lambda u: float(nl.g1prime(u)), 0, x, points=pts, epsrel=1e-12, limit=400)
        assert float(nl.g1(x)) == pytest.approx(ref, rel=1e-8)


def test_exponential_extension_is_c1_at_the_breakpoints(families):
    gs, nl = families["exponential"]
    s0 = gs.psi2_origin
    h = 1e-7 * s0
    for b in (s0, 2 * s0):
        left = (float(nl.g1prime(b)) - float(nl.g1prime(b - h))) / h
        right = (float(nl.g1prime(b + h)) - float(nl.g1prime(b))) / h
        assert abs(float(nl.g1prime(b + h)) - float(nl.g1prime(b - h))) < 1e-6
        assert left == pytest.approx(right, rel=1e-4, abs=1e-4)


def test_eval_g_examples(log_nl):
    c2 = GAUSS_CONST**2
    assert eval_g(log_nl, c2, 1.0).gprime == pytest.approx(-3.0, abs=1e-14)
    assert eval_g(log_nl, c2 / 8.0, 2.0).gprime == pytest.approx(-0.75, abs=1e-14)
    # -(1.5 ln pi + 2), frozen from an independent evaluation
    assert eval_g(log_nl, 1.0, 1.0).g == pytest.approx(-(1.5 * math.log(math.pi) + 2.0), rel=1e-15)
    assert eval_g(log_nl, 1.0, 1.0).g == pytest.approx(-3.717094828774, abs=1e-12)
    assert eval_g(log_nl, 0.0, 1.0).g == 0.0


@given(st.floats(1e-6, 10.0), st.floats(0.05, 5.0))
def test_scaling_law_is_exact(s, a):
    nl = logarithmic_nonlinearity()
    lhs = eval_g(nl, s, a)
    ref = eval_g(nl, a**3 * s, 1.0)
    assert lhs.gprime == a**-2 * ref.gprime
    assert lhs.g == a**-5 * ref.g


def test_eval_g_rejects_bad_arguments(log_nl):
    with pytest.raises(ParameterDomainError):
        eval_g(log_nl, 1.0, 0.0)
    with pytest.raises(ParameterDomainError):
        eval_g(log_nl, -1.0, 1.0)
    with pytest.raises(ParameterDomainError):
        logarithmic_nonlinearity(alpha=1.0)


def test_equilibrium_residuals(families, log_nl):
    r = np.linspace(0.01, 12.0, 4000)
    gs = families["gaussian"][0]
    assert equilibrium_residual(gs, log_nl, r) < 1e-10
    gp, nlp = families["power_law"]
    assert equilibrium_residual(gp, nlp, np.linspace(0.01, 20.0, 4000)) < 1e-8
    r_lin = np.linspace(0.01, 12.0, 4000)
    expected = float(np.max(np.abs((r_lin**2 - 3.0) * gs.psi(r_lin))))
    assert equilibrium_residual(gs, linear_nonlinearity(), r_lin) == pytest.approx(expected, rel=1e-12)
    assert expected > 1.0


def test_holder_suprema_are_finite_and_moderate(families, log_nl):
    for _, nl in families.values():
        g_sup, gp_sup = holder_sup(nl, n=300)
        assert math.isfinite(g_sup) and math.isfinite(gp_sup)
        assert g_sup < 100.0 and gp_sup < 100.0


def test_linear_mode_switches_g_off(lin_nl):
    s = np.array([0.0, 0.1, 1.0])
    assert np.all(lin_nl.g1prime(s) == 0.0) and np.all(lin_nl.g1(s) == 0.0)
