from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgconc.boost import BoostSpec, boosted_field, free_observables, gausson_profile, lab_grid
from kgconc.densities import PhysParams, densities, totals
from kgconc.errors import KinematicsError, ParameterDomainError


def _totals(spec, nl, ppa, half=5.0):
    fr = boosted_field(spec, lab_grid(spec, half, ppa, [-1e-3, 0.0, 1e-3]))
    return totals(densities(fr, nl, time_index=1))


def test_zero_velocity_reduces_to_the_rest_state():
    spec = BoostSpec((0.0, 0.0, 0.0), 1.0)
    g = lab_grid(spec, 3.0, 4, [0.0, 0.5])
    fr = boosted_field(spec, g)
    x, y, z = fr.mesh()
    rest = gausson_profile(np.sqrt(x * x + y * y + z * z))
    assert np.allclose(fr.psi[0], rest, rtol=0, atol=1e-15)
    assert np.allclose(fr.psi[1], np.exp(-0.5j) * rest, rtol=0, atol=1e-15)


def test_profile_is_contracted_along_the_velocity():
    spec = BoostSpec((0.6, 0.0, 0.0), 1.0)
    fr = boosted_field(spec, lab_grid(spec, 3.0, 8, [0.0]))
    c = fr.psi.shape[1] // 2
    ax = fr.axis(1)
    along = np.abs(fr.psi[0, :, c, c])
    across = np.abs(fr.psi[0, c, :, c])
    # |psi| at x equals |psi| at gamma x on the transverse axis
    i = np.searchsorted(ax, 1.0)
    assert along[i] == pytest.approx(float(np.interp(1.25 * ax[i], ax, across)), rel=1e-3)


def test_free_observables_examples():
    fo = free_observables(BoostSpec((0.6, 0.0, 0.0), 1.0), 0.0)
    assert (fo["energy"], fo["momentum"][0], fo["mass"], fo["rest_mass"]) == pytest.approx((1.25, 0.75, 1.25, 1.0))
    assert free_observables(BoostSpec((0.0, 0.0, 0.0), 1.0), 0.005)["energy"] == pytest.approx(1.005)
    with pytest.raises(ParameterDomainError):
        free_observables(BoostSpec((0.0, 0.0, 0.0), 1.0), -0.1)


@given(st.floats(0.0, 0.95), st.floats(0.0, 2.0), st.floats(0.5, 3.0))
def test_einstein_identity_is_exact(beta, theta, c):
    spec = BoostSpec((beta * c, 0.0, 0.0), 1.0, params=PhysParams(c=c))
    fo = free_observables(spec, theta)
    assert fo["einstein_defect"] == 0.0


def test_quadrature_totals_match_closed_forms(log_nl):
    spec = BoostSpec((0.6, 0.0, 0.0), 1.0)
    tot = _totals(spec, log_nl, 16)
    fo = free_observables(spec, 0.5)
    assert tot["energy"] == pytest.approx(fo["energy"], rel=1e-2)
    assert tot["charge"] == pytest.approx(1.0, abs=1e-6)
    assert tot["current"][0] == pytest.approx(0.6, rel=1e-2)
    assert tot["momentum"][0] == pytest.approx(fo["momentum"][0], rel=1e-2)


def test_current_converges_to_qv_under_refinement(log_nl):
    spec = BoostSpec((0.6, 0.0, 0.0), 1.0)
    ppas = (8, 12, 16)
    j = np.array([_totals(spec, log_nl, n)["current"][0] for n in ppas])
    err = np.abs(j - 0.6)
    assert err[0] > err[1] > err[2]
    # eliminate the h^2 and h^4 terms of the quadrature-plus-difference error
    h = 1.0 / np.array(ppas, dtype=float)
    limit = np.linalg.solve(np.column_stack([np.ones(3), h**2, h**4]), j)[0]
    assert limit == pytest.approx(0.6, abs=1e-6)


def _misalignment(p, v):
    return abs(p[0] * v[1] - p[1] * v[0]) / (np.linalg.norm(p) * np.linalg.norm(v))


def test_momentum_parallel_to_velocity(log_nl):
    v = np.array([0.3, 0.2, 0.0])
    spec = BoostSpec(tuple(v), 1.0)
    p8 = np.asarray(_totals(spec, log_nl, 8)["momentum"])
    p12 = np.asarray(_totals(spec, log_nl, 12)["momentum"])
    assert abs(p8[2]) < 1e-12 and abs(p12[2]) < 1e-12
    # the in-plane tilt is a grid-anisotropy error and shrinks like h^2
    assert 1.8 < _misalignment(p8, v) / _misalignment(p12, v) < 2.9
    extrapolated = (144 * p12 - 64 * p8) / 80
    assert _misalignment(extrapolated, v) < 1e-5


def test_invalid_specs():
    with pytest.raises(KinematicsError):
        BoostSpec((1.0, 0.0, 0.0), 1.0)
    with pytest.raises(ParameterDomainError):
        BoostSpec((0.1, 0.0, 0.0), 0.0)
    with pytest.raises(KinematicsError):
        BoostSpec((0.1, 0.0), 1.0)
