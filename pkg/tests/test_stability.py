from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcrd.equilibria import critical_mass
from mcrd.stability import (LinearizationData, M_star, char_poly_B, char_poly_of_matrix,
                            cubic_roots, dispersion_scan, eig_A, eig_B,
                            instability_extent, jacobian_at_equilibrium, mode_matrix_B,
                            r_at_critical, r_of_M, subsystem_classification)

TURING = dict(kappa=2.5, tau=0.8, d=0.01, eps=0.001, M=22.0)


def _coeff_errors(sigma, lin):
    """Relative coefficient mismatch, each on the scale of its own cofactor terms."""
    B = mode_matrix_B(sigma, lin)
    mine = np.array(char_poly_B(sigma, lin))
    ref = np.array(char_poly_of_matrix(B))
    nb = np.abs(B).max()
    scale = np.maximum(np.maximum(np.abs(mine), np.abs(ref)), [nb, nb**2, nb**3])
    return np.abs(mine - ref) / scale


def test_jacobian_zero_state():
    J = jacobian_at_equilibrium("zero", 10.0, 2.0, 0.7)
    assert np.array_equal(J, np.array([[-1.0, 0, 0], [1.0, 0, 0], [0.7, 0, -0.7]]))


def test_jacobian_plus_unit_entry():
    J = jacobian_at_equilibrium("plus", 22.0, 2.5, 0.8)
    assert J[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(J[0] + J[1], 0.0)


def test_A_spectrum():
    assert list(eig_A(0.0, 0.01, 0.001, 0.8)) == [0.0, -0.8, -1.0]
    for s in (1e-6, 0.1, 1.0, 50.0):
        assert np.all(eig_A(s, 0.01, 0.001, 0.8) < 0)


def test_sigma_zero_factorisation():
    lin = LinearizationData.at(**TURING)
    c2, c1, c0 = char_poly_B(0.0, lin)
    assert c0 == 0.0
    assert c2 == pytest.approx(lin.alpha0 - 1 + lin.tau, rel=1e-15)
    assert c1 == pytest.approx(lin.tau * (lin.alpha0 - 1 + lin.beta0), rel=1e-14)
    assert -1 + lin.beta0 == pytest.approx(-1 / (1 + lin.u), rel=1e-14)
    lam = eig_B(0.0, lin)
    assert abs(lam[0]) < 1e-14
    assert np.all(lam[1:].real < 0)


@pytest.mark.parametrize("tau", [0.3, 0.8, 1.5])
def test_coefficients_against_determinant(tau):
    for M in np.linspace(11.3, 60.0, 6):
        lin = LinearizationData.at(M, 2.5, tau, 0.01, 0.001)
        for s in np.linspace(0.0, 30.0, 7):
            assert np.all(_coeff_errors(s, lin) < 1e-12)


@settings(max_examples=60, deadline=None)
@given(c=st.tuples(*[st.floats(-50, 50)] * 3))
def test_cubic_roots_vieta_and_residual(c):
    c2, c1, c0 = c
    r = cubic_roots(c2, c1, c0)
    scale = 1 + max(abs(c2), abs(c1), abs(c0))
    assert abs(-r.sum() - c2) < 1e-9 * scale
    assert abs((r[0] * r[1] + r[0] * r[2] + r[1] * r[2]) - c1) < 1e-9 * scale**2
    assert abs(-r.prod() - c0) < 1e-9 * scale**3
    ref = np.sort_complex(np.roots([1.0, c2, c1, c0]))
    assert np.allclose(np.sort_complex(r), ref, atol=1e-6 * scale)


def test_cubic_near_double_root():
    # (x - 1)^2 (x + 2): discriminant zero
    r = cubic_roots(0.0, -3.0, 2.0)
    assert np.allclose(np.sort(r.real), [-2.0, 1.0, 1.0], atol=1e-7)
    r = cubic_roots(-3.0, 3.0, -1.0)  # triple root at 1
    assert np.allclose(r, 1.0, atol=1e-4)


def test_cubic_complex_pair():
    # (x + 1)(x^2 + 4)
    r = cubic_roots(1.0, 4.0, 4.0)
    assert np.allclose(r, [2j, -2j, -1.0], atol=1e-13)


def test_r_at_critical_matches_closed_form():
    for kappa, tau in ((2.5, 0.8), (20 / 3, 0.3)):
        direct = r_of_M(critical_mass(kappa), kappa, tau)
        assert abs(direct - r_at_critical(kappa, tau)) < 1e-14
    assert r_at_critical(2.5, 0.8) == pytest.approx(0.8 - 2.5 / 3.5, rel=1e-15)
    assert r_at_critical(20 / 3, 0.3) == pytest.approx(0.3 - 2 / 2.3, rel=1e-14)


def test_M_star():
    assert M_star(2.5, 0.8) is None
    Ms = M_star(20 / 3, 0.3)
    assert Ms > critical_mass(20 / 3)
    assert abs(r_of_M(Ms, 20 / 3, 0.3)) < 1e-10


def test_r_increasing():
    Ms = np.linspace(critical_mass(2.5) + 1e-6, 200.0, 50)
    r = [r_of_M(M, 2.5, 0.3) for M in Ms]
    assert np.all(np.diff(r) > 0)


def test_subsystem_classification():
    assert subsystem_classification(LinearizationData.at(**TURING)).kind == "S-and-W"
    lin = LinearizationData.at(22.0, 2.5, 1.5, 0.01, 0.001)
    assert subsystem_classification(lin).kind == "S"
    with pytest.raises(ValueError):
        subsystem_classification(LinearizationData.at(critical_mass(20 / 3) + 0.1, 20 / 3, 0.3,
                                                      0.01, 0.001))


def test_turing_point_dispersion():
    lin = LinearizationData.at(**TURING)
    rep = dispersion_scan(lin, 10.0, 1001, ell=100.0)
    assert rep.uniform_stable
    assert rep.max_growth > 0 and rep.argmax_sigma > 0
    assert rep.points[0].max_real == pytest.approx(0.0, abs=1e-14)
    lam0 = rep.points[0].eigenvalues
    assert np.all(lam0[np.abs(lam0) > 1e-12].real < 0)
    assert rep.crossing_sigma is not None and rep.crossing_sigma < rep.argmax_sigma
    assert rep.modes[0][0] == 0 and len(rep.modes) > 1
    s = rep.summary()
    assert set(s) == {"uniformStable", "kind", "crossingSigma", "maxGrowth", "argmaxSigma"}


def test_equal_diffusion_no_instability():
    lin = LinearizationData.at(22.0, 2.5, 0.8, 1.0, 1.0)
    rep = dispersion_scan(lin, 50.0, 501)
    assert rep.kind == "none"
    assert rep.max_growth < 1e-12


def test_instability_extent_grid():
    out = instability_extent(22.0, 2.5, 0.8, [0.01, 0.1, 1.0], [0.001, 1.0], sigma_max=50.0,
                             n_sigma=301)
    assert len(out["table"]) == 6
    assert out["max_unstable_d"] is not None and out["max_unstable_d"] < 1.0


def test_eig_requires_nonnegative_sigma():
    with pytest.raises(ValueError):
        eig_B(-1.0, LinearizationData.at(**TURING))
