from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from mcrd.equilibria import (Nonlinearity, G_eval, constant_equilibria, critical_mass, g_eval,
                             h_constant, mu_bar, mu_critical, mu_one, roots_alpha_beta)

from conftest import ORACLE


def test_critical_mass_turing_point():
    assert critical_mass(2.5) == 11.25


def test_constant_equilibria_closed_form():
    zero, plus, minus = constant_equilibria(10.0, 2.0)
    assert zero == (0.0, 10.0, 0.0)
    assert plus[0] == pytest.approx(3 + math.sqrt(5), abs=1e-12)
    assert minus[0] == pytest.approx(3 - math.sqrt(5), abs=1e-12)
    assert plus[1] == pytest.approx(10 - 3 - math.sqrt(5), abs=1e-12)


def test_below_threshold_only_zero():
    assert constant_equilibria(7.9, 2.0) == [(0.0, 7.9, 0.0)]


@pytest.mark.parametrize("kappa", [1.5, 2.0, 2.5, 20 / 3])
def test_collapse_at_threshold(kappa):
    _, plus, minus = constant_equilibria(critical_mass(kappa), kappa)
    for e in (plus, minus):
        assert e[0] == pytest.approx(kappa, rel=1e-12)
        assert e[1] == pytest.approx(kappa * kappa + kappa, rel=1e-12)


@given(kappa=st.floats(1.1, 10.0), excess=st.floats(1e-3, 100.0))
def test_vieta_identities(kappa, excess):
    M = critical_mass(kappa) + excess
    _, (up, vp, wp), (um, vm, wm) = constant_equilibria(M, kappa)
    assert up * um == pytest.approx(kappa**2, rel=1e-10)
    assert up + um == pytest.approx(M - kappa**2, rel=1e-10)
    assert up + vp == pytest.approx(M, rel=1e-14) and wp == up
    # stationarity of the reaction: u v = kappa^2 (1 + u)
    assert up * vp == pytest.approx(kappa**2 * (1 + up), rel=1e-10)


def test_alpha_beta_mu6():
    a, b = roots_alpha_beta(6.0, 0.1, 2.0)
    assert a + b == pytest.approx(20.0, rel=1e-14)
    assert a * b == pytest.approx(40.0, rel=1e-14)
    assert a == pytest.approx(2.254033, abs=1e-6) and b == pytest.approx(17.745967, abs=1e-6)
    assert abs(g_eval(a, 6.0, 0.1, 2.0)) < 1e-12 and abs(g_eval(b, 6.0, 0.1, 2.0)) < 1e-12


def test_alpha_beta_requires_mu_above_mu_c():
    with pytest.raises(ValueError):
        roots_alpha_beta(mu_critical(0.1, 2.0) * 0.99, 0.1, 2.0)


@pytest.mark.parametrize("u", [0.5, 1.0, 5.0, 15.0])
def test_G_against_adaptive_quadrature(u):
    ref, _ = quad(lambda s: g_eval(s, 6.0, 0.1, 2.0), 0.0, u, epsabs=1e-14, epsrel=1e-13)
    assert G_eval(u, 6.0, 0.1, 2.0) == pytest.approx(ref, rel=1e-11, abs=1e-13)


def test_small_u_branch_continuous():
    u = np.array([1e-9, 1e-5, 1e-3, 0.05, 0.0999, 0.1001, 0.2])
    ref = [quad(lambda s: g_eval(s, 6.0, 0.1, 2.0), 0, x, epsabs=0, epsrel=1e-13)[0] for x in u]
    assert np.allclose(G_eval(u, 6.0, 0.1, 2.0), ref, rtol=1e-10, atol=0)


@pytest.mark.parametrize("key,d,kappa", [
    ("mu_bar(0.1,2)", 0.1, 2.0), ("mu_bar(0.1,20/3)", 0.1, 20 / 3),
    ("mu_bar(0.01,2)", 0.01, 2.0), ("mu_bar(0.01,2.5)", 0.01, 2.5),
])
def test_mu_bar_oracle(key, d, kappa):
    assert mu_bar(d, kappa) == pytest.approx(ORACLE[key], rel=1e-13)


@pytest.mark.parametrize("d", [0.01, 0.1])
@pytest.mark.parametrize("kappa", [2.0, 2.5, 20 / 3])
def test_threshold_sandwich(d, kappa):
    assert mu_critical(d, kappa) < mu_bar(d, kappa) < mu_one(d, kappa)


def test_mu_one_hand_value():
    assert mu_one(0.1, 2.0) == pytest.approx(4.1 + (2 / 3) * math.sqrt(3 * 1.63), rel=1e-15)
    assert mu_one(0.1, 2.0) == pytest.approx(5.574, abs=5e-4)


def test_bracket_signs_at_ends():
    mc, m1 = mu_critical(0.1, 2.0), mu_one(0.1, 2.0)
    assert Nonlinearity(mc + 1e-6, 0.1, 2.0).G_beta < 0 < Nonlinearity(m1, 0.1, 2.0).G_beta


def _sign_scan_root(f, a, b, n=20001):
    """Dense sampling then bisection; independent of the package's root finder."""
    x = np.linspace(a, b, n)
    y = np.array([f(t) for t in x])
    i = int(np.nonzero(np.sign(y[:-1]) != np.sign(y[1:]))[0][0])
    lo, hi = x[i], x[i + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sign(f(mid)) == np.sign(f(lo)):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_gamma_sign_scan_oracle():
    nl = Nonlinearity(mu_bar(0.1, 2.0) + 1.0, 0.1, 2.0)
    ref = _sign_scan_root(nl.G, nl.alpha, nl.beta)
    assert abs(nl.gamma - ref) < 1e-9
    assert nl.gamma == pytest.approx(ORACLE["gamma(mu_bar+1)"], rel=1e-13)


def test_gamma_decreases_in_mu():
    mb = mu_bar(0.1, 2.0)
    g1, g2 = (Nonlinearity(mb + s, 0.1, 2.0).gamma for s in (0.5, 1.5))
    assert g2 < g1


def test_eta_oracle_and_limits():
    nl = Nonlinearity(mu_bar(0.1, 2.0) + 1.0, 0.1, 2.0)
    xi = 0.5 * (nl.alpha + nl.gamma)
    level = nl.G(xi)
    ref = _sign_scan_root(lambda u: nl.G(u) - level, 0.0, nl.alpha)
    assert abs(nl.eta(xi) - ref) < 1e-9
    assert nl.eta(xi) == pytest.approx(ORACLE["eta(xi_mid)"], rel=1e-13)
    assert nl.eta(nl.alpha) == nl.alpha
    assert nl.eta(nl.gamma) == 0.0
    assert nl.eta(nl.gamma - 1e-9) < 1e-3
    with pytest.raises(ValueError):
        nl.eta(nl.gamma + 0.1)


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.01, 0.99), off=st.floats(0.05, 3.0))
def test_eta_shares_energy(s, off):
    nl = Nonlinearity(mu_bar(0.1, 2.0) + off, 0.1, 2.0)
    xi = nl.alpha + s * (nl.gamma - nl.alpha)
    e = nl.eta(xi)
    assert 0 < e <= nl.alpha
    assert nl.G(e) == pytest.approx(nl.G(xi), rel=1e-9, abs=1e-12)


def test_omega_star_and_chi():
    mb = mu_bar(0.1, 2.0)
    assert Nonlinearity(mb, 0.1, 2.0).omega_star == 0.0
    nl = Nonlinearity(ORACLE["mu_mid"], 0.1, 2.0)
    assert nl.omega_star == pytest.approx(ORACLE["omega_star(mu_mid)"], rel=1e-12)
    assert nl.chi(nl.omega_star) == nl.beta
    om = 0.5 * (nl.omega_star + nl.alpha)
    assert nl.chi(om) == pytest.approx(ORACLE["chi(omega_mid)"], rel=1e-13)
    # d chi / d omega = g(omega)/g(chi) < 0
    for w in np.linspace(nl.omega_star + 0.05, nl.alpha - 0.05, 7):
        assert nl.g(w) / nl.g(nl.chi(w)) < 0
        assert nl.chi(w + 1e-4) < nl.chi(w)


def test_h_constant():
    d, kappa = 0.1, 2.0
    h = h_constant(d, kappa)
    assert h == pytest.approx(ORACLE["h(0.1,2)"], rel=1e-13)
    nl = Nonlinearity(mu_bar(d, kappa), d, kappa)
    b, step = nl.beta, 1e-3
    fd2 = (nl.G(b + step) - 2 * nl.G(b) + nl.G(b - step)) / step**2
    assert abs(h + fd2) < 1e-6
    small = [h_constant(dd, kappa) for dd in (1e-2, 1e-3, 1e-4)]
    assert small[0] < h and small[1] < small[0] and small[2] < small[1]
    assert small[2] < 0.05 * h


def test_branch_labels():
    mb = mu_bar(0.1, 2.0)
    assert Nonlinearity(mb, 0.1, 2.0).branch == "front"
    assert Nonlinearity(mb + 0.1, 0.1, 2.0).branch == "spike"
    assert Nonlinearity(mb - 0.1, 0.1, 2.0).branch == "increasing"
    assert Nonlinearity.near_threshold(1e-14, 0.1, 2.0).branch == "spike"
    with pytest.raises(ValueError):
        Nonlinearity(mu_critical(0.1, 2.0), 0.1, 2.0).branch


def test_offset_representation_near_threshold():
    # G(beta) ~ G'(mu) offset near mu_bar: the offset route must stay linear
    vals = [Nonlinearity.near_threshold(s, 0.1, 20 / 3).G_beta / s for s in (1e-13, 1e-10, 1e-7)]
    assert all(v > 0 for v in vals)
    assert max(vals) / min(vals) - 1 < 1e-5


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.0, 20.0), delta=st.floats(1e-6, 5.0))
def test_int_g_matches_closed_form(a, delta):
    nl = Nonlinearity(6.0, 0.1, 2.0)
    ref = nl.G(a + delta) - nl.G(a)
    assert nl.int_g(a, delta) == pytest.approx(ref, rel=1e-9, abs=1e-10 * (1 + abs(nl.G(a))))


@settings(max_examples=30, deadline=None)
@given(t0=st.floats(0.0, 10.0), delta=st.floats(1e-6, 5.0))
def test_int_g_beta_matches_closed_form(t0, delta):
    nl = Nonlinearity(6.0, 0.1, 2.0)
    b = nl.beta
    ref = nl.G(b - t0) - nl.G(b - t0 - delta)
    assert nl.int_g_beta(t0, delta) == pytest.approx(ref, rel=1e-9, abs=1e-10 * (1 + abs(nl.G(b))))


def test_derivatives_random_points():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        mu, u = rng.uniform(4.5, 9.0), rng.uniform(0.05, 20.0)
        nl = Nonlinearity(mu, 0.1, 2.0)
        hu, hm = 1e-5 * (1 + u), 1e-5 * mu
        dGu = (G_eval(u + hu, mu, 0.1, 2.0) - G_eval(u - hu, mu, 0.1, 2.0)) / (2 * hu)
        dGm = (G_eval(u, mu + hm, 0.1, 2.0) - G_eval(u, mu - hm, 0.1, 2.0)) / (2 * hm)
        dgu = (nl.g(u + hu) - nl.g(u - hu)) / (2 * hu)
        assert abs(dGu - nl.g(u)) <= 1e-6 * max(1.0, abs(nl.g(u)))
        assert abs(dGm - nl.G_mu(u)) <= 1e-6 * max(1.0, abs(nl.G_mu(u)))
        assert abs(dgu - nl.g_u(u)) <= 1e-6 * max(1.0, abs(nl.g_u(u)))
