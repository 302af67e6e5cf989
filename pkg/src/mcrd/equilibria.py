"""Constant equilibria, the reduced nonlinearity and its special points.

Stationary states with ``w = u`` reduce to ``d u'' + g(u; mu) = 0`` where

    g(u; mu) = u * [u (mu - d u) / (kappa^2 (u + 1)) - 1]

and ``G`` is the antiderivative of ``g`` vanishing at zero. For
``mu > mu_c = kappa^2 + 2 sqrt(d) kappa`` the nonlinearity has positive zeros
``alpha < beta`` and the factorisation

    g(u; mu) = d u (u - alpha)(beta - u) / (kappa^2 (u + 1)).

Differences of ``G`` between nearby or tiny arguments are computed by
Gauss-Legendre quadrature in ``v = log(1 + u)`` (or ``log`` of the distance to
the pole seen from ``beta``), where ``g du`` becomes a polynomial times ``dv``
and keeps full relative precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from ._roots import bracketed_root

__all__ = [
    "critical_mass",
    "constant_equilibria",
    "Nonlinearity",
    "roots_alpha_beta",
    "mu_critical",
    "mu_bar",
    "mu_one",
    "h_constant",
    "gamma_root",
    "eta",
    "omega_star",
    "chi",
    "g_eval",
    "G_eval",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(40)
_SERIES_CUTOFF = 1e-3


def critical_mass(kappa: float) -> float:
    """Saddle-node mass ``M_c = kappa^2 + 2 kappa``."""
    return kappa * kappa + 2.0 * kappa


def constant_equilibria(M: float, kappa: float) -> list[tuple[float, float, float]]:
    """Nonnegative constant equilibria ``(u, v, w)`` with ``u + v = M``.

    Returns ``[(0, M, 0)]`` below the saddle node and additionally
    ``(u_+, v_+, u_+)``, ``(u_-, v_-, u_-)`` (in that order) for ``M >= M_c``.
    At ``M = M_c`` both collapse to ``u = kappa``.
    """
    out = [(0.0, float(M), 0.0)]
    b = M - kappa * kappa
    if M < critical_mass(kappa):
        return out
    # factored so that the sign is exact at M = M_c
    disc = (M - critical_mass(kappa)) * (b + 2.0 * kappa)
    root = math.sqrt(disc)
    u_plus = 0.5 * (b + root)
    # u_+ u_- = kappa^2 avoids cancellation in the small root
    u_minus = kappa * kappa / u_plus
    out.append((u_plus, M - u_plus, u_plus))
    out.append((u_minus, M - u_minus, u_minus))
    return out


def mu_critical(d: float, kappa: float) -> float:
    return kappa * kappa + 2.0 * math.sqrt(d) * kappa


def roots_alpha_beta(mu: float, d: float, kappa: float) -> tuple[float, float]:
    """Positive zeros of ``g(.; mu)``; requires ``mu > mu_c``."""
    b = mu - kappa * kappa
    disc = b * b - 4.0 * d * kappa * kappa
    if mu <= mu_critical(d, kappa) or disc <= 0:
        raise ValueError(
            f"mu={mu!r} must exceed mu_c={mu_critical(d, kappa)!r} for two positive zeros"
        )
    beta = (b + math.sqrt(disc)) / (2.0 * d)
    alpha = (kappa * kappa / d) / beta
    return alpha, beta


def _P_small(u):
    # u^2/2 - u + log(1+u) for |u| < 1e-3
    u3 = u * u * u
    return u3 * (1 / 3 - u * (1 / 4 - u * (1 / 5 - u * (1 / 6 - u / 7))))


def _P(u):
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SERIES_CUTOFF
    out = np.empty_like(u)
    out[small] = _P_small(u[small])
    ub = u[~small]
    out[~small] = ub * ub / 2 - ub + np.log1p(ub)
    return out


def _check_domain(u) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= -1):
        raise ValueError("G and g are defined only for u > -1")
    return arr


def g_eval(u, mu: float, d: float, kappa: float):
    arr = _check_domain(u)
    val = arr * (arr * (mu - d * arr) / (kappa * kappa * (arr + 1.0)) - 1.0)
    return val if np.ndim(u) else float(val)


def G_eval(u, mu: float, d: float, kappa: float):
    """Closed-form antiderivative of ``g`` with ``G(0) = 0``."""
    arr = _check_domain(u)
    P = _P(arr)
    k2 = kappa * kappa
    val = (mu / k2) * P + (d / k2) * (P - arr**3 / 3.0) - arr * arr / 2.0
    return val if np.ndim(u) else float(val)


@dataclass(frozen=True)
class Nonlinearity:
    """``g(.; mu)`` and ``G(.; mu)`` for fixed ``(mu, d, kappa)``.

    Derived quantities (roots, ``gamma``, ``omega_*``) are computed lazily and
    memoised on the instance; instances are immutable so the cache is keyed
    by the exact parameter bits.
    """

    mu: float
    d: float
    kappa: float
    offset: float | None = None

    @classmethod
    def near_threshold(cls, offset: float, d: float, kappa: float) -> "Nonlinearity":
        """Instance at ``mu = mu_bar + offset`` keeping the offset exactly.

        Within a few hundred ulps of ``mu_bar`` the closed form of
        ``G(beta)`` is swamped by cancellation; carrying the offset lets it
        be integrated from the threshold instead.
        """
        return cls(mu_bar(d, kappa) + offset, d, kappa, float(offset))

    def g(self, u):
        return g_eval(u, self.mu, self.d, self.kappa)

    def G(self, u):
        return G_eval(u, self.mu, self.d, self.kappa)

    def G_mu(self, u):
        arr = _check_domain(u)
        val = _P(arr) / (self.kappa * self.kappa)
        return val if np.ndim(u) else float(val)

    def g_u(self, u):
        arr = _check_domain(u)
        k2 = self.kappa * self.kappa
        # d/du of u^2 (mu - d u)/(k2 (u+1)) - u
        num = (2 * self.mu * arr - 3 * self.d * arr**2) * (arr + 1) - arr**2 * (self.mu - self.d * arr)
        val = num / (k2 * (arr + 1) ** 2) - 1.0
        return val if np.ndim(u) else float(val)

    def g_cubic(self, u):
        """Factored form ``d u (u-alpha)(beta-u) / (kappa^2 (u+1))``."""
        a, b = self.alpha, self.beta
        arr = _check_domain(u)
        val = self.d * arr * (arr - a) * (b - arr) / (self.kappa**2 * (arr + 1))
        return val if np.ndim(u) else float(val)

    @property
    def mu_c(self) -> float:
        return mu_critical(self.d, self.kappa)

    @cached_property
    def _roots(self) -> tuple[float, float]:
        return roots_alpha_beta(self.mu, self.d, self.kappa)

    @property
    def alpha(self) -> float:
        return self._roots[0]

    @property
    def beta(self) -> float:
        return self._roots[1]

    @cached_property
    def mu_bar(self) -> float:
        return mu_bar(self.d, self.kappa)

    @cached_property
    def G_beta(self) -> float:
        """``G(beta; mu)``, taken as exactly zero at ``mu = mu_bar``.

        The threshold is only known to rounding; the heteroclinic (front)
        construction needs the exact degenerate energy level.
        """
        if self.offset is not None:
            return _G_beta_from_threshold(self.offset, self.d, self.kappa)
        if self.mu == self.mu_bar:
            return 0.0
        return self.G(self.beta)

    @property
    def branch(self) -> str:
        """Which monotone family exists: ``spike``, ``front`` or ``increasing``."""
        if self.mu <= self.mu_c:
            raise ValueError(f"no monotone stationary solutions for mu <= mu_c ({self.mu_c})")
        if self.offset is not None:
            if self.offset == 0.0:
                return "front"
            return "spike" if self.offset > 0 else "increasing"
        if self.mu == self.mu_bar:
            return "front"
        return "spike" if self.G_beta > 0 else "increasing"

    # --- relative-accurate integrals of g -------------------------------

    def int_g(self, a, delta, scale=1.0):
        """``(G(a + delta) - G(a)) / scale**2`` for ``a >= 0`` (vectorised).

        With ``v = log(1 + u)`` the integrand ``g du`` is the polynomial
        ``g(u)(u+1)`` in ``u = expm1(v)``; ``delta`` is passed explicitly so
        the integration length never suffers cancellation. ``scale`` (of the
        order of ``a + delta``) keeps tiny arguments from underflowing.
        """
        a, delta, scale = np.broadcast_arrays(
            np.asarray(a, dtype=float), np.asarray(delta, dtype=float), np.asarray(scale, dtype=float)
        )
        v0 = np.log1p(a)
        dv = np.log1p(delta / (1.0 + a))
        half = 0.5 * dv
        v = (v0 + half)[..., None] + half[..., None] * _GL_X
        u = np.expm1(v)
        k2 = self.kappa**2
        if self.mu > self.mu_c:
            rest = self.d * (u - self.alpha) * (self.beta - u) / k2
        else:
            rest = (-self.d * u * u + (self.mu - k2) * u - k2) / k2
        vals = (u / scale[..., None]) * rest
        out = (half / scale) * (vals @ _GL_W)
        return out if out.ndim else float(out)

    def int_g_beta(self, t0, delta, scale=1.0):
        """``(G(beta - t0) - G(beta - t0 - delta)) / scale**2`` (vectorised).

        Equivalently ``int_{t0}^{t0+delta} g(beta - t) dt``. The substitution
        ``beta + 1 - t = (beta + 1) exp(-v)`` cancels the pole, leaving
        ``d (beta - t)(beta - alpha - t) t / kappa^2`` in ``dv``.
        """
        a, b = self.alpha, self.beta
        c = b + 1.0
        t0, delta, scale = np.broadcast_arrays(
            np.asarray(t0, dtype=float), np.asarray(delta, dtype=float), np.asarray(scale, dtype=float)
        )
        v0 = -np.log1p(-t0 / c)
        dv = np.log1p(delta / (c - t0 - delta))
        half = 0.5 * dv
        v = (v0 + half)[..., None] + half[..., None] * _GL_X
        t = -c * np.expm1(-v)
        vals = self.d * (b - t) * (b - a - t) * (t / scale[..., None]) / self.kappa**2
        out = (half / scale) * (vals @ _GL_W)
        return out if out.ndim else float(out)

    # --- special points ---------------------------------------------------

    @cached_property
    def gamma(self) -> float:
        """Zero of ``G`` in ``(alpha, beta)``; needs ``G(beta) > 0``."""
        a, b = self.alpha, self.beta
        Gb = self.G_beta
        if not Gb > 0:
            raise ValueError(f"G(beta; mu) = {Gb!r} <= 0: G has no zero in (alpha, beta)")
        return bracketed_root(self.G, a, b, fa=self.G(a), fb=Gb)

    @cached_property
    def omega_star(self) -> float:
        """``omega_* in [0, alpha)`` with ``G(omega_*) = G(beta)``; needs ``mu <= mu_bar``."""
        a = self.alpha
        Gb = self.G_beta
        if Gb > 0:
            raise ValueError(f"omega_* needs mu <= mu_bar={self.mu_bar!r}, got mu={self.mu!r}")
        if Gb == 0.0:
            return 0.0
        return bracketed_root(lambda u: self.G(u) - Gb, 0.0, a, fa=-Gb, fb=self.G(a) - Gb)

    def eta(self, xi: float) -> float:
        """Lower turning value in ``(0, alpha]`` sharing the energy ``G(xi)``."""
        a, gam = self.alpha, self.gamma
        if not a <= xi <= gam:
            raise ValueError(f"xi={xi!r} outside [alpha, gamma] = [{a!r}, {gam!r}]")
        if xi == a:
            return a
        if xi == gam:
            return 0.0
        level = self.G(xi)
        return bracketed_root(lambda u: self.G(u) - level, 0.0, a, fa=-level, fb=self.G(a) - level)

    def chi(self, omega: float) -> float:
        """Upper turning value in ``(alpha, beta]`` sharing the energy ``G(omega)``."""
        a, b, ws = self.alpha, self.beta, self.omega_star
        if not ws <= omega <= a:
            raise ValueError(f"omega={omega!r} outside [omega_*, alpha] = [{ws!r}, {a!r}]")
        if omega == ws:
            return b
        if omega == a:
            return a
        level = self.G(omega)
        return bracketed_root(
            lambda u: self.G(u) - level, a, b, fa=self.G(a) - level, fb=self.G_beta - level
        )


def gamma_root(nl: Nonlinearity) -> float:
    return nl.gamma


def eta(xi: float, nl: Nonlinearity) -> float:
    return nl.eta(xi)


def omega_star(nl: Nonlinearity) -> float:
    return nl.omega_star


def chi(omega: float, nl: Nonlinearity) -> float:
    return nl.chi(omega)


def mu_one(d: float, kappa: float) -> float:
    """Explicit ``mu_1 > mu_bar`` at which ``beta >= 3 (alpha + 1)``."""
    return kappa * kappa + d + (2.0 / 3.0) * math.sqrt(3.0 * (4.0 * d * kappa * kappa + 3.0 * d * d))


def _G_at_beta(mu: float, d: float, kappa: float) -> float:
    _, b = roots_alpha_beta(mu, d, kappa)
    return G_eval(b, mu, d, kappa)


@lru_cache(maxsize=256)
def mu_bar(d: float, kappa: float) -> float:
    """Unique ``mu`` in ``(mu_c, mu_1]`` with ``G(beta(mu); mu) = 0``."""
    if not 0 < d < 1:
        raise ValueError(f"mu_bar needs 0 < d < 1, got {d!r}")
    lo = mu_critical(d, kappa)
    hi = mu_one(d, kappa)
    # step off mu_c where alpha = beta and G(beta) < 0
    left = lo + 1e-9 * max(1.0, lo)
    f = lambda m: _G_at_beta(m, d, kappa)
    return bracketed_root(f, left, hi, xtol=1e-15)


def _G_beta_from_threshold(offset: float, d: float, kappa: float) -> float:
    # d/dmu G(beta(mu); mu) = G_mu(beta) = P(beta) / kappa^2 since g(beta) = 0
    if offset == 0.0:
        return 0.0
    mb = mu_bar(d, kappa)
    s = 0.5 * offset * (_GL_X + 1.0)
    betas = np.array([roots_alpha_beta(mb + si, d, kappa)[1] for si in s])
    return float(0.5 * offset * (_P(betas) @ _GL_W) / (kappa * kappa))


def h_constant(d: float, kappa: float) -> float:
    """``|g_u(beta(mu_bar); mu_bar)| = d beta (beta - alpha) / (kappa^2 (beta + 1))``."""
    a, b = roots_alpha_beta(mu_bar(d, kappa), d, kappa)
    return d * b * (b - a) / (kappa * kappa * (b + 1.0))
