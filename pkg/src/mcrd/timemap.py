"""Monotone stationary profiles of ``d u'' + g(u; mu) = 0`` with Neumann ends.

A monotone solution on ``[0, ell]`` oscillates between two turning values
``lo < alpha < hi`` sharing the energy ``G(lo) = G(hi)``, and its length is
the time map

    rho = sqrt(d) * int_lo^hi dz / sqrt(2 (E - G(z))).

Three families exist:

* ``spike``       (mu > mu_bar): decreasing, ``u(0) = xi``, ``u(ell) = eta``;
* ``increasing``  (mu_c < mu < mu_bar): increasing, ``u(0) = omega``,
  ``u(ell) = chi``;
* ``front``       (mu = mu_bar): as ``increasing`` with ``omega_* = 0``.

Long intervals push the turning values exponentially close to an equilibrium
(``eta -> 0`` or ``chi -> beta``), so the profile is never parametrised by
the turning values directly. Each half of the orbit is written with a
``cosh`` substitution anchored at its own turning value,

    z = lo cosh(s)            on [lo, alpha],
    z = beta - gap cosh(s)    on [alpha, beta - gap],

which removes the square-root endpoint singularity, turns the logarithmic
divergence into a long but bounded smooth integrand, and lets the energy
differences be evaluated without cancellation. The free parameter handed to
the length solver is ``log(eta)`` (spike) or ``log(gap)`` with
``gap = beta - chi`` (increasing/front).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import roots_legendre

from ._roots import BracketError, bracketed_root
from .discrete import (
    gradient_fd2,
    gradient_spectral,
    laplacian_fd2,
    laplacian_spectral,
    trapezoid_mean,
)
from .equilibria import Nonlinearity, h_constant, mu_bar, mu_critical

__all__ = [
    "TimeMapError",
    "MinimalLengthError",
    "TurningPair",
    "ProfileSolution",
    "StationaryTriple",
    "rho",
    "rho_tilde",
    "rho_sin2",
    "solve_xi",
    "solve_omega",
    "solve_pair",
    "minimal_length",
    "rho_small_amplitude",
    "profile_from_boundary",
    "profile_for_length",
    "mean_u",
    "mean_u_integral",
    "mean_u_sin2",
    "solve_mass_constraint",
    "mass_constraint_roots",
    "solve_mass_constraint_increasing",
    "stationary_residual",
    "homoclinic_profile",
    "heteroclinic_profile",
    "mean_u_limit",
]

_GX, _GW = np.polynomial.legendre.leggauss(16)
_PANEL = 0.5
_LOG_TINY = math.log(1e-300)


class TimeMapError(ArithmeticError):
    """Quadrature or root finding for a time-map quantity failed."""


class MinimalLengthError(TimeMapError):
    """Requested length is below the smallest length the branch supports."""

    def __init__(self, ell: float, minimum: float, branch: str):
        super().__init__(
            f"ell={ell!r} below minimal time-map length {minimum!r} on the {branch} branch"
        )
        self.ell = ell
        self.minimum = minimum
        self.branch = branch


def _length_scale(d: float, convention: str) -> float:
    if convention == "physical":
        return math.sqrt(d)
    if convention == "literal":
        # lengths of the rescaled problem u'' + g(u) = 0
        return 1.0
    raise ValueError(f"convention must be 'physical' or 'literal', got {convention!r}")


# --------------------------------------------------------------------------
# one monotone half-orbit in cosh / exponential coordinates
# --------------------------------------------------------------------------


class _Segment:
    """Half-orbit between a turning value (or equilibrium) and ``alpha``.

    ``kind`` selects the coordinate ``z(s)``, ``s >= 0``, with ``z(0)`` the
    far end and ``z`` moving toward ``alpha`` as ``s`` grows:

    ``lo``     z = base cosh s,              energy G(base)
    ``hi``     z = beta - base cosh s,       energy G(beta - base)
    ``tail0``  z = alpha exp(-s),            energy 0 = G(0)      (s reversed)
    ``tailb``  z = beta - (beta-alpha) e^-s, energy G(beta)       (s reversed)

    For the tails ``s = 0`` sits at ``alpha`` and ``s -> inf`` at the
    equilibrium. ``speed(s) = |dz/ds| / sqrt(2 (E - G(z)))`` is smooth and
    bounded; the unscaled length of the piece is its integral over ``s``.
    """

    def __init__(self, nl: Nonlinearity, kind: str, base: float, s_end: float | None = None):
        self.nl = nl
        self.kind = kind
        self.base = float(base)
        self.edges = np.zeros(1)
        self.cum = np.zeros(1)
        self.zcum = np.zeros(1)
        if s_end is not None:
            npan = max(1, math.ceil(s_end / _PANEL))
            self._extend(np.linspace(0.0, s_end, npan + 1)[1:])

    @classmethod
    def lower(cls, nl: Nonlinearity, lo: float) -> "_Segment":
        return cls(nl, "lo", lo, math.acosh(max(nl.alpha / lo, 1.0)))

    @classmethod
    def upper(cls, nl: Nonlinearity, gap: float) -> "_Segment":
        return cls(nl, "hi", gap, math.acosh(max((nl.beta - nl.alpha) / gap, 1.0)))

    # coordinates -----------------------------------------------------------

    def z(self, s):
        s = np.asarray(s, dtype=float)
        nl, b = self.nl, self.base
        if self.kind == "lo":
            return b * np.cosh(s)
        if self.kind == "hi":
            return nl.beta - b * np.cosh(s)
        if self.kind == "tail0":
            return nl.alpha * np.exp(-s)
        return nl.beta - (nl.beta - nl.alpha) * np.exp(-s)

    def speed(self, s):
        s = np.asarray(s, dtype=float)
        nl, b = self.nl, self.base
        if self.kind in ("lo", "hi"):
            zeta = b * np.cosh(s)
            delta = 2.0 * b * np.sinh(0.5 * s) ** 2
            # energy drop divided by the squared offset so nothing underflows
            if self.kind == "lo":
                drop = -nl.int_g(b, delta, zeta)
                g0 = -nl.g(b)
            else:
                drop = nl.int_g_beta(b, delta, zeta)
                a_, b_ = nl.alpha, nl.beta
                g0 = nl.d * (b_ - b) * (b_ - a_ - b) * b / (nl.kappa**2 * (b_ - b + 1.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                val = np.tanh(s) / np.sqrt(2.0 * drop)
            # turning point: ratio tends to sqrt(base / |g(turning value)|)
            return np.where(s < 1e-6, math.sqrt(b / g0), val)
        if self.kind == "tail0":
            z = nl.alpha * np.exp(-s)
            return 1.0 / np.sqrt(-2.0 * nl.int_g(0.0, z, z))
        t = (nl.beta - nl.alpha) * np.exp(-s)
        return 1.0 / np.sqrt(2.0 * nl.int_g_beta(0.0, t, t))

    # cumulative integrals --------------------------------------------------

    def _panels(self, a: np.ndarray, b: np.ndarray):
        half = 0.5 * (b - a)
        nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GX
        f = self.speed(nodes)
        return half, nodes, f

    def _extend(self, new_edges: np.ndarray) -> None:
        a = np.concatenate([[self.edges[-1]], new_edges[:-1]])
        half, nodes, f = self._panels(a, new_edges)
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise TimeMapError(f"time-map integrand not positive/finite on {self.kind} segment")
        pieces = half * (f @ _GW)
        zpieces = half * ((f * self.z(nodes)) @ _GW)
        self.edges = np.concatenate([self.edges, new_edges])
        self.cum = np.concatenate([self.cum, self.cum[-1] + np.cumsum(pieces)])
        self.zcum = np.concatenate([self.zcum, self.zcum[-1] + np.cumsum(zpieces)])

    def extend_until(self, total: float, s_cap: float = 700.0) -> None:
        """Grow an unbounded (tail) segment until its integral reaches ``total``."""
        while self.cum[-1] < total:
            start = self.edges[-1]
            if start >= s_cap:
                raise TimeMapError(
                    "requested extent needs values below working precision of the asymptote"
                )
            stop = min(start + 16 * _PANEL, s_cap)
            self._extend(np.linspace(start, stop, 17)[1:])

    @property
    def total(self) -> float:
        return float(self.cum[-1])

    @property
    def ztotal(self) -> float:
        return float(self.zcum[-1])

    def cumulative(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(self.edges, s, side="right") - 1, 0, len(self.edges) - 2)
        a = self.edges[k]
        half = 0.5 * (s - a)
        nodes = (0.5 * (a + s))[..., None] + half[..., None] * _GX
        return self.cum[k] + half * (self.speed(nodes) @ _GW)

    def invert(self, c: np.ndarray, tol: float = 1e-14) -> np.ndarray:
        """Solve ``cumulative(s) = c`` by safeguarded Newton within one panel."""
        c = np.clip(np.asarray(c, dtype=float), 0.0, self.total)
        k = np.clip(np.searchsorted(self.cum, c, side="right") - 1, 0, len(self.edges) - 2)
        lo, hi = self.edges[k], self.edges[k + 1]
        frac = (c - self.cum[k]) / (self.cum[k + 1] - self.cum[k])
        s = lo + frac * (hi - lo)
        scale = max(self.total, 1.0)
        for _ in range(50):
            err = self.cumulative(s) - c
            if np.all(np.abs(err) <= tol * scale):
                break
            s = np.clip(s - err / self.speed(s), lo, hi)
        else:
            raise TimeMapError("profile inversion did not converge")
        return s


# --------------------------------------------------------------------------
# turning pairs
# --------------------------------------------------------------------------


@dataclass
class TurningPair:
    """A periodic orbit of ``d u'' + g = 0`` given by its two turning values.

    ``lo`` is the lower turning value and ``gap = beta - hi`` the distance of
    the upper one from ``beta``; both are stored so neither loses precision.
    """

    nl: Nonlinearity
    lo: float
    gap: float
    convention: str = "physical"
    _lower: _Segment | None = field(default=None, init=False, repr=False)
    _upper: _Segment | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        a, b = self.nl.alpha, self.nl.beta
        if not (0.0 < self.lo <= a and 0.0 < self.gap <= b - a):
            raise TimeMapError(
                f"turning values lo={self.lo!r}, beta-gap={b - self.gap!r} "
                f"not on either side of alpha={a!r}"
            )

    @property
    def hi(self) -> float:
        return self.nl.beta - self.gap

    @property
    def energy(self) -> float:
        return float(self.nl.int_g(0.0, self.lo))

    @property
    def scale(self) -> float:
        return _length_scale(self.nl.d, self.convention)

    @property
    def lower(self) -> _Segment:
        if self._lower is None:
            self._lower = _Segment.lower(self.nl, self.lo)
        return self._lower

    @property
    def upper(self) -> _Segment:
        if self._upper is None:
            self._upper = _Segment.upper(self.nl, self.gap)
        return self._upper

    @property
    def length(self) -> float:
        return self.scale * (self.lower.total + self.upper.total)

    @property
    def integral_u(self) -> float:
        """``int u dx`` over one monotone half-orbit."""
        return self.scale * (self.lower.ztotal + self.upper.ztotal)

    @property
    def mean(self) -> float:
        return (self.lower.ztotal + self.upper.ztotal) / (self.lower.total + self.upper.total)

    # constructors ------------------------------------------------------

    @classmethod
    def from_lower(cls, nl: Nonlinearity, lo: float, convention: str = "physical") -> "TurningPair":
        """Spike family: the upper turning value sharing the energy of ``lo``."""
        a, b = nl.alpha, nl.beta
        if not 0.0 < lo < a:
            raise TimeMapError(f"lower turning value {lo!r} outside (0, alpha={a!r})")
        level = nl.int_g(0.0, lo)
        Gb = nl.G_beta
        if not level < Gb:
            raise TimeMapError("energy level at or above G(beta): no upper turning value")
        f = lambda gap: Gb - nl.int_g_beta(0.0, gap) - level
        gap = bracketed_root(f, 0.0, b - a, fa=Gb - level, xtol=1e-15 * b)
        if gap <= 0.0:
            raise TimeMapError("upper turning value not separable from beta")
        return cls(nl, lo, gap, convention)

    @classmethod
    def from_gap(cls, nl: Nonlinearity, gap: float, convention: str = "physical") -> "TurningPair":
        """Increasing/front family: the lower turning value for ``chi = beta - gap``."""
        a, b = nl.alpha, nl.beta
        if not 0.0 < gap < b - a:
            raise TimeMapError(f"gap {gap!r} outside (0, beta-alpha={b - a!r})")
        level = nl.G_beta - nl.int_g_beta(0.0, gap)
        if not level < 0.0:
            raise TimeMapError("energy level not below G(0): no lower turning value")
        f = lambda v: nl.int_g(0.0, math.exp(v)) - level
        v = bracketed_root(f, _LOG_TINY, math.log(a), xtol=1e-15)
        return cls(nl, math.exp(v), gap, convention)

    # profiles ------------------------------------------------------------

    def sample(self, n: int, increasing: bool) -> tuple[np.ndarray, np.ndarray]:
        """``n`` samples of ``u`` at equally spaced points of the orbit.

        Returns ``(xs, us)`` with ``xs`` spanning ``[0, length]``.
        """
        lower, upper = self.lower, self.upper
        first, second = (lower, upper) if increasing else (upper, lower)
        c = np.linspace(0.0, first.total + second.total, n)
        us = np.empty(n)
        in_first = c <= first.total
        us[in_first] = first.z(first.invert(c[in_first]))
        rest = second.total - (c[~in_first] - first.total)
        us[~in_first] = second.z(second.invert(rest))
        us[0] = self.lo if increasing else self.hi
        us[-1] = self.hi if increasing else self.lo
        return self.scale * c, us


# --------------------------------------------------------------------------
# length solver in log coordinates
# --------------------------------------------------------------------------


def _family(nl: Nonlinearity) -> str:
    return "spike" if nl.branch == "spike" else "increasing"


def _pair_at(nl: Nonlinearity, p: float, convention: str) -> TurningPair:
    if _family(nl) == "spike":
        return TurningPair.from_lower(nl, math.exp(p), convention)
    return TurningPair.from_gap(nl, math.exp(p), convention)


def _p_top(nl: Nonlinearity) -> float:
    if _family(nl) == "spike":
        return math.log(nl.alpha)
    return math.log(nl.beta - nl.alpha)


def _p_floor(nl: Nonlinearity) -> float:
    if _family(nl) == "spike":
        return _LOG_TINY
    # the lower turning value must stay representable on the front family
    return 0.5 * _LOG_TINY if nl.branch == "front" else _LOG_TINY


_TOP_OFFSETS = (1e-4, 1e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 2.0, 4.0, 8.0)


@dataclass
class _Scan:
    ps: list[float]
    rhos: list[float]


@lru_cache(maxsize=512)
def _length_fn(nl: Nonlinearity, convention: str):
    cache: dict[float, float] = {}

    def rho_p(p: float) -> float:
        if p not in cache:
            cache[p] = _pair_at(nl, p, convention).length
        return cache[p]

    return rho_p


def _scan_down(nl: Nonlinearity, convention: str, ell: float | None) -> _Scan:
    """Evaluate the length at parameters descending from the small-amplitude end.

    Stops once the length exceeds ``ell`` (when given).
    """
    rho_p = _length_fn(nl, convention)
    top, floor = _p_top(nl), _p_floor(nl)
    ps, rhos = [], []
    for off in _TOP_OFFSETS:
        p = top - off
        ps.append(p)
        rhos.append(rho_p(p))
        if ell is not None and rhos[-1] > ell:
            return _Scan(ps, rhos)
    if ell is None:
        return _Scan(ps, rhos)
    while rhos[-1] <= ell:
        if ps[-1] <= floor:
            raise TimeMapError(
                f"ell={ell!r} exceeds the longest length representable in double precision "
                f"on the {nl.branch} branch (about {rhos[-1]!r})"
            )
        slope = (rhos[-1] - rhos[-2]) / (ps[-2] - ps[-1])
        step = 1.5 * (ell - rhos[-1]) / slope if slope > 0 else 8.0
        p = max(ps[-1] - min(max(step, 1.0), 200.0), floor)
        ps.append(p)
        rhos.append(rho_p(p))
    return _Scan(ps, rhos)


@lru_cache(maxsize=256)
def _minimum(nl: Nonlinearity, convention: str) -> tuple[float, float]:
    """``(p, rho)`` at the smallest length of the branch (scan + golden section)."""
    rho_p = _length_fn(nl, convention)
    scan = _scan_down(nl, convention, None)
    ps, rhos = scan.ps, scan.rhos
    # extend the scan until the length clearly grows again
    while len(ps) < 4 or rhos[-1] <= min(rhos) * 1.05:
        p = ps[-1] - 8.0
        if p < _p_floor(nl):
            break
        ps.append(p)
        rhos.append(rho_p(p))
    k = int(np.argmin(rhos))
    if k == 0:
        # monotone near the small-amplitude end; infimum approached at the top
        lin = rho_small_amplitude(nl, convention)
        return _p_top(nl), min(lin, rhos[0])
    lo = ps[min(k + 1, len(ps) - 1)]
    hi = ps[k - 1]
    res = minimize_scalar(rho_p, bracket=None, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6})
    if res.fun < rhos[k]:
        return float(res.x), float(res.fun)
    return ps[k], rhos[k]


def rho_small_amplitude(nl: Nonlinearity, convention: str = "physical") -> float:
    """Half period ``pi sqrt(d / g_u(alpha))`` of the linearisation at ``alpha``."""
    return _length_scale(nl.d, convention) * math.pi / math.sqrt(nl.g_u(nl.alpha))


def minimal_length(mu: float, d: float, kappa: float, convention: str = "physical") -> float:
    """Smallest interval length carrying a monotone solution at this ``mu``."""
    return _minimum(Nonlinearity(mu, d, kappa), convention)[1]


def solve_pair(nl: Nonlinearity, ell: float, convention: str = "physical") -> TurningPair:
    """Turning pair whose half-orbit has length ``ell`` (large-amplitude root)."""
    if not ell > 0:
        raise ValueError(f"ell must be positive, got {ell!r}")
    rho_p = _length_fn(nl, convention)
    scan = _scan_down(nl, convention, ell)
    ps, rhos = scan.ps, scan.rhos
    below = [i for i in range(len(ps) - 1) if rhos[i] < ell]
    if below and below[-1] == len(ps) - 2:
        a, b = ps[-1], ps[-2]
    else:
        p_min, r_min = _minimum(nl, convention)
        if not r_min < ell:
            raise MinimalLengthError(ell, r_min, nl.branch)
        a, b = ps[-1], p_min
        if not a < b:
            raise TimeMapError("could not bracket the length equation")
    f = lambda p: rho_p(p) - ell
    try:
        p = bracketed_root(f, a, b, xtol=1e-13)
    except BracketError as exc:
        raise TimeMapError(f"length equation not bracketed: {exc}") from None
    pair = _pair_at(nl, p, convention)
    if abs(pair.length - ell) > 1e-9 * ell:
        raise TimeMapError(f"length residual {pair.length - ell!r} too large at ell={ell!r}")
    return pair


# --------------------------------------------------------------------------
# public time maps
# --------------------------------------------------------------------------


def rho(xi: float, mu: float, d: float, kappa: float, convention: str = "physical") -> float:
    """Length of the decreasing half-orbit from ``xi`` in ``(alpha, gamma)``."""
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch != "spike":
        raise ValueError(f"rho needs mu > mu_bar={nl.mu_bar!r}")
    if not nl.alpha < xi < nl.gamma:
        raise ValueError(f"xi={xi!r} outside (alpha, gamma)=({nl.alpha!r}, {nl.gamma!r})")
    lo = nl.eta(xi)
    if lo <= 0.0:
        raise TimeMapError("eta(xi) underflows; parametrise by eta instead")
    return TurningPair(nl, lo, nl.beta - xi, convention).length


def rho_tilde(omega: float, mu: float, d: float, kappa: float, convention: str = "physical") -> float:
    """Length of the increasing half-orbit from ``omega`` in ``(omega_*, alpha)``."""
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch == "spike":
        raise ValueError(f"rho_tilde needs mu <= mu_bar={nl.mu_bar!r}")
    if not nl.omega_star < omega < nl.alpha:
        raise ValueError(f"omega={omega!r} outside (omega_*, alpha)")
    gap = nl.beta - nl.chi(omega)
    return TurningPair(nl, omega, gap, convention).length


def _sin2_integrals(nl: Nonlinearity, lo: float, hi: float, order: int):
    x, w = roots_legendre(order)
    theta = 0.25 * np.pi * (x + 1.0)
    w = 0.25 * np.pi * w
    span = hi - lo
    sn, cs = np.sin(theta), np.cos(theta)
    z = lo + span * sn * sn
    # E - G(z) anchored at the nearer turning value
    drop = np.where(
        theta < 0.25 * np.pi,
        -nl.int_g(lo, span * sn * sn),
        nl.int_g(z, span * cs * cs),
    )
    f = 2.0 * span * sn * cs / np.sqrt(2.0 * drop)
    return float(f @ w), float((f * z) @ w), f


def rho_sin2(lo: float, hi: float, nl: Nonlinearity, convention: str = "physical",
             rtol: float = 1e-10, max_order: int = 4096) -> tuple[float, float]:
    """Time map and ``int u dx`` by ``z = lo + (hi - lo) sin^2 theta``.

    Gauss-Legendre order is doubled from 32 until successive values agree to
    ``rtol``. Suitable while the turning values stay well away from the
    equilibria; returns ``(length, integral_u)``.
    """
    order, prev = 32, None
    while order <= max_order:
        L, Z, _ = _sin2_integrals(nl, lo, hi, order)
        if prev is not None and abs(L - prev[0]) <= rtol * L and abs(Z - prev[1]) <= rtol * abs(Z):
            s = _length_scale(nl.d, convention)
            return s * L, s * Z
        prev = (L, Z)
        order *= 2
    raise TimeMapError(f"sin^2 quadrature did not converge by order {max_order}")


def solve_xi(mu: float, ell: float, d: float, kappa: float, convention: str = "physical") -> float:
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch != "spike":
        raise ValueError(f"solve_xi needs mu > mu_bar={nl.mu_bar!r}")
    return solve_pair(nl, ell, convention).hi


def solve_omega(mu: float, ell: float, d: float, kappa: float, convention: str = "physical") -> float:
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch == "spike":
        raise ValueError(f"solve_omega needs mu <= mu_bar={nl.mu_bar!r}")
    return solve_pair(nl, ell, convention).lo


# --------------------------------------------------------------------------
# profiles
# --------------------------------------------------------------------------


@dataclass
class ProfileSolution:
    xs: np.ndarray
    us: np.ndarray
    mu: float
    ell: float
    branch: str
    boundary: float
    endpoint: float
    d: float
    kappa: float
    pair: TurningPair | None = field(default=None, repr=False)

    @property
    def nl(self) -> Nonlinearity:
        return Nonlinearity(self.mu, self.d, self.kappa)

    @property
    def dx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def increasing(self) -> bool:
        return self.branch != "spike"

    def gradient(self, method: str = "spectral") -> np.ndarray:
        if method == "spectral":
            return gradient_spectral(self.us, self.ell)
        if method == "fd2":
            return gradient_fd2(self.us, self.dx)
        raise ValueError(f"unknown derivative method {method!r}")

    def energy(self, method: str = "spectral") -> np.ndarray:
        ux = self.gradient(method)
        return 0.5 * self.d * ux * ux + self.nl.G(self.us)

    def energy_spread(self, method: str = "spectral") -> float:
        """Spread of the first integral relative to the depth of the potential well."""
        e = self.energy(method)
        nl = self.nl
        depth = max(abs(nl.G(nl.alpha)), float(np.max(np.abs(nl.G(self.us)))))
        return float((e.max() - e.min()) / depth)

    def residual(self, method: str = "spectral") -> np.ndarray:
        """``d u'' + g(u; mu)`` on the sample grid."""
        if method == "spectral":
            lap = laplacian_spectral(self.us, self.ell)
        elif method == "fd2":
            lap = laplacian_fd2(self.us, self.dx)
        else:
            raise ValueError(f"unknown derivative method {method!r}")
        return self.d * lap + self.nl.g(self.us)

    def mean(self) -> float:
        return float(trapezoid_mean(self.us))

    def is_strictly_monotone(self) -> bool:
        diff = np.diff(self.us)
        return bool(np.all(diff > 0) if self.increasing else np.all(diff < 0))


def _profile_from_pair(pair: TurningPair, ell: float, n: int) -> ProfileSolution:
    if n < 16:
        raise ValueError(f"need n >= 16 samples, got {n}")
    nl = pair.nl
    branch = nl.branch
    inc = branch != "spike"
    _, us = pair.sample(n, increasing=inc)
    xs = np.linspace(0.0, ell, n)
    return ProfileSolution(
        xs=xs, us=us, mu=nl.mu, ell=ell, branch=branch, boundary=float(us[0]),
        endpoint=float(us[-1]), d=nl.d, kappa=nl.kappa, pair=pair,
    )


def profile_for_length(mu: float, ell: float, d: float, kappa: float, n: int = 2048,
                       convention: str = "physical") -> ProfileSolution:
    nl = Nonlinearity(mu, d, kappa)
    return _profile_from_pair(solve_pair(nl, ell, convention), ell, n)


def profile_from_boundary(boundary: float, mu: float, ell: float, d: float, kappa: float,
                          n: int = 2048, convention: str = "physical") -> ProfileSolution:
    """Profile whose value at ``x = 0`` is ``boundary`` (``xi`` or ``omega``).

    ``ell`` must be the corresponding time-map length; the sample grid spans
    ``[0, ell]`` and the turning values are placed at both ends.
    """
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch == "spike":
        pair = TurningPair(nl, nl.eta(boundary), nl.beta - boundary, convention)
    else:
        pair = TurningPair(nl, boundary, nl.beta - nl.chi(boundary), convention)
    if abs(pair.length - ell) > 1e-8 * ell:
        raise TimeMapError(f"boundary value gives length {pair.length!r}, not ell={ell!r}")
    return _profile_from_pair(pair, ell, n)


def mean_u(profile: ProfileSolution) -> float:
    """Trapezoid mean of the sampled profile."""
    return profile.mean()


def mean_u_integral(boundary: float, mu: float, ell: float, d: float, kappa: float,
                    convention: str = "physical") -> float:
    """``<u>`` by direct quadrature of ``int z dz / sqrt(2 (E - G))``."""
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch == "spike":
        pair = TurningPair(nl, nl.eta(boundary), nl.beta - boundary, convention)
    else:
        pair = TurningPair(nl, boundary, nl.beta - nl.chi(boundary), convention)
    return pair.integral_u / ell


def mean_u_sin2(boundary: float, mu: float, d: float, kappa: float,
                convention: str = "physical") -> tuple[float, float]:
    """``(length, <u>)`` by the ``sin^2`` substitution (moderate amplitudes only)."""
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch == "spike":
        lo, hi = nl.eta(boundary), boundary
    else:
        lo, hi = boundary, nl.chi(boundary)
    L, Z = rho_sin2(lo, hi, nl, convention)
    return L, Z / L


# --------------------------------------------------------------------------
# mass constraint
# --------------------------------------------------------------------------


@dataclass
class StationaryTriple:
    u: ProfileSolution
    v: np.ndarray
    w: np.ndarray
    M: float
    mu: float
    mean_u_quadrature: float
    roots_found: int = 1

    @property
    def mass_residual(self) -> float:
        """``M - mu - (1 - d) <u>`` with ``<u>`` from quadrature."""
        return self.M - self.mu - (1.0 - self.u.d) * self.mean_u_quadrature

    @property
    def discrete_mass(self) -> float:
        return float(trapezoid_mean(self.u.us) + trapezoid_mean(self.v))

    def residual(self, method: str = "spectral") -> tuple[np.ndarray, np.ndarray]:
        return stationary_residual(self.u.us, self.v, self.u.ell, self.u.d, self.u.kappa, method)


def stationary_residual(u: np.ndarray, v: np.ndarray, ell: float, d: float, kappa: float,
                        method: str = "spectral") -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the two-field stationary system with ``w = u`` substituted."""
    if method == "spectral":
        lu, lv = laplacian_spectral(u, ell), laplacian_spectral(v, ell)
    elif method == "fd2":
        dx = ell / (len(u) - 1)
        lu, lv = laplacian_fd2(u, dx), laplacian_fd2(v, dx)
    else:
        raise ValueError(f"unknown derivative method {method!r}")
    react = u * (u * v / (kappa * kappa * (u + 1.0)) - 1.0)
    return d * lu + react, lv - react


def _triple(pair: TurningPair, M: float, ell: float, n: int, roots: int) -> StationaryTriple:
    prof = _profile_from_pair(pair, ell, n)
    mu = pair.nl.mu
    v = mu - prof.d * prof.us
    if not np.all(v > 0):
        raise TimeMapError(f"v* = mu - d u* not positive (min {v.min()!r}); numerical failure")
    trip = StationaryTriple(prof, v, prof.us, M, mu, pair.integral_u / ell, roots)
    if abs(trip.mass_residual) > 1e-8 * max(1.0, M):
        raise TimeMapError(f"mass relation residual {trip.mass_residual!r} exceeds 1e-8")
    return trip


def _mass_scan(M: float, ell: float, d: float, kappa: float, eps_rel: float,
               per_decade: int, min_points: int):
    mb = mu_bar(d, kappa)
    top = M - mb
    pairs: dict[float, TurningPair] = {}

    def pair(delta: float) -> TurningPair:
        if delta not in pairs:
            pairs[delta] = solve_pair(Nonlinearity.near_threshold(delta, d, kappa), ell)
        return pairs[delta]

    def F(log_delta: float) -> float:
        delta = math.exp(log_delta)
        return (top - delta) / (1.0 - d) - pair(delta).mean

    lo = math.log(eps_rel * top)
    hi = math.log(top)
    npts = max(min_points, int(math.ceil((hi - lo) / math.log(10.0) * per_decade)) + 1)
    grid = np.linspace(lo, hi, npts)
    # the right end mu = M is replaced by a point just inside it
    grid[-1] = hi + math.log1p(-1e-9)
    vals = []
    for x in grid:
        try:
            vals.append((float(x), F(float(x))))
        except MinimalLengthError:
            continue
    changes = [
        (a, b, fa, fb)
        for (a, fa), (b, fb) in zip(vals[:-1], vals[1:])
        if (fa > 0) != (fb > 0) or fa == 0
    ]
    return changes, F, pairs


def mass_constraint_roots(M: float, ell: float, d: float, kappa: float, eps_rel: float = 1e-3,
                          per_decade: int = 4, min_points: int = 12) -> list[float]:
    """All parameters ``mu*`` (as offsets ``mu* - mu_bar``) seen by the scan."""
    changes, F, _ = _mass_scan(M, ell, d, kappa, eps_rel, per_decade, min_points)
    return [math.exp(bracketed_root(F, a, b, fa=fa, fb=fb, xtol=1e-14)) for a, b, fa, fb in changes]


def solve_mass_constraint(M: float, ell: float, d: float, kappa: float, n: int = 2048,
                          eps_rel: float = 1e-3, per_decade: int = 4, min_points: int = 12,
                          select: int | None = 0) -> StationaryTriple:
    """Spike-branch stationary triple with total mass ``M`` on ``[0, ell]``.

    Solves ``(M - mu)/(1 - d) = <u(.; mu, ell)>`` for ``mu`` in
    ``[mu_bar + eps_rel (M - mu_bar), M)``. The offset ``mu - mu_bar`` is
    scanned on a geometric grid (lengths below the branch minimum are
    skipped) and each sign change refined with Brent's method in
    ``log(mu - mu_bar)``. ``select`` picks a root by position from the left
    (the first by default); the number found is reported on the result.
    """
    if not 0 < d < 1:
        raise ValueError(f"need 0 < d < 1, got {d!r}")
    mb = mu_bar(d, kappa)
    if not M > mb:
        raise ValueError(f"spike branch needs M > mu_bar={mb!r}, got M={M!r}")
    changes, F, pairs = _mass_scan(M, ell, d, kappa, eps_rel, per_decade, min_points)
    if not changes:
        raise TimeMapError(
            f"no bracket for the mass constraint at M={M!r}, ell={ell!r}; "
            "ell may be below the admissible threshold"
        )
    a, b, fa, fb = changes[select]
    x = bracketed_root(F, a, b, fa=fa, fb=fb, xtol=1e-14)
    return _triple(pairs[math.exp(x)], M, ell, n, len(changes))


def solve_mass_constraint_increasing(M: float, ell: float, d: float, kappa: float,
                                     n: int = 2048, scan_points: int = 16,
                                     margin: float = 1e-6) -> StationaryTriple:
    """Best-effort mass-constrained triple on the increasing branch.

    Scans ``mu`` over ``(mu_c, mu_bar)`` at lengths the branch supports and
    refines the first sign change of ``(M - mu)/(1 - d) - <u>``.
    """
    if not 0 < d < 1:
        raise ValueError(f"need 0 < d < 1, got {d!r}")
    mc, mb = mu_critical(d, kappa), mu_bar(d, kappa)
    span = mb - mc
    pairs: dict[float, TurningPair] = {}

    def _pair(mu: float) -> TurningPair:
        if mu not in pairs:
            pairs[mu] = solve_pair(Nonlinearity(mu, d, kappa), ell)
        return pairs[mu]

    F = lambda mu: (M - mu) / (1.0 - d) - _pair(mu).mean
    grid = mc + span * np.linspace(margin, 1.0 - margin, scan_points)
    vals = []
    for mu in grid:
        try:
            vals.append((float(mu), F(float(mu))))
        except (MinimalLengthError, TimeMapError):
            continue
    changes = [
        (a, b, fa, fb)
        for (a, fa), (b, fb) in zip(vals[:-1], vals[1:])
        if (fa > 0) != (fb > 0) or fa == 0
    ]
    if not changes:
        raise TimeMapError(f"no bracket on the increasing branch at M={M!r}, ell={ell!r}")
    a, b, fa, fb = changes[0]
    mu_star = bracketed_root(F, a, b, fa=fa, fb=fb, xtol=1e-14)
    return _triple(_pair(mu_star), M, ell, n, len(changes))


# --------------------------------------------------------------------------
# whole-line limits
# --------------------------------------------------------------------------


def _chain_profile(nl: Nonlinearity, first: _Segment, second: _Segment, x_max: float,
                   n: int, convention: str) -> tuple[np.ndarray, np.ndarray]:
    """Samples on ``[0, x_max]`` walking ``first`` toward alpha then the tail ``second``."""
    scale = _length_scale(nl.d, convention)
    total = x_max / scale
    second.extend_until(total - first.total + 1.0)
    c = np.linspace(0.0, total, n)
    us = np.empty(n)
    m = c <= first.total
    us[m] = first.z(first.invert(c[m]))
    us[~m] = second.z(second.invert(c[~m] - first.total))
    return scale * c, us


def homoclinic_profile(mu: float, d: float, kappa: float, x_max: float, n: int = 2048,
                       convention: str = "physical") -> ProfileSolution:
    """Even homoclinic orbit on ``[0, x_max]`` with ``u_x(0) = 0``.

    For ``mu > mu_bar`` the orbit peaks at ``gamma`` and decays to 0; for
    ``mu_c < mu < mu_bar`` it dips to ``omega_*`` and rises to ``beta``.
    """
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch == "spike":
        first = _Segment.upper(nl, nl.beta - nl.gamma)
        second = _Segment(nl, "tail0", 0.0)
    elif nl.branch == "increasing":
        first = _Segment.lower(nl, nl.omega_star)
        second = _Segment(nl, "tailb", 0.0)
    else:
        raise ValueError("no homoclinic orbit at mu = mu_bar; use heteroclinic_profile")
    xs, us = _chain_profile(nl, first, second, x_max, n, convention)
    return ProfileSolution(xs, us, mu, x_max, nl.branch, float(us[0]), float(us[-1]), d, kappa)


def heteroclinic_profile(d: float, kappa: float, x_max: float, n: int = 2049,
                         convention: str = "physical") -> ProfileSolution:
    """Front from 0 to ``beta(mu_bar)`` on ``[-x_max, x_max]``, ``u(0) = alpha``."""
    nl = Nonlinearity(mu_bar(d, kappa), d, kappa)
    scale = _length_scale(d, convention)
    xs = np.linspace(-x_max, x_max, n)
    us = np.empty(n)
    left, right = xs < 0, xs >= 0
    tail0 = _Segment(nl, "tail0", 0.0)
    tailb = _Segment(nl, "tailb", 0.0)
    tail0.extend_until(x_max / scale + 1.0)
    tailb.extend_until(x_max / scale + 1.0)
    us[left] = tail0.z(tail0.invert(-xs[left] / scale))
    us[right] = tailb.z(tailb.invert(xs[right] / scale))
    return ProfileSolution(xs, us, nl.mu, 2 * x_max, "front", float(us[0]), float(us[-1]), d, kappa)


def mean_u_limit(mu: float, d: float, kappa: float) -> float:
    """Large-``ell`` limit of ``<u(.; mu, ell)>`` on each branch.

    ``0`` for spikes, ``beta(mu)`` below ``mu_bar`` and
    ``beta(mu_bar) / (1 + sqrt(h))`` on the front branch.
    """
    nl = Nonlinearity(mu, d, kappa)
    if nl.branch == "spike":
        return 0.0
    if nl.branch == "increasing":
        return nl.beta
    return nl.beta / (1.0 + math.sqrt(h_constant(d, kappa)))
