"""Linear stability of the constant equilibria.

Perturbations ``exp(lambda t) phi_j(x)`` with ``-phi_j'' = sigma_j phi_j``
(Neumann) reduce the linearised system to 3x3 mode matrices: ``A_j`` at
``(0, M, 0)`` and ``B_j`` at ``(u_pm, v_pm, u_pm)``. The eigenvalues of
``B_j`` are the roots of an explicit monic cubic, solved in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._roots import bracketed_root
from .equilibria import constant_equilibria, critical_mass

__all__ = [
    "LinearizationData",
    "DispersionPoint",
    "DispersionReport",
    "InstabilityClassification",
    "jacobian_at_equilibrium",
    "mode_matrix_A",
    "mode_matrix_B",
    "eig_A",
    "char_poly_B",
    "char_poly_of_matrix",
    "cubic_roots",
    "eig_B",
    "r_of_M",
    "r_at_critical",
    "M_star",
    "subsystem_classification",
    "dispersion_scan",
    "instability_extent",
]


def _equilibrium(which: str, M: float, kappa: float) -> tuple[float, float, float]:
    eqs = constant_equilibria(M, kappa)
    index = {"zero": 0, "plus": 1, "minus": 2}
    if which not in index:
        raise ValueError(f"which must be zero, plus or minus, got {which!r}")
    if which != "zero" and (M <= critical_mass(kappa) or len(eqs) < 3):
        raise ValueError(f"u_{which} needs M > M_c = {critical_mass(kappa)!r}, got M={M!r}")
    return eqs[index[which]]


def jacobian_at_equilibrium(which: str, M: float, kappa: float, tau: float) -> np.ndarray:
    """Reaction Jacobian of the ``(u, v, w)`` system at a constant equilibrium.

    At ``u_pm`` the identity ``u v = kappa^2 (1 + u)`` simplifies the
    ``(1, 1)`` entry to ``1``.
    """
    if which == "zero":
        _equilibrium(which, M, kappa)
        return np.array([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [tau, 0.0, -tau]])
    u, v, _ = _equilibrium(which, M, kappa)
    a0, b0 = u / v, u / (1.0 + u)
    return np.array([[1.0, a0, -b0], [-1.0, -a0, b0], [tau, 0.0, -tau]])


@dataclass(frozen=True)
class LinearizationData:
    alpha0: float
    beta0: float
    tau: float
    d: float
    eps: float
    M: float
    kappa: float
    u: float

    @classmethod
    def at(cls, M: float, kappa: float, tau: float, d: float, eps: float,
           which: str = "plus") -> "LinearizationData":
        u, v, _ = _equilibrium(which, M, kappa)
        if which == "zero":
            raise ValueError("LinearizationData describes u_+ or u_-")
        return cls(u / v, u / (1.0 + u), tau, d, eps, M, kappa, u)

    @property
    def uniform_coefficient(self) -> float:
        """``alpha0 - 1 + beta0 = (u^2 - kappa^2) / (kappa^2 (1 + u))``."""
        return self.alpha0 - 1.0 + self.beta0

    @property
    def trace_margin(self) -> float:
        """``alpha0 - 1 + tau``; equals ``r(M)`` at ``u_+``."""
        return self.alpha0 - 1.0 + self.tau

    @property
    def uniformly_stable(self) -> bool:
        return self.uniform_coefficient > 0 and self.trace_margin > 0


def mode_matrix_A(sigma: float, d: float, eps: float, tau: float) -> np.ndarray:
    return np.array(
        [[-d * sigma - 1.0, 0.0, 0.0], [1.0, -sigma, 0.0], [tau, 0.0, -eps * sigma - tau]]
    )


def mode_matrix_B(sigma: float, lin: LinearizationData) -> np.ndarray:
    a0, b0, tau = lin.alpha0, lin.beta0, lin.tau
    return np.array(
        [
            [-lin.d * sigma + 1.0, a0, -b0],
            [-1.0, -sigma - a0, b0],
            [tau, 0.0, -lin.eps * sigma - tau],
        ]
    )


def eig_A(sigma: float, d: float, eps: float, tau: float) -> np.ndarray:
    """Diagonal of the lower-triangular ``A_j``, sorted descending."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    return np.sort(np.array([-d * sigma - 1.0, -sigma, -eps * sigma - tau]))[::-1]


def char_poly_B(sigma: float, lin: LinearizationData) -> tuple[float, float, float]:
    """Coefficients ``(c2, c1, c0)`` of ``lambda^3 + c2 lambda^2 + c1 lambda + c0``."""
    a0, b0, tau, d, e = lin.alpha0, lin.beta0, lin.tau, lin.d, lin.eps
    s = sigma
    c2 = (d + 1.0 + e) * s - 1.0 + a0 + tau
    c1 = (d + e * d + e) * s * s + (-1.0 + d * a0 + tau * (d + 1.0) + e * (a0 - 1.0)) * s \
        + tau * (a0 - 1.0 + b0)
    c0 = (e * d * s * s + (tau * d + e * (-1.0 + d * a0)) * s + tau * (-1.0 + d * a0 + b0)) * s
    return c2, c1, c0


def char_poly_of_matrix(B: np.ndarray) -> tuple[float, float, float]:
    """Monic characteristic coefficients of a 3x3 matrix by cofactor expansion."""
    B = np.asarray(B, dtype=float)
    tr = B[0, 0] + B[1, 1] + B[2, 2]
    minors = (
        B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
        + B[0, 0] * B[2, 2] - B[0, 2] * B[2, 0]
        + B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1]
    )
    det = (
        B[0, 0] * (B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])
        - B[0, 1] * (B[1, 0] * B[2, 2] - B[1, 2] * B[2, 0])
        + B[0, 2] * (B[1, 0] * B[2, 1] - B[1, 1] * B[2, 0])
    )
    return -tr, minors, -det


def _polish(c2: float, c1: float, c0: float, x: float) -> float:
    # one Newton step on the real cubic, kept only if it helps
    f = ((x + c2) * x + c1) * x + c0
    df = (3 * x + 2 * c2) * x + c1
    if df == 0:
        return x
    y = x - f / df
    fy = ((y + c2) * y + c1) * y + c0
    return y if abs(fy) < abs(f) else x


def cubic_roots(c2: float, c1: float, c0: float, disc_tol: float = 1e-12) -> np.ndarray:
    """Roots of ``x^3 + c2 x^2 + c1 x + c0`` sorted by real part, descending.

    Trigonometric form for three real roots, Cardano otherwise; a
    discriminant within ``disc_tol`` of zero (relative to its terms) is
    handed to the companion-matrix eigenvalue solver.
    """
    shift = c2 / 3.0
    p = c1 - c2 * shift
    q = 2.0 * shift**3 - shift * c1 + c0
    disc = -(4.0 * p**3 + 27.0 * q * q)
    scale = max(4.0 * abs(p) ** 3, 27.0 * q * q)
    if scale == 0.0 or abs(disc) <= disc_tol * scale:
        roots = np.roots([1.0, c2, c1, c0]).astype(complex)
    elif disc > 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        ts = [m * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
        roots = np.array([_polish(c2, c1, c0, t - shift) for t in ts], dtype=complex)
    else:
        rad = math.sqrt(q * q / 4.0 + p**3 / 27.0)
        A = -math.copysign(1.0, q) * np.cbrt(abs(q) / 2.0 + rad)
        Bc = -p / (3.0 * A) if A != 0 else 0.0
        t1 = A + Bc
        re = -0.5 * t1 - shift
        im = 0.5 * math.sqrt(3.0) * abs(A - Bc)
        x1 = _polish(c2, c1, c0, t1 - shift)
        roots = np.array([x1, complex(re, im), complex(re, -im)])
    order = np.lexsort((-roots.imag, -roots.real))
    return roots[order]


def eig_B(sigma: float, lin: LinearizationData) -> np.ndarray:
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    return cubic_roots(*char_poly_B(sigma, lin))


# --------------------------------------------------------------------------
# uniform (sigma = 0) stability of u_+
# --------------------------------------------------------------------------


def r_of_M(M: float, kappa: float, tau: float) -> float:
    """``r(M) = u_+/v_+ - 1 + tau`` for ``M >= M_c``."""
    if M < critical_mass(kappa):
        raise ValueError(f"r(M) needs M >= M_c = {critical_mass(kappa)!r}")
    eqs = constant_equilibria(M, kappa)
    u, v, _ = eqs[1] if len(eqs) > 1 else (kappa, M - kappa, kappa)
    return u / v - 1.0 + tau


def r_at_critical(kappa: float, tau: float) -> float:
    """``r(M_c) = tau - kappa/(kappa + 1)``."""
    return tau - kappa / (kappa + 1.0)


def M_star(kappa: float, tau: float, xtol: float = 1e-14) -> float | None:
    """Zero of ``r`` above ``M_c`` (Hopf threshold), or ``None`` if ``r(M_c) >= 0``."""
    if r_at_critical(kappa, tau) >= 0:
        return None
    mc = critical_mass(kappa)
    f = lambda M: r_of_M(M, kappa, tau)
    hi = 2.0 * mc
    while f(hi) <= 0:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("could not bracket M_* (r stays negative)")
    return bracketed_root(f, mc, hi, fa=r_at_critical(kappa, tau), xtol=xtol)


# --------------------------------------------------------------------------
# Turing instability
# --------------------------------------------------------------------------


@dataclass
class InstabilityClassification:
    uniform_stable: bool
    kind: str
    crossing_sigma: float | None = None
    J2: float | None = None
    trace_J13: float | None = None
    det_J13: float | None = None


def subsystem_classification(lin: LinearizationData) -> InstabilityClassification:
    """Instability type predicted from the complementary subsystems of ``J(u_+)``.

    ``J2 = -u/v`` is stable; ``J13 = [[1, -u/(1+u)], [tau, -tau]]`` has
    negative determinant, so small diffusion destabilises (S); when its
    trace ``1 - tau`` is also positive a wave (W) instability appears too.
    """
    if not lin.uniformly_stable:
        raise ValueError("classification needs a uniformly stable equilibrium")
    tr = 1.0 - lin.tau
    det = -lin.tau / (1.0 + lin.u)
    kind = "S" if lin.tau >= 1.0 else "S-and-W"
    return InstabilityClassification(True, kind, None, -lin.alpha0, tr, det)


@dataclass
class DispersionPoint:
    sigma: float
    eigenvalues: np.ndarray

    @property
    def max_real(self) -> float:
        return float(self.eigenvalues.real.max())


@dataclass
class DispersionReport:
    points: list[DispersionPoint]
    uniform_stable: bool
    kind: str
    crossing_sigma: float | None
    crossing_complex: bool | None
    max_growth: float
    argmax_sigma: float
    modes: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([p.sigma for p in self.points])

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.eigenvalues for p in self.points])

    def summary(self) -> dict:
        return {
            "uniformStable": self.uniform_stable,
            "kind": self.kind,
            "crossingSigma": self.crossing_sigma,
            "maxGrowth": self.max_growth,
            "argmaxSigma": self.argmax_sigma,
        }


def _is_complex(lam: complex, tol_im: float) -> bool:
    return abs(lam.imag) > tol_im * (1.0 + abs(lam))


def dispersion_scan(lin: LinearizationData, sigma_max: float, n_sigma: int,
                    ell: float | None = None, tol_im: float = 1e-8,
                    growth_tol: float = 1e-12) -> DispersionReport:
    """Eigenvalues of ``B(sigma)`` on a uniform grid in ``[0, sigma_max]``.

    ``kind`` collects the unstable eigenvalue types seen at ``sigma > 0``:
    ``S`` for real, ``W`` for complex, ``S-and-W`` for both, ``none``
    otherwise. The first crossing of the leading real part is refined by
    bisection in ``sigma``.
    """
    if not sigma_max > 0 or n_sigma < 2:
        raise ValueError("need sigma_max > 0 and n_sigma >= 2")
    grid = np.linspace(0.0, sigma_max, n_sigma)
    points = [DispersionPoint(float(s), eig_B(float(s), lin)) for s in grid]
    maxre = np.array([p.max_real for p in points])
    lead0 = points[0].eigenvalues
    # sigma = 0 carries the neutral mass mode; the other two decide uniform stability
    rest0 = lead0[np.argsort(np.abs(lead0))][1:]
    uniform = bool(np.all(rest0.real < 0))

    kinds = set()
    for p in points[1:]:
        for lam in p.eigenvalues:
            if lam.real > growth_tol:
                kinds.add("W" if _is_complex(lam, tol_im) else "S")
    kind = {frozenset(): "none", frozenset({"S"}): "S", frozenset({"W"}): "W"}.get(
        frozenset(kinds), "S-and-W"
    )

    crossing = crossing_complex = None
    unstable = np.nonzero((maxre > growth_tol) & (grid > 0))[0]
    if unstable.size:
        k = unstable[0]
        lo, hi = grid[k - 1], grid[k]
        f = lambda s: eig_B(s, lin).real.max() - growth_tol
        if f(lo) < 0:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if f(mid) > 0:
                    hi = mid
                else:
                    lo = mid
        crossing = float(hi)
        crossing_complex = _is_complex(eig_B(crossing, lin)[0], tol_im)

    k = int(np.argmax(maxre))
    modes = []
    if ell is not None:
        j = 0
        while True:
            s = (j * math.pi / ell) ** 2
            if s > sigma_max:
                break
            modes.append((j, s, float(eig_B(s, lin).real.max())))
            j += 1
    return DispersionReport(points, uniform, kind, crossing, crossing_complex,
                            float(maxre[k]), float(grid[k]), modes)


def instability_extent(M: float, kappa: float, tau: float, d_values, eps_values,
                       sigma_max: float = 200.0, n_sigma: int = 2001) -> dict:
    """Map of Turing instability over a grid of diffusivities ``(d, eps)``.

    Reports the unstable set and the largest ``d`` and ``eps`` at which some
    ``sigma > 0`` mode still grows.
    """
    table = []
    for d in d_values:
        for e in eps_values:
            lin = LinearizationData.at(M, kappa, tau, float(d), float(e))
            rep = dispersion_scan(lin, sigma_max, n_sigma)
            table.append((float(d), float(e), rep.kind, rep.max_growth))
    unstable = [row for row in table if row[2] != "none"]
    return {
        "table": table,
        "max_unstable_d": max((r[0] for r in unstable), default=None),
        "max_unstable_eps": max((r[1] for r in unstable), default=None),
    }
