"""Multi-mode equilibria assembled from one monotone stationary triple.

A monotone solution on ``[0, ell]`` with Neumann ends can be reflected and
concatenated. Writing ``R`` for the reversed base ``u*(ell - x)``:

* ``Lambda_1 = R | base`` and ``V_1 = base | R`` on ``[0, 2 ell]``;
* ``U_1 = base | Lambda_1`` and ``N_1 = R | V_1`` on ``[0, 3 ell]``;
* ``Lambda_j``, ``V_j`` append ``Lambda_1``, ``V_1`` to the ``j - 1`` pattern
  (length ``2 j ell``); ``U_j``, ``N_j`` append ``Lambda_1``, ``V_1`` to
  theirs (length ``(2 j + 1) ell``).

All pieces share the base grid spacing, so reflections are exact sample
permutations and every pattern has the same trapezoid means as the base.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discrete import laplacian_fd2, laplacian_spectral, trapezoid_mean
from .equilibria import g_eval
from .timemap import StationaryTriple, solve_mass_constraint

__all__ = ["MultiModeSolution", "PATTERNS", "assemble", "partition_for_mass", "assemble_for_length"]

PATTERNS = ("Lambda", "V", "U", "N")


@dataclass
class MultiModeSolution:
    base: StationaryTriple
    pattern: str
    j: int
    total_length: float
    xs: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    ws: np.ndarray

    def means(self) -> tuple[float, float, float]:
        return tuple(float(trapezoid_mean(a)) for a in (self.us, self.vs, self.ws))

    def residual(self, method: str = "fd2") -> np.ndarray:
        """``d u'' + g(u; mu*)`` on the assembled grid."""
        b = self.base.u
        if method == "fd2":
            lap = laplacian_fd2(self.us, b.dx)
        elif method == "spectral":
            lap = laplacian_spectral(self.us, self.total_length)
        else:
            raise ValueError(f"unknown derivative method {method!r}")
        return b.d * lap + g_eval(self.us, b.mu, b.d, b.kappa)

    def segment(self, k: int) -> np.ndarray:
        """Samples of ``u`` on the ``k``-th segment ``[k ell, (k+1) ell]``."""
        m = len(self.base.u.us) - 1
        return self.us[k * m: (k + 1) * m + 1]


def _join(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # consecutive pieces share the junction sample
    return np.concatenate([a, b[1:]])


def _pattern_field(f: np.ndarray, pattern: str, j: int) -> np.ndarray:
    r = f[::-1]
    lam1 = _join(r, f)
    v1 = _join(f, r)
    if pattern == "Lambda":
        out, piece = lam1, lam1
    elif pattern == "V":
        out, piece = v1, v1
    elif pattern == "U":
        out, piece = _join(f, lam1), lam1
    else:
        out, piece = _join(r, v1), v1
    for _ in range(j - 1):
        out = _join(out, piece)
    return out


def assemble(base: StationaryTriple, pattern: str, j: int) -> MultiModeSolution:
    if pattern not in PATTERNS:
        raise ValueError(f"pattern must be one of {PATTERNS}, got {pattern!r}")
    if not (isinstance(j, (int, np.integer)) and j >= 1):
        raise ValueError(f"j must be an integer >= 1, got {j!r}")
    ell = base.u.ell
    segments = 2 * j if pattern in ("Lambda", "V") else 2 * j + 1
    total = segments * ell
    us = _pattern_field(base.u.us, pattern, j)
    vs = _pattern_field(base.v, pattern, j)
    ws = _pattern_field(base.w, pattern, j)
    xs = np.linspace(0.0, total, len(us))
    return MultiModeSolution(base, pattern, int(j), total, xs, us, vs, ws)


def partition_for_mass(ell_total: float, ell_M: float) -> list[tuple[str, int, float]]:
    """Patterns ``(name, j, segment length)`` filling ``ell_total``.

    With ``n_M = floor(ell_total / ell_M) = 2k``: ``Lambda_j`` and ``V_j``
    for ``j <= k`` at ``ell_total/(2k)``, ``U_j`` and ``N_j`` for
    ``j <= k - 1`` at ``ell_total/(2k - 1)``. For ``n_M = 2k + 1`` the second
    family runs to ``j <= k`` at ``ell_total/(2k + 1)``.
    """
    if not (ell_total > 0 and ell_M > 0):
        raise ValueError("lengths must be positive")
    n_M = math.floor(ell_total / ell_M)
    if n_M < 2:
        raise ValueError(f"need floor(ell_total/ell_M) >= 2, got {n_M}")
    k = n_M // 2
    seg_even = ell_total / (2 * k)
    if n_M % 2 == 0:
        j_odd, seg_odd = k - 1, ell_total / (2 * k - 1)
    else:
        j_odd, seg_odd = k, ell_total / (2 * k + 1)
    out = []
    for j in range(1, k + 1):
        out += [("Lambda", j, seg_even), ("V", j, seg_even)]
    for j in range(1, j_odd + 1):
        out += [("U", j, seg_odd), ("N", j, seg_odd)]
    return out


def assemble_for_length(M: float, segment_length: float, d: float, kappa: float,
                        pattern: str, j: int, n: int = 1024, **solver_kw) -> MultiModeSolution:
    """Solve the base triple at ``segment_length`` and assemble the pattern."""
    base = solve_mass_constraint(M, segment_length, d, kappa, n=n, **solver_kw)
    return assemble(base, pattern, j)
