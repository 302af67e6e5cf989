"""Bracketed scalar root finding shared by the stationary-solution code."""
from __future__ import annotations

import math
from typing import Callable

from scipy.optimize import brentq

XTOL = 1e-13
RTOL = 4 * 2.220446049250313e-16


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


def bracketed_root(
    f: Callable[[float], float],
    a: float,
    b: float,
    fa: float | None = None,
    fb: float | None = None,
    xtol: float = XTOL,
    rtol: float = RTOL,
    maxiter: int = 400,
) -> float:
    """Root of ``f`` in ``[a, b]`` given a sign change at the endpoints.

    Brent's bisection/secant/inverse-quadratic hybrid; convergence is
    unconditional once the bracket is verified. Endpoint zeros are returned
    directly.
    """
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    if not (math.isfinite(fa) and math.isfinite(fb)):
        raise BracketError(f"non-finite endpoint value f({a})={fa}, f({b})={fb}")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a!r}, {b!r}]: f={fa!r}, {fb!r}")
    return brentq(f, a, b, xtol=xtol, rtol=rtol, maxiter=maxiter)
