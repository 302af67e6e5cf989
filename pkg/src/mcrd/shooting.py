"""Direct initial-value integration of ``d u'' + g(u; mu) = 0``.

Used as an independent check of the time map: start at a turning value with
``u' = 0``, integrate with classical RK4 at a fixed step and report the
position where ``u'`` next vanishes. Several starting values are advanced
together as one vectorised system.
"""
from __future__ import annotations

import numpy as np


def _hermite_root(h, p0, p1, dp0, dp1):
    """Root in ``[0, h]`` of the cubic Hermite interpolant of ``p``."""
    lo = np.zeros_like(p0)
    hi = np.full_like(p0, h)

    def p_at(t):
        s = t / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * p0 + h10 * h * dp0 + h01 * p1 + h11 * h * dp1

    sign0 = np.sign(p0)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        same = np.sign(p_at(mid)) == sign0
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def shoot_half_period(start, mu, d: float, kappa: float, step: float = 1e-5,
                      max_length: float = 1e3) -> np.ndarray:
    """Distance from a turning value ``start`` to the next turning value.

    ``start`` and ``mu`` broadcast together; each entry is integrated until
    ``u'`` changes sign, and the crossing is located on the cubic Hermite
    interpolant of ``u'`` over the last step.
    """
    start, mu = np.broadcast_arrays(np.asarray(start, float), np.asarray(mu, float))
    u = start.astype(float).ravel().copy()
    mu = mu.ravel()
    p = np.zeros_like(u)

    if np.any(u <= -1):
        raise ValueError("starting values must exceed -1")
    k2 = kappa * kappa

    def acc(uu, m):
        return -uu * (uu * (m - d * uu) / (k2 * (uu + 1.0)) - 1.0) / d

    direction = np.sign(acc(u, mu))
    out = np.full(u.shape, np.nan)
    active = np.ones(u.shape, dtype=bool)
    h = step
    nmax = int(max_length / h)
    for i in range(nmax):
        x = i * h
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        uu, pp, m = u[idx], p[idx], mu[idx]
        k1u, k1p = pp, acc(uu, m)
        k2u, k2p = pp + 0.5 * h * k1p, acc(uu + 0.5 * h * k1u, m)
        k3u, k3p = pp + 0.5 * h * k2p, acc(uu + 0.5 * h * k2u, m)
        k4u, k4p = pp + h * k3p, acc(uu + h * k3u, m)
        un = uu + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        pn = pp + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        crossed = (x > 0) & (np.sign(pn) != direction[idx]) & (pn != 0)
        if np.any(crossed):
            c = idx[crossed]
            t = _hermite_root(h, pp[crossed], pn[crossed], k1p[crossed], acc(un[crossed], m[crossed]))
            out[c] = x + t
            active[c] = False
        u[idx], p[idx] = un, pn
    if np.any(active):
        raise RuntimeError(f"no return of u' to zero within length {max_length}")
    return out.reshape(start.shape)
