"""Quick oracle-equivalence checks run by ``mcrd selftest``.

Each check compares two independent routes to the same quantity and
returns ``(name, passed, detail)``. The whole suite runs in a few seconds.
"""
from __future__ import annotations

import math

import numpy as np


def _check_equilibria():
    from .equilibria import constant_equilibria

    _, plus, minus = constant_equilibria(10.0, 2.0)
    err = max(abs(plus[0] - (3 + math.sqrt(5))), abs(minus[0] - (3 - math.sqrt(5))))
    return "constant equilibria closed form", err < 1e-12, f"max error {err:.2e}"


def _check_char_poly():
    from .stability import LinearizationData, char_poly_B, char_poly_of_matrix, mode_matrix_B

    worst = 0.0
    for M in (12.0, 22.0, 40.0):
        lin = LinearizationData.at(M, 2.5, 0.8, 0.01, 0.001)
        for s in (0.0, 0.5, 3.0, 20.0):
            a, b = np.array(char_poly_B(s, lin)), np.array(char_poly_of_matrix(mode_matrix_B(s, lin)))
            scale = 1.0 + np.abs(b)
            worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    return "cubic coefficients vs cofactor expansion", worst < 1e-10, f"max rel {worst:.2e}"


def _check_cubic():
    from .stability import cubic_roots

    rng = np.random.default_rng(7)
    worst = 0.0
    for c in rng.normal(size=(50, 3)):
        mine = np.sort_complex(cubic_roots(*c))
        ref = np.sort_complex(np.roots([1.0, *c]))
        worst = max(worst, float(np.max(np.abs(mine - ref)) / (1 + np.max(np.abs(ref)))))
    return "closed-form cubic vs companion eigenvalues", worst < 1e-8, f"max rel {worst:.2e}"


def _check_timemap():
    from .equilibria import Nonlinearity
    from .shooting import shoot_half_period
    from .timemap import rho

    nl = Nonlinearity(6.0, 0.1, 2.0)
    xi = 0.5 * (nl.alpha + nl.gamma)
    a = rho(xi, nl.mu, nl.d, nl.kappa)
    b = float(shoot_half_period(xi, nl.mu, nl.d, nl.kappa, step=2e-4))
    rel = abs(a - b) / a
    return "time map vs shooting", rel < 1e-6, f"rel {rel:.2e} (length {a:.6f})"


def _check_means():
    from .timemap import mean_u_integral, profile_for_length

    p = profile_for_length(6.0, 5.0, 0.1, 2.0, n=2049)
    q = mean_u_integral(p.boundary, p.mu, p.ell, p.d, p.kappa)
    rel = abs(p.mean() - q) / abs(q)
    return "trapezoid mean vs quadrature mean", rel < 1e-8, f"rel {rel:.2e}"


def _check_potential():
    from .equilibria import Nonlinearity

    nl = Nonlinearity(6.0, 0.1, 2.0)
    u = np.linspace(0.1, 9.0, 20)
    h = 1e-5
    fd = (nl.G(u + h) - nl.G(u - h)) / (2 * h)
    rel = float(np.max(np.abs(fd - nl.g(u)) / (1 + np.abs(nl.g(u)))))
    return "dG/du vs g", rel < 1e-6, f"max rel {rel:.2e}"


def _check_multimode():
    from .discrete import trapezoid_mean
    from .equilibria import mu_bar
    from .multimode import assemble
    from .timemap import solve_mass_constraint

    base = solve_mass_constraint(mu_bar(0.1, 2.0) + 2.0, 20.0, 0.1, 2.0, n=257)
    ref = [trapezoid_mean(a) for a in (base.u.us, base.v, base.w)]
    worst = 0.0
    for pattern in ("Lambda", "V", "U", "N"):
        m = assemble(base, pattern, 2)
        worst = max(worst, max(abs(x - y) for x, y in zip(m.means(), ref)))
    return "multimode means", worst < 1e-12, f"max diff {worst:.2e}"


CHECKS = (_check_equilibria, _check_char_poly, _check_cubic, _check_timemap, _check_means,
          _check_potential, _check_multimode)


def run_selftest() -> list[tuple[str, bool, str]]:
    results = []
    for check in CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # a crash is a failed check, reported not raised
            results.append((check.__name__.removeprefix("_check_"), False, f"{type(exc).__name__}: {exc}"))
    return results
