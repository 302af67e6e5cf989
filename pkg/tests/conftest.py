from __future__ import annotations

import pytest

from mcrd.equilibria import mu_bar
from mcrd.timemap import solve_mass_constraint

# oracle values computed independently with mpmath at 40 digits
# (tanh-sinh quadrature of g, findroot for thresholds and turning values)
ORACLE = {
    "mu_bar(0.1,2)": 5.403397229733032434,
    "mu_bar(0.1,20/3)": 49.206808790598241998,
    "mu_bar(0.01,2)": 4.4514993857681113139,
    "mu_bar(0.01,2.5)": 6.8159042704570243809,
    "gamma(mu_bar+1)": 3.0723535682886252207,
    "eta(xi_mid)": 1.1144530986270304125,
    "rho(xi_mid)": 1.767805191037908589,
    "mu_mid": 5.3341541469001920642,
    "omega_star(mu_mid)": 2.2806219673937133825,
    "chi(omega_mid)": 5.8911935741472665857,
    "rho_tilde(omega_mid)": 3.4939011989533887588,
    "h(0.1,2)": 0.13822609581353106415,
    "beta(mu_bar)": 10.056409549667191291,
}


@pytest.fixture(scope="session")
def base_triple():
    """Spike triple at d=0.1, kappa=2, M=mu_bar+2, ell=100, n=2048."""
    return solve_mass_constraint(mu_bar(0.1, 2.0) + 2.0, 100.0, 0.1, 2.0, n=2048)


@pytest.fixture(scope="session")
def short_triple():
    """Smaller spike triple for assembly tests."""
    return solve_mass_constraint(mu_bar(0.1, 2.0) + 2.0, 25.0, 0.1, 2.0, n=512)


# --------------------------------------------------------------------------
# acceptance report: one line per criterion, repeated in the terminal summary
# --------------------------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, title: str, passed: bool, detail: str, seconds: float) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail} ({seconds:.1f} s)"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
