"""Stationary solutions, linear stability and simulation of a mass-conserved
three-component reaction-diffusion model on an interval.

Submodules are imported on first attribute access so that the command-line
entry point can set thread limits before numpy loads.
"""
from __future__ import annotations

import importlib

__version__ = "0.1.0"

_SUBMODULES = ("params", "equilibria", "stability", "timemap", "multimode", "pdesim",
               "shooting", "discrete", "cli", "selftest")

_EXPORTS = {
    "PhysicalParams": "params", "ReducedParams": "params", "ParameterError": "params",
    "to_reduced": "params", "to_physical": "params", "read_config": "params",
    "Nonlinearity": "equilibria", "constant_equilibria": "equilibria",
    "critical_mass": "equilibria", "mu_bar": "equilibria", "mu_critical": "equilibria",
    "LinearizationData": "stability", "dispersion_scan": "stability",
    "rho": "timemap", "rho_tilde": "timemap", "solve_mass_constraint": "timemap",
    "profile_for_length": "timemap", "StationaryTriple": "timemap",
    "assemble": "multimode", "partition_for_mass": "multimode",
    "simulate": "pdesim", "Grid1D": "pdesim", "SimConfig": "pdesim",
}

__all__ = ["__version__", *_SUBMODULES, *_EXPORTS]


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    if name in _EXPORTS:
        return getattr(importlib.import_module(f".{_EXPORTS[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
