"""Model parameters and the change of variables between (N, S, I) and (u, v, w).

The physical system is parametrised by rates ``k_N > k_I``, diffusivities
``D_N`` and ``D_I``, the mean mass density ``A`` and the interval length
``L``. Scaling ``u = kappa*N``, ``v = kappa*S``, ``w = I`` with
``kappa = k_N/k_I`` gives the reduced parameters
``(kappa, tau, d, eps, M, ell) = (k_N/k_I, k_I, D_N, D_I, kappa*A, L)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

__all__ = [
    "ParameterError",
    "PhysicalParams",
    "ReducedParams",
    "to_reduced",
    "to_physical",
    "read_config",
    "PHYSICAL_KEYS",
    "REDUCED_KEYS",
]

PHYSICAL_KEYS = ("k_N", "k_I", "D_N", "D_I", "A", "L")
REDUCED_KEYS = ("kappa", "tau", "d", "eps", "M", "ell")


class ParameterError(ValueError):
    """Raised for parameter sets outside the model's admissible range."""


def _require_finite(obj) -> None:
    for f in fields(obj):
        val = getattr(obj, f.name)
        if not math.isfinite(val):
            raise ParameterError(f"{f.name} must be finite, got {val!r}")


@dataclass(frozen=True)
class PhysicalParams:
    k_N: float
    k_I: float
    D_N: float
    D_I: float
    A: float
    L: float

    def __post_init__(self):
        _require_finite(self)
        for name in ("k_N", "k_I", "D_N", "A", "L"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.D_I < 0:
            raise ParameterError(f"D_I must be nonnegative, got {self.D_I!r}")
        if self.k_I >= self.k_N:
            raise ParameterError(f"need k_I < k_N, got k_I={self.k_I!r}, k_N={self.k_N!r}")
        if not (self.D_I <= self.D_N < 1):
            warnings.warn(
                f"diffusivities outside 0 <= D_I <= D_N < 1 (D_I={self.D_I}, D_N={self.D_N})",
                stacklevel=3,
            )

    @property
    def kappa(self) -> float:
        return self.k_N / self.k_I

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in PHYSICAL_KEYS}


@dataclass(frozen=True)
class ReducedParams:
    kappa: float
    tau: float
    d: float
    eps: float
    M: float
    ell: float

    def __post_init__(self):
        _require_finite(self)
        if self.kappa <= 1:
            raise ParameterError(f"kappa must exceed 1, got {self.kappa!r}")
        for name in ("tau", "d", "ell"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.eps < 0:
            raise ParameterError(f"eps must be nonnegative, got {self.eps!r}")
        if self.M < 0:
            raise ParameterError(f"M must be nonnegative, got {self.M!r}")

    def require_subunit_d(self) -> None:
        """Stationary theory needs 0 < d < 1."""
        if not 0 < self.d < 1:
            raise ParameterError(f"stationary construction needs 0 < d < 1, got d={self.d!r}")

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in REDUCED_KEYS}


def to_reduced(p: PhysicalParams) -> ReducedParams:
    kappa = p.k_N / p.k_I
    return ReducedParams(kappa=kappa, tau=p.k_I, d=p.D_N, eps=p.D_I, M=kappa * p.A, ell=p.L)


def to_physical(r: ReducedParams) -> PhysicalParams:
    """Inverse of :func:`to_reduced`; ``k_N = kappa*tau`` and ``A = M/kappa``."""
    return PhysicalParams(
        k_N=r.kappa * r.tau, k_I=r.tau, D_N=r.d, D_I=r.eps, A=r.M / r.kappa, L=r.ell
    )


def read_config(source: str | Path | Mapping[str, str]) -> dict[str, float]:
    """Parse a flat ``key=value`` config (blank lines and ``#`` comments allowed).

    Only the physical or reduced parameter keys are accepted; anything else is
    rejected so that typos do not silently fall back to defaults.
    """
    if isinstance(source, Mapping):
        items = list(source.items())
    else:
        items = []
        for lineno, raw in enumerate(Path(source).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{source}:{lineno}: expected key=value, got {raw!r}")
            key, val = line.split("=", 1)
            items.append((key.strip(), val.strip()))
    allowed = set(PHYSICAL_KEYS) | set(REDUCED_KEYS)
    out: dict[str, float] = {}
    for key, val in items:
        if key not in allowed:
            raise ParameterError(f"unknown parameter key {key!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise ParameterError(f"{key}: not a number: {val!r}") from None
    return out
