"""Method-of-lines simulation on ``[0, L]`` with Neumann boundaries.

The grid is vertex centred (``n`` points, ``dx = L/(n-1)``) with reflective
ghost values, and means use the trapezoid rule. With these choices the
discrete Laplacian annihilates the trapezoid mean, so the semi-discrete
system conserves ``<N + S>`` exactly; the ``imex-cn`` step keeps this up to
rounding because each Crank-Nicolson solve preserves the mean as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .discrete import laplacian_fd2, trapezoid_mean
from .params import PhysicalParams, ReducedParams
from .equilibria import constant_equilibria

__all__ = [
    "Grid1D",
    "SimConfig",
    "SimState",
    "Trajectory",
    "SimulationDiverged",
    "ThreeComponentModel",
    "AuxModel",
    "ReducedModel",
    "step",
    "simulate",
    "simulate_three",
    "simulate_aux",
    "step_initial",
    "uniform_perturbed_initial",
    "crossvalidate",
    "default_dt",
]

NEG_TOL = 1e-12
BLOWUP = 1e12


class SimulationDiverged(ArithmeticError):
    """A field became non-finite or exceeded the blow-up threshold."""


@dataclass(frozen=True)
class Grid1D:
    n: int
    L: float

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs n >= 16 points, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")

    @property
    def dx(self) -> float:
        return self.L / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n)


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ThreeComponentModel:
    """Physical ``(N, S, I)`` system."""

    params: PhysicalParams
    names: tuple[str, ...] = ("N", "S", "I")
    conserved: tuple[int, ...] = (0, 1)

    @property
    def diffusivities(self) -> tuple[float, ...]:
        return (self.params.D_N, 1.0, self.params.D_I)

    def reaction(self, y: np.ndarray) -> np.ndarray:
        N, S, I = y
        p = self.params
        f = N * N * S / (1.0 + I) - N
        return np.stack([f, -f, p.k_N * N - p.k_I * I])


@dataclass(frozen=True)
class AuxModel:
    """Two-component ``(N, S)`` system with the inhibitor slaved to ``(k_N/k_I) N``."""

    params: PhysicalParams
    names: tuple[str, ...] = ("N", "S")
    conserved: tuple[int, ...] = (0, 1)

    @property
    def diffusivities(self) -> tuple[float, ...]:
        return (self.params.D_N, 1.0)

    def reaction(self, y: np.ndarray) -> np.ndarray:
        N, S = y
        f = N * N * S / (1.0 + self.params.kappa * N) - N
        return np.stack([f, -f])


@dataclass(frozen=True)
class ReducedModel:
    """Scaled ``(u, v, w)`` system."""

    params: ReducedParams
    names: tuple[str, ...] = ("u", "v", "w")
    conserved: tuple[int, ...] = (0, 1)

    @property
    def diffusivities(self) -> tuple[float, ...]:
        return (self.params.d, 1.0, self.params.eps)

    def reaction(self, y: np.ndarray) -> np.ndarray:
        u, v, w = y
        k2 = self.params.kappa ** 2
        f = u * u * v / (k2 * (1.0 + w)) - u
        return np.stack([f, -f, self.params.tau * (u - w)])


# --------------------------------------------------------------------------
# state and stepping
# --------------------------------------------------------------------------


def default_dt(grid: Grid1D, diffusivities) -> float:
    return min(0.1, 0.4 * grid.dx**2 / max(max(diffusivities), 1.0))


@dataclass
class SimConfig:
    dt: float | None = None
    t_end: float = 10.0
    scheme: str = "imex-cn"
    output_every: float = 1.0
    steady_tol: float = 1e-8
    steady_count: int = 10
    snapshots: tuple[float, ...] = ()
    stop_when_steady: bool = True

    def __post_init__(self):
        if self.scheme not in ("imex-cn", "explicit-rk4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end!r}")


@dataclass
class SimState:
    t: float
    fields: np.ndarray
    mass_history: list[tuple[float, float]] = field(default_factory=list)
    clamp_count: int = 0


class _Stepper:
    """Per-(model, grid, dt) data for repeated steps."""

    def __init__(self, model, grid: Grid1D, dt: float, scheme: str):
        self.model, self.grid, self.dt, self.scheme = model, grid, dt, scheme
        diffs = model.diffusivities
        if scheme == "explicit-rk4":
            limit = 0.4 * grid.dx**2 / max(max(diffs), 1e-300)
            if dt > limit * (1 + 1e-12):
                raise ValueError(f"explicit scheme needs dt <= {limit!r}, got {dt!r}")
        n, h2 = grid.n, grid.dx**2
        self.bands = []
        for D in diffs:
            a = 0.5 * dt * D / h2
            ab = np.zeros((3, n))
            ab[1] = 1.0 + 2.0 * a
            ab[0, 1:] = -a
            ab[0, 1] = -2.0 * a
            ab[2, :-1] = -a
            ab[2, -2] = -2.0 * a
            self.bands.append(ab)

    def _lap(self, y: np.ndarray) -> np.ndarray:
        return np.stack([laplacian_fd2(f, self.grid.dx) for f in y])

    def _cn(self, y: np.ndarray, rhs_extra: np.ndarray) -> np.ndarray:
        dt = self.dt
        out = np.empty_like(y)
        lap = self._lap(y)
        for i, D in enumerate(self.model.diffusivities):
            rhs = y[i] + 0.5 * dt * D * lap[i] + rhs_extra[i]
            out[i] = rhs if D == 0 else solve_banded((1, 1), self.bands[i], rhs)
        return out

    def __call__(self, y: np.ndarray) -> np.ndarray:
        dt, model = self.dt, self.model
        if self.scheme == "imex-cn":
            r0 = model.reaction(y)
            pred = self._cn(y, dt * r0)
            return self._cn(y, 0.5 * dt * (r0 + model.reaction(pred)))
        D = np.array(model.diffusivities)[:, None]
        rhs = lambda z: D * self._lap(z) + model.reaction(z)
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _conserved_mean(model, y: np.ndarray) -> float:
    return float(sum(trapezoid_mean(y[i]) for i in model.conserved))


def _check(y: np.ndarray, t: float, model) -> None:
    bad = ~np.isfinite(y) | (np.abs(y) > BLOWUP)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise SimulationDiverged(
            f"field {model.names[i]} diverged at t={t!r}, grid index {j}: value {y[i, j]!r}"
        )


def _clamp(y: np.ndarray, model) -> int:
    # concentrations of the conserved species are monitored for negativity
    idx = list(model.conserved)
    neg = y[idx] < -NEG_TOL
    count = int(neg.sum())
    if count:
        sub = y[idx]
        sub[neg] = 0.0
        y[idx] = sub
    return count


def step(state: SimState, config: SimConfig, model, grid: Grid1D) -> SimState:
    """Advance one time step (returns a new state)."""
    dt = config.dt if config.dt is not None else default_dt(grid, model.diffusivities)
    y = _Stepper(model, grid, dt, config.scheme)(state.fields)
    _check(y, state.t + dt, model)
    clamps = _clamp(y, model)
    return SimState(state.t + dt, y, list(state.mass_history), state.clamp_count + clamps)


@dataclass
class Trajectory:
    model_names: tuple[str, ...]
    x: np.ndarray
    times: np.ndarray
    mass: np.ndarray
    snapshots: dict[float, np.ndarray]
    final: SimState
    steady: bool
    dt: float
    rate_history: list[tuple[float, float]] = field(default_factory=list)

    @property
    def mass_drift(self) -> float:
        m0 = self.mass[0]
        return float(np.max(np.abs(self.mass - m0)) / abs(m0)) if m0 != 0 else float(np.max(np.abs(self.mass)))

    def field(self, name: str) -> np.ndarray:
        return self.final.fields[self.model_names.index(name)]


def simulate(model, init: np.ndarray, grid: Grid1D, config: SimConfig) -> Trajectory:
    """Integrate from ``init`` (shape ``(fields, n)``) up to ``config.t_end``.

    The step is ``t_end / ceil(t_end / dt)``, never larger than requested.
    The conserved mean is recorded after every step; snapshots are stored
    at the first step reaching each requested time. Every ``output_every``
    time units the rate ``max |y_t|`` over the last step is compared with
    ``steady_tol``; ``steady_count`` consecutive hits end the run early.
    """
    y = np.array(init, dtype=float, copy=True)
    if y.shape != (len(model.names), grid.n):
        raise ValueError(f"initial data must have shape {(len(model.names), grid.n)}, got {y.shape}")
    _check(y, 0.0, model)
    dt = config.dt if config.dt is not None else default_dt(grid, model.diffusivities)
    nsteps = int(math.ceil(config.t_end / dt - 1e-9))
    if nsteps > 0:
        # shrink dt slightly so that the last step lands on t_end
        dt = config.t_end / nsteps
    stepper = _Stepper(model, grid, dt, config.scheme)
    out_stride = max(1, int(round(config.output_every / dt)))
    pending = sorted(config.snapshots)
    snaps: dict[float, np.ndarray] = {}
    times, mass = [0.0], [_conserved_mean(model, y)]
    rates: list[tuple[float, float]] = []
    while pending and pending[0] <= 0.0:
        snaps[pending.pop(0)] = y.copy()
    clamps, hits, steady = 0, 0, False
    t = 0.0
    for k in range(1, nsteps + 1):
        y_new = stepper(y)
        t = k * dt
        _check(y_new, t, model)
        clamps += _clamp(y_new, model)
        if k % out_stride == 0:
            rate = float(np.max(np.abs(y_new - y))) / dt
            rates.append((t, rate))
            hits = hits + 1 if rate < config.steady_tol else 0
        y = y_new
        times.append(t)
        mass.append(_conserved_mean(model, y))
        while pending and pending[0] <= t + 1e-9 * dt:
            snaps[pending.pop(0)] = y.copy()
        if hits >= config.steady_count:
            steady = True
            if config.stop_when_steady:
                break
    state = SimState(t, y, list(zip(times, mass)), clamps)
    return Trajectory(tuple(model.names), grid.x, np.array(times), np.array(mass), snaps,
                      state, steady, dt, rates)


def simulate_three(params: PhysicalParams, init: np.ndarray, grid: Grid1D,
                   config: SimConfig) -> Trajectory:
    return simulate(ThreeComponentModel(params), init, grid, config)


def simulate_aux(params: PhysicalParams, init: np.ndarray, grid: Grid1D,
                 config: SimConfig) -> Trajectory:
    return simulate(AuxModel(params), init, grid, config)


# --------------------------------------------------------------------------
# initial data
# --------------------------------------------------------------------------


def step_initial(params: PhysicalParams, grid: Grid1D) -> np.ndarray:
    """``N = 2A`` on ``[L/4, 3L/4)``, zero elsewhere; ``S = 0``."""
    x = grid.x
    N = np.where((x >= params.L / 4) & (x < 3 * params.L / 4), 2.0 * params.A, 0.0)
    return np.stack([N, np.zeros_like(N)])


def uniform_perturbed_initial(params: PhysicalParams, grid: Grid1D, seed: int,
                              amplitude: float = 0.01, symmetric: bool = False,
                              n_fields: int = 3) -> np.ndarray:
    """Uniform multiplicative noise about ``(N_+, S_+, I_+)``.

    ``N`` and ``S`` are rescaled together so that ``<N + S> = A`` exactly.
    With ``symmetric`` the noise is mirrored about ``L/2``.
    """
    kappa = params.kappa
    M = kappa * params.A
    eqs = constant_equilibria(M, kappa)
    if len(eqs) < 2:
        raise ValueError(f"no positive constant equilibrium at A={params.A!r}")
    u, v, w = eqs[1]
    base = np.array([u / kappa, v / kappa, w])[:n_fields]
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-amplitude, amplitude, size=(n_fields, grid.n))
    if symmetric:
        noise = 0.5 * (noise + noise[:, ::-1])
    y = base[:, None] * (1.0 + noise)
    total = trapezoid_mean(y[0]) + trapezoid_mean(y[1])
    y[:2] *= params.A / total
    return y


# --------------------------------------------------------------------------
# stationary cross-check
# --------------------------------------------------------------------------


@dataclass
class CrossValidation:
    drift: float
    drift_history: list[tuple[float, float]]
    residual_fd: float
    horizon: float


def crossvalidate(triple, tau: float = 1.0, horizon: float = 1.0, dt: float | None = None,
                  scheme: str = "imex-cn") -> CrossValidation:
    """Start the ``eps = 0`` reduced system at a stationary triple and measure drift.

    Small drift over a short horizon certifies the triple as a discrete
    near-equilibrium of the simulator; it says nothing about stability.
    """
    prof = triple.u
    grid = Grid1D(len(prof.us), prof.ell)
    params = ReducedParams(prof.kappa, tau, prof.d, 0.0, triple.M, prof.ell)
    model = ReducedModel(params)
    y0 = np.stack([prof.us, triple.v, triple.w])
    if dt is None:
        dt = 0.01 if scheme == "imex-cn" else default_dt(grid, model.diffusivities)
    dt = min(dt, horizon)
    stepper = _Stepper(model, grid, dt, scheme)
    y = y0.copy()
    hist = []
    nsteps = int(math.ceil(horizon / dt - 1e-9))
    for k in range(1, nsteps + 1):
        y = stepper(y)
        _check(y, k * dt, model)
        hist.append((k * dt, float(np.max(np.abs(y - y0)))))
    r1, r2 = triple.residual("fd2")
    return CrossValidation(hist[-1][1], hist, float(max(np.abs(r1).max(), np.abs(r2).max())), horizon)
