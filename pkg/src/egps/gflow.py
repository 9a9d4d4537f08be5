"""Normalized gradient flow driver, independent of the spatial discretization.

A *solver* is any object with a ``grid`` attribute and a method
``implicit_step(phi, model, tau, mu, potential_values) -> phi_tilde``;
:class:`egps.radial.RadialSolver` and :class:`egps.grid.GridSolver` are the
two provided.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .model import Field, ModelParams, Zero, _mu_unchecked, energy

__all__ = [
    "Classification", "SolverConfig", "IterationState", "GroundStateResult",
    "TruncationWarning", "gradient_flow_step", "run_to_convergence",
    "default_initial_gaussian", "initial_state", "euler_lagrange_residual",
]


class TruncationWarning(UserWarning):
    """The converged state is not negligible at the truncation boundary."""


class Classification(str, enum.Enum):
    GROUND_STATE = "GroundState"
    SPREADING = "SpreadingNoGroundState"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class SolverConfig:
    time_step: float = 1e-2
    stop_tolerance: float = 1e-10
    stop_metric: str = "max_diff"
    max_iterations: int = 100_000
    spread_window: int = 200
    peak_decay_threshold: float = 0.5
    linear_tolerance: float = 1e-10
    linear_max_iterations: int = 10_000

    def __post_init__(self):
        if not self.time_step > 0:
            raise DomainError(f"time step must be positive, got {self.time_step!r}")
        if not self.stop_tolerance > 0:
            raise DomainError(f"stop tolerance must be positive, got {self.stop_tolerance!r}")
        if self.stop_metric not in ("max_diff", "l2_diff"):
            raise DomainError(f"stop metric must be max_diff or l2_diff, got {self.stop_metric!r}")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be positive")
        if self.spread_window < 10:
            raise DomainError("spread detection window must be at least 10")
        if not 0 < self.peak_decay_threshold < 1:
            raise DomainError("peak_decay_threshold must lie in (0, 1)")

    @classmethod
    def radial(cls, **kw):
        """Defaults for radial runs: max-norm difference below 1e-10."""
        return cls(**{"stop_metric": "max_diff", "stop_tolerance": 1e-10, **kw})

    @classmethod
    def tensor(cls, **kw):
        """Defaults for tensor-grid runs: L2 difference below 1e-6."""
        return cls(**{"stop_metric": "l2_diff", "stop_tolerance": 1e-6, **kw})

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class IterationState:
    field: Field
    mu: float
    energy: float
    diff_metric: float
    iteration: int


@dataclass(frozen=True)
class GroundStateResult:
    field: Field
    energy: float
    chemical_potential: float
    peak_value: float
    peak_location: tuple
    iterations: int
    converged: bool
    classification: Classification
    energy_history: np.ndarray = field(repr=False, default=None)
    peak_history: np.ndarray = field(repr=False, default=None)
    boundary_ratio: float = 0.0


def _potential_values(solver, m):
    return solver.grid.potential_values(m.potential)


def initial_state(f: Field, m: ModelParams, vvals=None) -> IterationState:
    """Normalize ``f`` to mass ``m.c`` and wrap it as iteration 0."""
    nrm = f.norm()
    if not nrm > 0:
        raise PreconditionError("initial field has zero mass")
    phi = Field(f.grid, f.values * (m.c / nrm))
    g = f.grid
    if vvals is None:
        vvals = g.potential_values(m.potential)
    return IterationState(phi, _mu_unchecked(g, phi.values, m, vvals), energy(phi, m),
                          math.inf, 0)


def _diff(grid, new, old, metric):
    d = new - old
    if metric == "max_diff":
        return float(np.max(np.abs(d)))
    return grid.norm(d)


def gradient_flow_step(state: IterationState, m: ModelParams, config: SolverConfig,
                       solver, vvals=None) -> IterationState:
    """One implicit step followed by projection back onto the mass sphere.

    ``state.mu`` must be the chemical potential of ``state.field``; the
    returned state carries the chemical potential and energy of the new iterate.
    """
    g = solver.grid
    if vvals is None:
        vvals = _potential_values(solver, m)
    phi = state.field.values
    tilde = solver.implicit_step(phi, m, config.time_step, state.mu, vvals)
    nrm = g.norm(tilde)
    if not nrm > 0:
        raise PreconditionError("intermediate state vanished")
    new = tilde * (m.c / nrm)
    f = Field(g, new)
    return IterationState(f, _mu_unchecked(g, new, m, vvals), energy(f, m),
                          _diff(g, new, phi, config.stop_metric), state.iteration + 1)


def run_to_convergence(initial: Field, m: ModelParams, config: SolverConfig, solver,
                       callback=None) -> GroundStateResult:
    """Iterate until the difference metric drops below tolerance.

    The run is classified as spreading (no ground state) when the peak has
    decreased for ``spread_window`` consecutive steps and sits below
    ``peak_decay_threshold`` times its initial value. In free space a
    converged state with nonnegative energy is also classified as spreading:
    the infimum over all of space is then zero and the state only exists
    because of the truncation boundary. Running out of
    iterations gives a ``MaxIterations`` result rather than an exception.
    ``callback(state)`` is called after every step.

    A potential with negative values is shifted up by a constant inside the
    flow so the implicit operator stays an M-matrix; ground states do not
    change and the reported chemical potential is shifted back.
    """
    if initial.grid != solver.grid:
        raise PreconditionError("initial field and solver use different grids")
    vvals = _potential_values(solver, m)
    shift = max(0.0, -float(vvals.min()))
    vvals = vvals + shift
    state = initial_state(initial, m, vvals)
    peak0 = float(np.max(np.abs(state.field.values)))
    peak = peak0
    energies = [state.energy]
    peaks = [peak0]
    decreasing = 0
    status = Classification.MAX_ITERATIONS
    for _ in range(config.max_iterations):
        state = gradient_flow_step(state, m, config, solver, vvals)
        if callback is not None:
            callback(state)
        new_peak = float(np.max(np.abs(state.field.values)))
        decreasing = decreasing + 1 if new_peak < peak else 0
        peak = new_peak
        energies.append(state.energy)
        peaks.append(peak)
        if state.diff_metric < config.stop_tolerance:
            status = Classification.GROUND_STATE
            if isinstance(m.potential, Zero) and state.energy >= 0:
                status = Classification.SPREADING
            break
        if decreasing >= config.spread_window and peak < config.peak_decay_threshold * peak0:
            status = Classification.SPREADING
            break

    f = state.field
    pv, ploc = f.peak()
    edge = np.abs(f.values[f.grid.boundary_mask()])
    ratio = float(edge.max()) / pv if pv > 0 else 0.0
    if status is Classification.GROUND_STATE and ratio > 1e-6:
        warnings.warn(f"solution at the truncation boundary is {ratio:.2e} of the peak; "
                      "enlarge the domain", TruncationWarning, stacklevel=2)
    return GroundStateResult(
        field=f, energy=state.energy, chemical_potential=state.mu - shift,
        peak_value=pv, peak_location=ploc, iterations=state.iteration,
        converged=status is Classification.GROUND_STATE, classification=status,
        energy_history=np.array(energies), peak_history=np.array(peaks),
        boundary_ratio=ratio,
    )


def default_initial_gaussian(grid, c, width=None) -> Field:
    """Gaussian ``exp(-|x - x0|^2 / (2 width^2))`` normalized to mass ``c``.

    ``x0`` is the origin of a radial grid or the center of a tensor grid.
    The default width is a quarter of the domain half-width.
    """
    if grid.is_radial:
        half = grid.R
        r2 = grid.midpoints ** 2
    else:
        half = grid.half_width
        r2 = np.sum((grid.points - grid.center) ** 2, axis=1)
    if width is None:
        width = 0.25 * half
    if not width > 0:
        raise DomainError(f"Gaussian width must be positive, got {width!r}")
    v = np.exp(-r2 / (2.0 * width ** 2))
    return Field(grid, v * (c / grid.norm(v)))


def euler_lagrange_residual(result_or_field, m: ModelParams, mu=None) -> float:
    """``||-1/2 lap phi + V phi + beta phi^3 + lam |phi|^3 phi - mu phi|| / ||mu phi||``."""
    f = getattr(result_or_field, "field", result_or_field)
    g = f.grid
    phi = f.values
    if mu is None:
        mu = _mu_unchecked(g, phi, m)
    h = (-0.5 * g.laplacian(phi) + g.potential_values(m.potential) * phi
         + m.beta * phi ** 3 + m.lam * np.abs(phi) ** 3 * phi)
    return g.norm(h - mu * phi) / g.norm(mu * phi)


def make_solver(grid, config: SolverConfig):
    from .grid import GridSolver
    from .radial import RadialSolver
    if grid.is_radial:
        return RadialSolver(grid)
    return GridSolver(grid, config.linear_tolerance, config.linear_max_iterations)


def solve(m: ModelParams, grid, config: SolverConfig | None = None, initial=None,
          width=None, callback=None) -> GroundStateResult:
    """Convenience wrapper: Gaussian start, per-grid default stopping rule."""
    if config is None:
        config = SolverConfig.radial() if grid.is_radial else SolverConfig.tensor()
    if initial is None:
        initial = default_initial_gaussian(grid, m.c, width)
    return run_to_convergence(initial, m, config, make_solver(grid, config), callback)


__all__ += ["make_solver", "solve"]
