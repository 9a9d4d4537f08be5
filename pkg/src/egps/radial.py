"""Symmetric reduction of the d-dimensional problem on a radial midpoint grid.

Unknowns live at the midpoints ``r_{j+1/2} = (j + 1/2) dr``, ``j = 0..M-1``.
The ghost values ``phi_{-1/2} = phi_{1/2}`` (symmetry at the origin) and
``phi_{M+1/2} = 0`` (truncation at ``R``) are folded into the tridiagonal rows,
so no ghost storage is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend
from .errors import DomainError, NumericalError
from .model import Field, ModelParams, potential_on_radii

SURFACE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}

__all__ = [
    "RadialGrid", "TridiagonalSystem", "RadialSolver", "radial_laplacian_apply",
    "assemble_implicit_system", "solve_tridiagonal", "radial_norm",
]


@dataclass(frozen=True)
class RadialGrid:
    dim: int
    R: float = 1.0
    M: int = 2048

    is_radial = True

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dim!r}")
        if not self.R > 0:
            raise DomainError(f"outer radius must be positive, got {self.R!r}")
        if int(self.M) != self.M or self.M < 8:
            raise DomainError(f"cell count must be an integer >= 8, got {self.M!r}")

    @property
    def dr(self):
        return self.R / self.M

    @property
    def size(self):
        return self.M

    @cached_property
    def midpoints(self):
        return (np.arange(self.M) + 0.5) * self.dr

    @cached_property
    def nodes(self):
        """Cell edges ``r_j = j dr`` for ``j = 0..M``."""
        return np.arange(self.M + 1) * self.dr

    @cached_property
    def weights(self):
        return SURFACE[self.dim] * self.dr * self.midpoints ** (self.dim - 1)

    @cached_property
    def _stencil(self):
        # rows of delta^2_{r,d}: lo * phi_{j-1/2} + di * phi_{j+1/2} + up * phi_{j+3/2}
        p = self.dim - 1
        left = self.nodes[:-1] ** p
        right = self.nodes[1:] ** p
        scale = self.dr ** 2 * self.midpoints ** p
        lo = left / scale
        up = right / scale
        di = -(left + right) / scale
        di[0] += lo[0]          # phi_{-1/2} = phi_{1/2}
        lo = lo.copy()
        lo[0] = 0.0
        up = up.copy()
        up[-1] = 0.0            # phi_{M+1/2} = 0
        for a in (lo, di, up):
            a.flags.writeable = False
        return lo, di, up

    def laplacian(self, values):
        lo, di, up = self._stencil
        return _backend.tridiag_matvec(lo, di, up, np.ascontiguousarray(values, dtype=float))

    def grad_sq(self, values):
        """``omega(d) dr sum_j r_{j+1}^{d-1} ((phi_{j+3/2} - phi_{j+1/2}) / dr)^2``."""
        diff = np.diff(values, append=0.0)
        wr = self.nodes[1:] ** (self.dim - 1)
        return float(SURFACE[self.dim] / self.dr * np.dot(wr, diff * diff))

    def norm(self, values):
        return math.sqrt(float(np.dot(self.weights, np.asarray(values) ** 2)))

    def inner(self, u, v):
        return float(np.sum(self.weights * u * v))

    def potential_values(self, potential):
        return potential_on_radii(potential, self.midpoints)

    def node_coordinates(self, index):
        return (float(self.midpoints[index]),)

    def coordinate_columns(self):
        return [self.midpoints]

    def boundary_mask(self):
        mask = np.zeros(self.M, dtype=bool)
        mask[-1] = True
        return mask

    def spec(self):
        return {"kind": "radial", "dim": self.dim, "R": self.R, "M": self.M}


@dataclass(frozen=True)
class TridiagonalSystem:
    """Rows ``lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j]``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def matvec(self, x):
        return _backend.tridiag_matvec(self.lower, self.diag, self.upper,
                                       np.ascontiguousarray(x, dtype=float))

    def dense(self):
        n = self.diag.size
        a = np.diag(self.diag)
        a[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        a[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        return a


def radial_laplacian_apply(f: Field) -> Field:
    return Field(f.grid, f.grid.laplacian(f.values))


def split_coefficients(phi, m: ModelParams, tau, mu, vvals):
    """Diagonal reaction term and right-hand side of the implicit step.

    Attractive parts (``beta < 0``, ``mu > 0``) stay explicit, everything else
    moves to the left; this reproduces the ``phi*``/``phi**`` branching.
    """
    if not tau > 0:
        raise DomainError(f"time step must be positive, got {tau!r}")
    bplus, bminus = max(m.beta, 0.0), min(m.beta, 0.0)
    rho = phi * phi
    reaction = 1.0 / tau + vvals + m.lam * np.abs(phi) ** 3 + bplus * rho - min(mu, 0.0)
    rhs = (1.0 / tau + max(mu, 0.0) - bminus * rho) * phi
    return reaction, rhs


def assemble_implicit_system(f: Field, m: ModelParams, tau: float, mu: float,
                             vvals=None) -> TridiagonalSystem:
    g = f.grid
    if vvals is None:
        vvals = g.potential_values(m.potential)
    reaction, rhs = split_coefficients(f.values, m, tau, mu, vvals)
    lo, di, up = g._stencil
    return TridiagonalSystem(-0.5 * lo, reaction - 0.5 * di, -0.5 * up, rhs)


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    try:
        return _backend.thomas(
            np.ascontiguousarray(sys.lower, dtype=float),
            np.ascontiguousarray(sys.diag, dtype=float),
            np.ascontiguousarray(sys.upper, dtype=float),
            np.ascontiguousarray(sys.rhs, dtype=float),
        )
    except ZeroDivisionError as exc:
        raise NumericalError(f"tridiagonal solve failed: {exc}") from None


def radial_norm(f: Field) -> float:
    return f.grid.norm(f.values)


class RadialSolver:
    """Implicit-step backend for :mod:`egps.gflow` on a :class:`RadialGrid`."""

    default_metric = "max_diff"
    default_tolerance = 1e-10

    def __init__(self, grid: RadialGrid):
        self.grid = grid
        self.last_info = {}

    def implicit_step(self, phi, m, tau, mu, vvals):
        lo, di, up = self.grid._stencil
        reaction, rhs = split_coefficients(phi, m, tau, mu, vvals)
        try:
            return _backend.thomas(-0.5 * lo, reaction - 0.5 * di, -0.5 * up, rhs)
        except ZeroDivisionError as exc:
            raise NumericalError(f"tridiagonal solve failed: {exc}") from None
