"""Uniform tensor grids with homogeneous Dirichlet boundary in 1, 2 or 3 dimensions.

Unknowns sit at interior nodes only; boundary values are implicitly zero.
Quadrature is the trapezoidal rule, which with zero boundary values reduces
to uniform weights ``prod(h)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend
from .errors import DomainError, NumericalError
from .model import Field, ModelParams, Tabulated, potential_on_points
from .radial import split_coefficients

__all__ = [
    "TensorGrid", "SparseOperator", "GridSolver", "grid_laplacian_apply",
    "assemble_step_operator", "solve_step",
]


@dataclass(frozen=True)
class TensorGrid:
    dim: int
    extents: tuple = None
    counts: tuple = None

    is_radial = False

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dim!r}")
        ext = self.extents if self.extents is not None else ((-1.0, 1.0),) * self.dim
        cnt = self.counts if self.counts is not None else (64,) * self.dim
        if np.isscalar(cnt):
            cnt = (int(cnt),) * self.dim
        ext = tuple((float(a), float(b)) for a, b in ext)
        if len(ext) == 1 and self.dim > 1:
            ext = ext * self.dim
        cnt = tuple(int(n) for n in cnt)
        if len(ext) != self.dim or len(cnt) != self.dim:
            raise DomainError("extents and counts need one entry per axis")
        for a, b in ext:
            if not b > a:
                raise DomainError(f"empty axis [{a}, {b}]")
        if min(cnt) < 8:
            raise DomainError(f"each axis needs at least 8 interior nodes, got {cnt}")
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "counts", cnt)

    @property
    def shape(self):
        return self.counts

    @property
    def size(self):
        return int(np.prod(self.counts))

    @cached_property
    def spacing(self):
        return tuple((b - a) / (n + 1) for (a, b), n in zip(self.extents, self.counts))

    @cached_property
    def axes(self):
        return [a + h * np.arange(1, n + 1)
                for (a, _), h, n in zip(self.extents, self.spacing, self.counts)]

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @cached_property
    def weights(self):
        w = np.full(self.size, self.cell_volume)
        w.flags.writeable = False
        return w

    @cached_property
    def points(self):
        """``(size, dim)`` coordinates in C order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def coordinate_columns(self):
        return [self.points[:, k] for k in range(self.dim)]

    @property
    def center(self):
        return np.array([(a + b) / 2 for a, b in self.extents])

    @property
    def half_width(self):
        return min((b - a) / 2 for a, b in self.extents)

    def laplacian(self, values):
        off = tuple(1.0 / h ** 2 for h in self.spacing)
        diag = np.full(self.size, -2.0 * sum(off))
        return _backend.stencil_apply(diag, np.ascontiguousarray(values, dtype=float),
                                      self.shape, off)

    def grad_sq(self, values):
        """Sum of squared first differences over every edge, boundary edges included."""
        u = np.asarray(values, dtype=float).reshape(self.shape)
        total = 0.0
        for axis, h in enumerate(self.spacing):
            pad = [(0, 0)] * self.dim
            pad[axis] = (1, 1)
            d = np.diff(np.pad(u, pad), axis=axis)
            total += float(np.sum(d * d)) / h ** 2
        return total * self.cell_volume

    def norm(self, values):
        return math.sqrt(self.cell_volume * float(np.dot(values, values)))

    def inner(self, u, v):
        return self.cell_volume * float(np.dot(u, v))

    def potential_values(self, potential):
        if isinstance(potential, Tabulated):
            if potential.values.size != self.size:
                raise DomainError(f"tabulated potential has {potential.values.size} values, "
                                  f"grid has {self.size} nodes")
            return np.array(potential.values)
        return potential_on_points(potential, self.points)

    def node_coordinates(self, index):
        return tuple(float(x) for x in self.points[index])

    def boundary_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[axis] = 0
            mask[tuple(idx)] = True
            idx[axis] = -1
            mask[tuple(idx)] = True
        return mask.ravel()

    def spec(self):
        return {"kind": "tensor", "dim": self.dim,
                "extents": [list(e) for e in self.extents], "counts": list(self.counts)}


@dataclass(frozen=True)
class SparseOperator:
    """``A x = diag * x + sum_axis off[axis] * (x[+e_axis] + x[-e_axis])``."""

    grid: TensorGrid
    diag: np.ndarray
    off: tuple

    def apply(self, x):
        return _backend.stencil_apply(self.diag, np.ascontiguousarray(x, dtype=float),
                                      self.grid.shape, self.off)

    def dense(self):
        n = self.grid.size
        return np.column_stack([self.apply(e) for e in np.eye(n)])


def grid_laplacian_apply(f: Field) -> Field:
    return Field(f.grid, f.grid.laplacian(f.values))


def assemble_step_operator(f: Field, m: ModelParams, tau: float, mu: float, vvals=None):
    """Return ``(operator, rhs)`` of the implicit step on a tensor grid."""
    g = f.grid
    if vvals is None:
        vvals = g.potential_values(m.potential)
    reaction, rhs = split_coefficients(f.values, m, tau, mu, vvals)
    off = tuple(-0.5 / h ** 2 for h in g.spacing)
    diag = reaction - 2.0 * sum(off)
    return SparseOperator(g, np.ascontiguousarray(diag), off), rhs


def solve_step(op: SparseOperator, rhs, x0=None, tol=1e-10, max_iter=10000):
    """Jacobi-preconditioned conjugate gradients.

    Returns ``(x, iterations)``. Stops when ``||b - A x|| <= tol ||b||``.

    When ``rhs >= 0`` and ``op`` is an M-matrix, the exact solution is
    nonnegative but the CG iterate can carry round-off negatives where the
    solution is tiny. One projected Jacobi sweep ``D^-1 (b - O x+)`` then
    returns an exactly nonnegative vector; it is a max-norm contraction, so it
    never moves the iterate away from the solution.
    """
    b = np.asarray(rhs, dtype=float)
    bnorm = math.sqrt(float(np.dot(b, b)))
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    if np.any(op.diag <= 0):
        raise NumericalError("operator diagonal is not positive", min_diag=float(op.diag.min()))
    inv_d = 1.0 / op.diag
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - op.apply(x)
    z = inv_d * r
    p = z.copy()
    rz = float(np.dot(r, z))
    target = tol * bnorm
    for it in range(1, max_iter + 1):
        if math.sqrt(float(np.dot(r, r))) <= target:
            return _finish(op, b, x), it - 1
        q = op.apply(p)
        pq = float(np.dot(p, q))
        if pq <= 0:
            raise NumericalError("operator is not positive definite", iteration=it, pAp=pq)
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        z = inv_d * r
        rz_new = float(np.dot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = math.sqrt(float(np.dot(r, r))) / bnorm
    if res <= tol:
        return _finish(op, b, x), max_iter
    raise NumericalError("conjugate gradients did not converge",
                         iterations=max_iter, relative_residual=res)


def _finish(op, b, x):
    # needs nonpositive off-diagonals, strict diagonal dominance and b >= 0
    if max(op.off) > 0 or np.any(op.diag <= 2.0 * sum(abs(o) for o in op.off)) or np.any(b < 0):
        return x
    xp = np.maximum(x, 0.0)
    offdiag = op.apply(xp) - op.diag * xp
    return (b - offdiag) / op.diag


class GridSolver:
    """Implicit-step backend for :mod:`egps.gflow` on a :class:`TensorGrid`."""

    default_metric = "l2_diff"
    default_tolerance = 1e-6

    def __init__(self, grid: TensorGrid, linear_tol=1e-10, linear_max_iter=10000):
        self.grid = grid
        self.linear_tol = linear_tol
        self.linear_max_iter = linear_max_iter
        self.off = tuple(-0.5 / h ** 2 for h in grid.spacing)
        self.last_info = {}

    def implicit_step(self, phi, m, tau, mu, vvals):
        reaction, rhs = split_coefficients(phi, m, tau, mu, vvals)
        op = SparseOperator(self.grid, reaction - 2.0 * sum(self.off), self.off)
        x, its = solve_step(op, rhs, x0=phi, tol=self.linear_tol,
                            max_iter=self.linear_max_iter)
        self.last_info = {"linear_iterations": its}
        return x
