"""Problem data, potentials and the discrete energy functionals.

Every discretization (radial midpoint grid or tensor grid) exposes the same
small protocol used here:

``weights``
    quadrature weight per node, so that ``sum(weights * f)`` integrates ``f``;
``grad_sq(values)``
    the discrete Dirichlet integral of ``values``;
``potential_values(potential)``
    the potential sampled at the nodes.

The kinetic term is always computed from first differences between adjacent
nodes, which makes it equal to ``-<lap u, u>`` for the grid's own Laplacian.
That is what keeps the chemical-potential/energy identity exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate

from .errors import DomainError, PreconditionError

HBAR = 1.054571817e-34  # J s

__all__ = [
    "PhysicalParams", "ModelParams", "Zero", "Harmonic", "OpticalLattice",
    "RadialPower", "Tabulated", "Potential", "Field", "ReducedModel",
    "nondimensionalize", "evaluate_potential", "energy", "energy_terms",
    "chemical_potential", "reduce_dimension", "lp_norm",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Physical inputs of the three-dimensional model (SI units)."""

    mass: float
    scattering_length: float
    particle_number: float
    length_scale: float
    lhy_constant: float
    norm_constant: float = 1.0

    def __post_init__(self):
        for name in ("mass", "scattering_length", "particle_number",
                     "length_scale", "lhy_constant", "norm_constant"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    @property
    def time_scale(self):
        return self.mass * self.length_scale ** 2 / HBAR


def nondimensionalize(p: PhysicalParams) -> tuple[float, float]:
    """Return the dimensionless ``(beta, lambda)`` for physical parameters ``p``."""
    n, a, xs, c = p.particle_number, p.scattering_length, p.length_scale, p.norm_constant
    beta = 4.0 * math.pi * n * a / (c ** 2 * xs)
    lam = 4.0 * math.pi * p.lhy_constant * n ** 1.5 / c ** 3 * (a / xs) ** 2.5
    return beta, lam


# -- potentials --------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    def __str__(self):
        return "zero"


@dataclass(frozen=True)
class Harmonic:
    """``V = 1/2 sum gamma_i^2 x_i^2``. A single gamma is applied to every axis."""

    gamma: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        g = self.gamma
        if np.isscalar(g):
            g = (float(g),)
        object.__setattr__(self, "gamma", tuple(float(x) for x in g))
        if not self.gamma:
            raise DomainError("Harmonic needs at least one frequency")

    def gammas(self, dim):
        if len(self.gamma) == 1:
            return self.gamma * dim
        if len(self.gamma) != dim:
            raise DomainError(
                f"harmonic trap has {len(self.gamma)} frequencies, point has dimension {dim}")
        return self.gamma

    @property
    def isotropic(self):
        return len(set(self.gamma)) == 1

    def __str__(self):
        return "harmonic:" + ",".join(repr(g) for g in self.gamma)


@dataclass(frozen=True)
class OpticalLattice:
    """``V = V0 sum_i cos(k x_i)``."""

    amplitude: float
    wavenumber: float

    def __str__(self):
        return f"lattice:{self.amplitude!r},{self.wavenumber!r}"


@dataclass(frozen=True)
class RadialPower:
    """``V = coefficient * |x|^exponent``; ``10^5 r^2`` is ``RadialPower(1e5, 2)``."""

    coefficient: float
    exponent: float

    def __str__(self):
        return f"power:{self.coefficient!r},{self.exponent!r}"


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Potential values given directly at the grid nodes (flattened, C order)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise DomainError("tabulated potential has non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        return isinstance(other, Tabulated) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def __str__(self):
        return f"tabulated[{self.values.size}]"


Potential = Union[Zero, Harmonic, OpticalLattice, RadialPower, Tabulated]


def evaluate_potential(v: Potential, point) -> float:
    """Evaluate ``v`` at a single coordinate vector."""
    x = np.atleast_1d(np.asarray(point, dtype=float))
    if x.ndim != 1 or not 1 <= x.size <= 3:
        raise DomainError(f"point must be a vector of length 1..3, got shape {x.shape}")
    return float(potential_on_points(v, x[None, :])[0])


def potential_on_points(v: Potential, points: np.ndarray) -> np.ndarray:
    """Vectorized potential on an ``(npoints, dim)`` array of coordinates."""
    dim = points.shape[1]
    if isinstance(v, Zero):
        return np.zeros(points.shape[0])
    if isinstance(v, Harmonic):
        g = np.asarray(v.gammas(dim))
        return 0.5 * np.sum((g * points) ** 2, axis=1)
    if isinstance(v, OpticalLattice):
        return v.amplitude * np.sum(np.cos(v.wavenumber * points), axis=1)
    if isinstance(v, RadialPower):
        r = np.sqrt(np.sum(points ** 2, axis=1))
        return v.coefficient * r ** v.exponent
    if isinstance(v, Tabulated):
        raise DomainError("tabulated potentials are only defined at grid nodes")
    raise TypeError(f"unknown potential {v!r}")


def potential_on_radii(v: Potential, r: np.ndarray) -> np.ndarray:
    """Potential of a radially symmetric ``v`` at radii ``r``."""
    if isinstance(v, Zero):
        return np.zeros_like(r)
    if isinstance(v, Harmonic):
        if not v.isotropic:
            raise DomainError("radial grids need an isotropic harmonic trap")
        return 0.5 * (v.gamma[0] * r) ** 2
    if isinstance(v, RadialPower):
        return v.coefficient * r ** v.exponent
    if isinstance(v, Tabulated):
        if v.values.size != r.size:
            raise DomainError(
                f"tabulated potential has {v.values.size} values, grid has {r.size} nodes")
        return np.array(v.values)
    raise DomainError(f"{type(v).__name__} potential is not radially symmetric")


# -- model and field ---------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Dimensionless problem ``-1/2 lap + V + beta|phi|^2 + lam|phi|^3`` with mass ``c``."""

    dim: int
    beta: float
    lam: float
    c: float = 1.0
    potential: Potential = field(default_factory=Zero)

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dim!r}")
        if not self.lam >= 0:
            raise DomainError(f"lambda must be nonnegative, got {self.lam!r}")
        if not self.c > 0:
            raise DomainError(f"mass c must be positive, got {self.c!r}")
        if not math.isfinite(self.beta):
            raise DomainError("beta must be finite")


@dataclass(frozen=True, eq=False)
class Field:
    """Real wavefunction values at the nodes of ``grid`` (flattened, C order)."""

    grid: object
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.grid.size:
            raise PreconditionError(
                f"field has {v.size} values but the grid has {self.grid.size} nodes")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def norm(self):
        return self.grid.norm(self.values)

    def with_values(self, values):
        return Field(self.grid, values)

    def peak(self):
        """Return ``(max |phi|, coordinates of that node)``."""
        i = int(np.argmax(np.abs(self.values)))
        return float(abs(self.values[i])), self.grid.node_coordinates(i)


def lp_norm(f: Field, p: float) -> float:
    return float(np.sum(f.grid.weights * np.abs(f.values) ** p) ** (1.0 / p))


def _check_compatible(f: Field, m: ModelParams):
    if f.grid.dim != m.dim:
        raise PreconditionError(f"field lives in {f.grid.dim}D, model is {m.dim}D")


def energy_terms(f: Field, m: ModelParams) -> dict[str, float]:
    """The four energy contributions: kinetic, potential, cubic and LHY."""
    _check_compatible(f, m)
    g = f.grid
    w = g.weights
    rho = f.values ** 2
    a5 = np.abs(f.values) ** 5
    return {
        "kinetic": 0.5 * g.grad_sq(f.values),
        "potential": float(np.sum(w * g.potential_values(m.potential) * rho)),
        "cubic": 0.5 * m.beta * float(np.sum(w * rho * rho)),
        "lhy": 0.4 * m.lam * float(np.sum(w * a5)),
    }


def energy(f: Field, m: ModelParams) -> float:
    t = energy_terms(f, m)
    return t["kinetic"] + t["potential"] + t["cubic"] + t["lhy"]


def _mu_unchecked(g, values, m, vvals=None):
    w = g.weights
    rho = values ** 2
    if vvals is None:
        vvals = g.potential_values(m.potential)
    s = (0.5 * g.grad_sq(values)
         + float(np.sum(w * (vvals * rho + m.beta * rho * rho + m.lam * np.abs(values) ** 5))))
    return s / m.c ** 2


def chemical_potential(f: Field, m: ModelParams) -> float:
    """Lagrange multiplier of a field normalized to mass ``m.c``."""
    _check_compatible(f, m)
    nrm = f.norm()
    if abs(nrm - m.c) > 1e-8 * m.c:
        raise PreconditionError(f"field norm {nrm!r} differs from c={m.c!r}")
    return _mu_unchecked(f.grid, f.values, m)


# -- dimension reduction -----------------------------------------------------

@dataclass(frozen=True)
class ReducedModel:
    beta_reduced: float
    lambda_reduced: float
    phase_constant: float
    target_dimension: int
    in_plane_gamma: tuple[float, ...] = ()

    def model(self, c=1.0):
        """A :class:`ModelParams` for the reduced equation (constant shift dropped)."""
        pot = Harmonic(self.in_plane_gamma) if any(self.in_plane_gamma) else Zero()
        return ModelParams(self.target_dimension, self.beta_reduced,
                           self.lambda_reduced, c, pot)


def _gaussian_moments(sigma):
    """Moments of the normalized 1D profile ``(pi s^2)^(-1/4) exp(-z^2 / 2 s^2)``."""
    amp = (math.pi * sigma ** 2) ** -0.25

    def g(z):
        return amp * math.exp(-z * z / (2 * sigma ** 2))

    def quad(fn):
        # the integrands are even; integrate the half line
        val, _ = integrate.quad(fn, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
        return 2.0 * val

    return {
        "l2": quad(lambda z: g(z) ** 2),
        "l4": quad(lambda z: g(z) ** 4),
        "l5": quad(lambda z: g(z) ** 5),
        "z2": quad(lambda z: z * z * g(z) ** 2),
        "dz": quad(lambda z: (z / sigma ** 2 * g(z)) ** 2),
    }


def reduce_dimension(m: ModelParams, sigma: float, case: str) -> ReducedModel:
    """Coefficients of the 2D (``"disk"``) or 1D (``"cigar"``) reduced model.

    The frozen transverse profile is a normalized Gaussian of width ``sigma``.
    Trap frequencies come from ``m.potential`` when it is a 3-axis harmonic trap.
    """
    if m.dim != 3:
        raise DomainError("dimension reduction starts from a 3D model")
    if not sigma > 0:
        raise DomainError(f"transverse width must be positive, got {sigma!r}")
    if isinstance(m.potential, Harmonic):
        gx, gy, gz = m.potential.gammas(3)
    elif isinstance(m.potential, Zero):
        gx = gy = gz = 0.0
    else:
        raise DomainError("dimension reduction needs a harmonic or zero potential")

    mom = _gaussian_moments(sigma)
    case = case.lower()
    if case == "disk":
        return ReducedModel(
            beta_reduced=m.beta * mom["l4"],
            lambda_reduced=m.lam * mom["l5"],
            phase_constant=gz ** 2 * mom["z2"] + mom["dz"],
            target_dimension=2,
            in_plane_gamma=(gx, gy),
        )
    if case == "cigar":
        # the (y, z) profile is a product of two 1D profiles
        return ReducedModel(
            beta_reduced=m.beta * mom["l4"] ** 2,
            lambda_reduced=m.lam * mom["l5"] ** 2,
            phase_constant=(gy ** 2 + gz ** 2) * mom["z2"] + 2.0 * mom["dz"],
            target_dimension=1,
            in_plane_gamma=(gx,),
        )
    raise DomainError(f"unknown reduction case {case!r}; use 'disk' or 'cigar'")
