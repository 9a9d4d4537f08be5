"""Ground states of the extended Gross-Pitaevskii equation with LHY correction."""
from ._backend import BACKEND
from .errors import DomainError, NumericalError, PreconditionError
from .gflow import (Classification, GroundStateResult, IterationState, SolverConfig,
                    default_initial_gaussian, gradient_flow_step, run_to_convergence, solve)
from .grid import GridSolver, TensorGrid
from .model import (Field, Harmonic, ModelParams, OpticalLattice, PhysicalParams,
                    RadialPower, Tabulated, Zero, chemical_potential, energy,
                    nondimensionalize, reduce_dimension)
from .radial import RadialGrid, RadialSolver

__version__ = "0.1.0"
