"""Open quantum Brownian motion of N coupled oscillators in a common bath.

The main entry points are :class:`HPZMasterEquation` for the master-equation
dynamics and :class:`ExactBathOracle` for an exact finite-bath reference.
"""

__version__ = "0.1.0"

from .dynamics import QuadraticPotential, Trajectory, evolve, factorized_evolve
from .environment import KernelTable, SpectralModel, Temperature, tabulate_kernels
from .errors import CausticError, DomainError, NumericError, PhysicalityError
from .estimators import ExactBathOracle, HPZMasterEquation
from .hpz import CoefficientSeries, SystemParams, coefficients, solve_fundamental
from .oracle import compare, discretize_bath
from .states import GaussianState
from .transform import CanonicalTransformer, build_transform

__all__ = [
    "CanonicalTransformer", "CausticError", "CoefficientSeries", "DomainError",
    "ExactBathOracle", "GaussianState", "HPZMasterEquation", "KernelTable",
    "NumericError", "PhysicalityError", "QuadraticPotential", "SpectralModel",
    "SystemParams", "Temperature", "Trajectory", "build_transform", "coefficients",
    "compare", "discretize_bath", "evolve", "factorized_evolve", "solve_fundamental",
    "tabulate_kernels",
]
