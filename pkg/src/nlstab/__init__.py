"""Numerical toolkit for traveling waves of nonlinear Schrodinger
equations with nonvanishing boundary conditions: profiles, linearized
operators, spectral stability diagnostics, and frame dynamics."""

from .grid import GridSpec, PairField, ScalarField
from .nonlinearity import NonlinearitySpec, cq_constants
from .profiles import TravelingWave, dark_soliton, stationary_bubble

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "PairField", "ScalarField",
    "NonlinearitySpec", "cq_constants",
    "TravelingWave", "dark_soliton", "stationary_bubble",
    "__version__",
]
