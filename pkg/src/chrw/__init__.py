"""Bichromatically driven qubit: CHRW, RWA, two-mode Floquet and direct-integration solvers."""

from .errors import ChrwError
from .model import DriveParams

__version__ = "0.1.0"

__all__ = ["ChrwError", "DriveParams", "__version__"]
