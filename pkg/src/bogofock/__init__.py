"""Bogoliubov transformations on truncated bosonic Fock spaces.

Builds proper canonical transformations from one-parameter symplectic
groups, their normal-ordered unitaries and self-adjoint generators, and
checks the phase relation between the two numerically.
"""

from bogofock.linalg import Tolerance, integrate, log_det_one_minus, mat_exp, svd_values
from bogofock.symplectic import SigmaGenerator, SymplecticElement, flow
from bogofock.fock import FockSpace

__all__ = [
    "FockSpace",
    "SigmaGenerator",
    "SymplecticElement",
    "Tolerance",
    "flow",
    "integrate",
    "log_det_one_minus",
    "mat_exp",
    "svd_values",
]

__version__ = "0.1.0"
