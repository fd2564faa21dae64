"""msdarcy: a numerical laboratory for multi-species flow in porous media.

Simulates the stiff multi-species Euler-Darcy system with Maxwell-Stefan
cross-diffusion, its nonlinear-diffusion (porous-medium) limit, a numerical
certificate of the structural wellposedness conditions at equilibria, and a
relative-entropy convergence study across the stiffness parameter.
"""

from .certificate import CertificateReport, certify
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    MsdarcyError,
    SingularSystemError,
    VacuumError,
)
from .hyperbolic import FieldSnapshot, Grid1D, HyperbolicConfig
from .kernels import BACKEND as KERNEL_BACKEND
from .mixture import CellState, MixtureModel, PressureLaw, StateBox

__version__ = "0.1.0"

__all__ = [
    "CellState",
    "CertificateReport",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "FieldSnapshot",
    "Grid1D",
    "HyperbolicConfig",
    "KERNEL_BACKEND",
    "MixtureModel",
    "MsdarcyError",
    "PressureLaw",
    "SingularSystemError",
    "StateBox",
    "VacuumError",
    "certify",
    "__version__",
]
