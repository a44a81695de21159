"""trisweep: Landau-Zener-Stuckelberg-Majorana dynamics of a periodically
driven three-level (spin-1) system.

Subpackages
-----------
specfun    Fresnel integrals and interference window functions.
models     Hamiltonian builders (semiclassical 3-level, quantized 9/5/4-level).
propagate  Exact density-matrix / state-vector time evolution.
analytic   Closed-form transition probabilities and crossing-chain composition.
adiabatic  Instantaneous eigenframe, non-adiabatic couplings, slow-sweep formula.
runner     Scenario presets, sweeps, comparison reports, CSV/manifest output.
"""

__version__ = "0.1.0"

from . import adiabatic, analytic, models, propagate, runner, specfun
from .errors import (
    ConfigError,
    ConservationError,
    DegenerateGapError,
    DomainError,
    IntegrationError,
    NumericError,
    StructureError,
)

__all__ = [
    "__version__",
    "adiabatic",
    "analytic",
    "models",
    "propagate",
    "runner",
    "specfun",
    "ConfigError",
    "ConservationError",
    "DegenerateGapError",
    "DomainError",
    "IntegrationError",
    "NumericError",
    "StructureError",
]
