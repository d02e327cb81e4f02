"""Pseudo-spectral solver and a priori estimate monitors for the 3-D
viscous primitive equations with temperature in a periodic channel."""

from .calculus import GridSpec, ScalarField2, ScalarField3, VectorFieldH
from .estimates import (
    CertificateReport,
    bound_ladder,
    certify,
    derived_vars,
    initial_norms,
    sample_functionals,
    twin_run,
)
from .integrator import BlowUpError, StepperConfig, run, step
from .model import ConfigurationError, ModelParams, State, make_state

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "ScalarField2", "ScalarField3", "VectorFieldH",
    "ModelParams", "State", "make_state", "ConfigurationError",
    "StepperConfig", "step", "run", "BlowUpError",
    "CertificateReport", "bound_ladder", "certify", "derived_vars", "initial_norms",
    "sample_functionals", "twin_run",
]
