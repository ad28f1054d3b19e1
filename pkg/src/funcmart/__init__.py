"""Numerical laboratory linking functional equations to Brownian martingales.

Candidates are checked two ways: exactly, by residuals of the functional
equation on a grid, and stochastically, by testing whether the transformed
Brownian process is a martingale.  Quadrature checks cover the analytic
arguments, and per-theorem suites combine everything.
"""

from .errors import ConfigError, DegenerateInput, DomainViolation, FuncMartError, InsufficientSamples, SingularGrid
from .functions import EquationKind, FunctionSpec, parse_spec, residual
from .simulate import Label, PathEnsemble, SimConfig, generate, generate_pair, standard_normal_samples
from .theorems import TheoremId, TheoremReport, run, run_all

__all__ = [
    "ConfigError",
    "DegenerateInput",
    "DomainViolation",
    "EquationKind",
    "FuncMartError",
    "FunctionSpec",
    "InsufficientSamples",
    "Label",
    "PathEnsemble",
    "SimConfig",
    "SingularGrid",
    "TheoremId",
    "TheoremReport",
    "generate",
    "generate_pair",
    "parse_spec",
    "residual",
    "run",
    "run_all",
    "standard_normal_samples",
]
