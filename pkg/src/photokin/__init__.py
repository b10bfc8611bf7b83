"""Positivity-preserving solvers for a non-local photochemical kinetics model."""

from importlib.metadata import PackageNotFoundError, version

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GridError,
    PhotokinError,
    SchemeError,
    ValidationError,
)
from .grid import Discretization, GridSpec
from .model import FunctionSpec, ProblemSpec, ValidatedProblem, eval_function, eval_intensity, eval_rho, validate_problem
from .quadrature import WeightScheme, assemble_row, composite_integral, make_weight_scheme
from .simulation import FieldAudit, SchemeConfig, SolutionField, product_concentration, run_simulation

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "Discretization",
    "DomainError",
    "FieldAudit",
    "FunctionSpec",
    "GridError",
    "GridSpec",
    "PhotokinError",
    "ProblemSpec",
    "SchemeConfig",
    "SchemeError",
    "SolutionField",
    "ValidatedProblem",
    "ValidationError",
    "WeightScheme",
    "assemble_row",
    "composite_integral",
    "eval_function",
    "eval_intensity",
    "eval_rho",
    "make_weight_scheme",
    "product_concentration",
    "run_simulation",
    "validate_problem",
]
