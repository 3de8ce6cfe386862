"""Stability certificates and simulation for scalar delay differential equations."""

from .criteria import (
    CRITERIA,
    LimsupEstimate,
    Verdict,
    check_linear,
    check_nonoscillation_1e,
    check_problem,
    check_thm1,
    check_thm2,
    check_thm5,
    estimate_thm2_params,
    invert_delay_bound,
)
from .errors import (
    BlowUpError,
    DelayStabError,
    DomainError,
    ExtrapolationError,
    InsufficientDataError,
    PreconditionError,
    SchemaError,
)
from .mackeyglass import MGParams, derive_mg, mg_attractor_bound, solve_equilibrium
from .model import LinearDDE, NonlinearDDE
from .solver import IntegratorConfig, Trajectory, integrate_linear, integrate_nonlinear

__version__ = "0.1.0"

__all__ = [
    "CRITERIA", "LimsupEstimate", "Verdict", "check_linear", "check_nonoscillation_1e", "check_problem",
    "check_thm1", "check_thm2", "check_thm5", "estimate_thm2_params", "invert_delay_bound",
    "BlowUpError", "DelayStabError", "DomainError", "ExtrapolationError", "InsufficientDataError",
    "PreconditionError", "SchemaError", "MGParams", "derive_mg", "mg_attractor_bound", "solve_equilibrium",
    "LinearDDE", "NonlinearDDE", "IntegratorConfig", "Trajectory", "integrate_linear", "integrate_nonlinear",
]
