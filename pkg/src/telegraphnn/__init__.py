"""Telegraph-equation solver with orthogonal-polynomial network activations."""

from .autodiff import Jet2, Var, grad_params
from .metrics import ErrorReport, error_report
from .network import Architecture, ParamSet, forward, init_params
from .orthopoly import PolyFamily, eval_basis, eval_jacobi
from .telegraph import (
    CollocationSet,
    LossReport,
    TelegraphProblem,
    example1,
    example2,
    example3,
    example4,
)

__version__ = "0.1.0"


def has_compiled_backend() -> bool:
    from .engine import available_backends

    return "ext" in available_backends()
