"""LP layer: problem container, simplex solver, verification and LP export."""

from .lpfile import emit_lp_file
from .problem import FEAS_TOL, LpProblem, LpSolution, Row, SolutionCheck, Status, check_solution
from .simplex import BACKEND, KERNELS, solve

__all__ = [
    "BACKEND",
    "FEAS_TOL",
    "KERNELS",
    "LpProblem",
    "LpSolution",
    "Row",
    "SolutionCheck",
    "Status",
    "check_solution",
    "emit_lp_file",
    "solve",
]
