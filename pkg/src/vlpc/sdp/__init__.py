"""Small dense SDP facility: model, interior-point solver, audit."""

from .model import (
    INFEASIBLE, NUMERICAL_LIMIT, OPTIMAL, UNBOUNDED,
    LinearFunctional, SdpProblem, SdpSolution, dumps, entry, loads, smat, svec,
)
from .solver import SolverOptions, solve
from .verify import VerifyReport, verify_solution

__all__ = [
    "INFEASIBLE", "NUMERICAL_LIMIT", "OPTIMAL", "UNBOUNDED",
    "LinearFunctional", "SdpProblem", "SdpSolution", "SolverOptions",
    "VerifyReport", "dumps", "entry", "loads", "smat", "solve", "svec",
    "verify_solution",
]
