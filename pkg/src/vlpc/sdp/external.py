"""Adapter seam for cross-checking against an external conic solver.

Requires the optional ``cvxpy`` dependency; import errors surface only when
the adapter is actually used.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (
    INFEASIBLE, NUMERICAL_LIMIT, OPTIMAL, UNBOUNDED, SdpProblem, SdpSolution,
)


def solve_external(problem: SdpProblem, solver: str | None = None) -> SdpSolution:
    """Solve ``problem`` with cvxpy and map the result to SdpSolution.

    Primal values, objective and status are comparable with the built-in
    solver; the multipliers keep cvxpy's own sign conventions.
    """
    import cvxpy as cp

    problem.validate()
    xs = [cp.Variable((n, n), symmetric=True) for n in problem.psd_blocks]
    fs = cp.Variable(problem.free_vars) if problem.free_vars else None

    def expr(f):
        terms = [cp.trace(np.asarray(c) @ xs[j]) for j, c in f.blocks.items()]
        terms += [c * fs[k] for k, c in f.free.items()]
        return cp.sum(cp.hstack(terms)) if terms else cp.Constant(0.0)

    eqs = [expr(f) == r for f, r in problem.eq_constraints]
    ins = [expr(f) <= r for f, r in problem.ineq_constraints]
    cones = [x >> 0 for x in xs]
    prob = cp.Problem(cp.Minimize(expr(problem.objective)), eqs + ins + cones)
    prob.solve(solver=solver)
    status = {
        cp.OPTIMAL: OPTIMAL,
        cp.INFEASIBLE: INFEASIBLE,
        cp.UNBOUNDED: UNBOUNDED,
    }.get(prob.status, NUMERICAL_LIMIT)
    if status == OPTIMAL:
        blocks = [np.asarray(x.value) for x in xs]
        free = np.asarray(fs.value) if fs is not None else np.zeros(0)
        y = np.array([float(np.squeeze(c.dual_value)) for c in eqs])
        w = np.array([float(np.squeeze(c.dual_value)) for c in ins])
        zb = [np.asarray(c.dual_value) for c in cones]
        obj = float(prob.value)
    else:
        blocks = [np.full((n, n), np.nan) for n in problem.psd_blocks]
        free = np.full(problem.free_vars, np.nan)
        y = np.zeros(len(eqs))
        w = np.zeros(len(ins))
        zb = [np.full((n, n), np.nan) for n in problem.psd_blocks]
        obj = math.nan
    return SdpSolution(status=status, blocks=blocks, free=free, y=y, w=w, z_blocks=zb,
                       objective=obj, dual_objective=math.nan, gap=math.nan,
                       iterations=0, info={"external_status": prob.status})
