"""Independent audit of SDP solutions.

Works from the problem data with plain trace inner products and SciPy's
symmetric eigensolver, so nothing is shared with the solver's svec/KKT
machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .model import INFEASIBLE, OPTIMAL, SdpProblem, SdpSolution

PSD_TOL = 1e-8
FEAS_TOL = 1e-7
GAP_TOL = 1e-7


@dataclass
class Check:
    passed: bool
    value: float
    limit: float


@dataclass
class VerifyReport:
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self):
        return [k for k, c in self.checks.items() if not c.passed]

    def __str__(self):
        lines = [f"{'PASS' if c.passed else 'FAIL'} {k}: {c.value:.3e} (limit {c.limit:.1e})"
                 for k, c in self.checks.items()]
        return "\n".join(lines)


def _ip(a, b):
    return float(np.sum(np.asarray(a) * np.asarray(b)))


def _min_eig(mat):
    mat = np.asarray(mat, float)
    return float(eigh(0.5 * (mat + mat.T), eigvals_only=True)[0])


def _dual_slacks(problem, y, w, with_objective=True):
    """``Z_j = C_j - sum_i y_i A_ij + sum_k w_k G_kj`` and the free-part residual."""
    zs = []
    for j, n in enumerate(problem.psd_blocks):
        z = np.array(problem.objective.blocks.get(j, np.zeros((n, n))), float) \
            if with_objective else np.zeros((n, n))
        for yi, (f, _) in zip(y, problem.eq_constraints):
            if j in f.blocks:
                z = z - yi * np.asarray(f.blocks[j])
        for wk, (f, _) in zip(w, problem.ineq_constraints):
            if j in f.blocks:
                z = z + wk * np.asarray(f.blocks[j])
        zs.append(z)
    free_res = np.zeros(problem.free_vars)
    for k in range(problem.free_vars):
        v = problem.objective.free.get(k, 0.0) if with_objective else 0.0
        v -= sum(yi * f.free.get(k, 0.0) for yi, (f, _) in zip(y, problem.eq_constraints))
        v += sum(wk * f.free.get(k, 0.0) for wk, (f, _) in zip(w, problem.ineq_constraints))
        free_res[k] = v
    return zs, free_res


def verify_solution(problem: SdpProblem, solution: SdpSolution) -> VerifyReport:
    """Check the invariants that back ``solution.status``."""
    rep = VerifyReport()
    c = rep.checks
    if solution.status == INFEASIBLE:
        y = np.asarray(solution.y, float)
        w = np.asarray(solution.w, float)
        zs, free_res = _dual_slacks(problem, y, w, with_objective=False)
        bty = sum(yi * r for yi, (_, r) in zip(y, problem.eq_constraints))
        rtw = sum(wk * r for wk, (_, r) in zip(w, problem.ineq_constraints))
        val = bty - rtw
        c["certificate_objective"] = Check(val > 0, val, 0.0)
        worst = min([_min_eig(z) for z in zs] + [0.0])
        c["certificate_psd"] = Check(worst >= -FEAS_TOL * max(1.0, abs(val)), worst, -FEAS_TOL)
        fr = float(np.abs(free_res).max()) if free_res.size else 0.0
        c["certificate_free"] = Check(fr <= FEAS_TOL * max(1.0, abs(val)), fr, FEAS_TOL)
        wmin = float(w.min()) if w.size else 0.0
        c["certificate_sign"] = Check(wmin >= -FEAS_TOL, wmin, -FEAS_TOL)
        return rep

    blocks, free = solution.blocks, solution.free
    if any(not np.all(np.isfinite(b)) for b in blocks):
        c["finite"] = Check(False, math.nan, 0.0)
        return rep
    for j, x in enumerate(blocks):
        e = _min_eig(x)
        lim = -PSD_TOL * (1.0 + float(np.linalg.norm(x, 2)))
        c[f"psd[{j}]"] = Check(e >= lim, e, lim)
    worst_eq = 0.0
    for f, r in problem.eq_constraints:
        worst_eq = max(worst_eq, abs(f.value(blocks, free) - r))
    c["equality"] = Check(worst_eq <= FEAS_TOL, worst_eq, FEAS_TOL)
    worst_in = 0.0
    for f, r in problem.ineq_constraints:
        worst_in = max(worst_in, f.value(blocks, free) - r)
    c["inequality"] = Check(worst_in <= FEAS_TOL, worst_in, FEAS_TOL)

    if solution.status == OPTIMAL:
        y = np.asarray(solution.y, float)
        w = np.asarray(solution.w, float)
        zs, free_res = _dual_slacks(problem, y, w)
        worst = min([_min_eig(z) for z in zs] + [0.0])
        c["dual_psd"] = Check(worst >= -PSD_TOL, worst, -PSD_TOL)
        fr = float(np.abs(free_res).max()) if free_res.size else 0.0
        c["dual_free"] = Check(fr <= FEAS_TOL, fr, FEAS_TOL)
        wmin = float(w.min()) if w.size else 0.0
        c["dual_sign"] = Check(wmin >= -FEAS_TOL, wmin, -FEAS_TOL)
        primal = problem.objective.value(blocks, free)
        dual = sum(yi * r for yi, (_, r) in zip(y, problem.eq_constraints)) - \
            sum(wk * r for wk, (_, r) in zip(w, problem.ineq_constraints))
        gap = abs(primal - dual)
        lim = GAP_TOL * (1.0 + abs(primal))
        c["gap"] = Check(gap <= lim, gap, lim)
    return rep
