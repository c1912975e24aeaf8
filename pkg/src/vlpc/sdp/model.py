"""Standard-form SDP data model.

A problem has symmetric matrix variables ``X_j`` (one per PSD block) and
unconstrained scalars ``f_k``. Linear functionals act as
``sum_j <C_j, X_j> + sum_k c_k f_k`` with the trace inner product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SQRT2 = math.sqrt(2.0)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_LIMIT = "numerical-limit"
STATUSES = (OPTIMAL, INFEASIBLE, UNBOUNDED, NUMERICAL_LIMIT)


@dataclass(frozen=True)
class LinearFunctional:
    blocks: dict = field(default_factory=dict)  # block index -> symmetric matrix
    free: dict = field(default_factory=dict)  # free index -> coefficient

    def value(self, blocks, free) -> float:
        out = 0.0
        for j, c in self.blocks.items():
            out += float(np.sum(c * blocks[j]))
        for k, c in self.free.items():
            out += c * float(free[k])
        return out


def entry(n: int, i: int, j: int, value: float = 1.0) -> np.ndarray:
    """Coefficient matrix that picks ``value * X[i, j]`` from an n x n block.

    Off-diagonal positions get half the value on both sides so that
    ``<E, X> = value * X[i, j]`` for symmetric X.
    """
    e = np.zeros((n, n))
    if i == j:
        e[i, i] = value
    else:
        e[i, j] = e[j, i] = 0.5 * value
    return e


@dataclass
class SdpProblem:
    psd_blocks: list
    free_vars: int = 0
    objective: LinearFunctional = field(default_factory=LinearFunctional)
    eq_constraints: list = field(default_factory=list)  # (functional, rhs): f = rhs
    ineq_constraints: list = field(default_factory=list)  # (functional, rhs): f <= rhs
    names: dict = field(default_factory=dict)  # optional labels for blocks

    def add_eq(self, functional: LinearFunctional, rhs: float):
        self.eq_constraints.append((functional, float(rhs)))

    def add_ineq(self, functional: LinearFunctional, rhs: float):
        self.ineq_constraints.append((functional, float(rhs)))

    def validate(self):
        """Raise ValueError on inconsistent dimensions or asymmetric data."""
        probs = []
        for j, n in enumerate(self.psd_blocks):
            if int(n) != n or n < 1:
                probs.append(f"block {j}: size {n!r} is not a positive integer")
        funcs = [("objective", self.objective)]
        funcs += [(f"eq[{i}]", f) for i, (f, _) in enumerate(self.eq_constraints)]
        funcs += [(f"ineq[{i}]", f) for i, (f, _) in enumerate(self.ineq_constraints)]
        for name, f in funcs:
            for j, c in f.blocks.items():
                if not 0 <= j < len(self.psd_blocks):
                    probs.append(f"{name}: unknown block {j}")
                    continue
                c = np.asarray(c)
                n = self.psd_blocks[j]
                if c.shape != (n, n):
                    probs.append(f"{name}: block {j} coefficient has shape {c.shape}, want {(n, n)}")
                elif not np.allclose(c, c.T, rtol=0, atol=1e-12 * (1 + np.abs(c).max())):
                    probs.append(f"{name}: block {j} coefficient is not symmetric")
            for k in f.free:
                if not 0 <= k < self.free_vars:
                    probs.append(f"{name}: unknown free variable {k}")
        if probs:
            raise ValueError("; ".join(probs))

    @property
    def n_vars(self) -> int:
        return sum(n * (n + 1) // 2 for n in self.psd_blocks) + self.free_vars


@dataclass
class SdpSolution:
    status: str
    blocks: list  # primal X_j (or a primal ray when unbounded)
    free: np.ndarray
    y: np.ndarray  # equality multipliers
    w: np.ndarray  # inequality multipliers, >= 0
    z_blocks: list  # dual slack matrices Z_j
    objective: float
    dual_objective: float
    gap: float
    iterations: int
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def svec_len(n: int) -> int:
    return n * (n + 1) // 2


def svec(a) -> np.ndarray:
    """Lower-triangle vectorization, column-major, off-diagonals times sqrt2."""
    a = np.asarray(a, float)
    n = a.shape[0]
    rows, cols = np.tril_indices(n)
    order = np.lexsort((rows, cols))
    rows, cols = rows[order], cols[order]
    v = a[rows, cols].copy()
    v[rows != cols] *= SQRT2
    return v


def smat(v, n: int) -> np.ndarray:
    v = np.asarray(v, float)
    rows, cols = np.tril_indices(n)
    order = np.lexsort((rows, cols))
    rows, cols = rows[order], cols[order]
    vals = v.copy()
    vals[rows != cols] /= SQRT2
    a = np.zeros((n, n))
    a[rows, cols] = vals
    a[cols, rows] = vals
    return a


# plain-text dump format
#   sdp 1
#   blocks <n_1> ... <n_k>
#   free <count>
#   objective
#   eq <rhs> | ineq <rhs>
# each section header is followed by sparse entries
#   B <block> <i> <j> <value>   (i >= j, coefficient of X[i, j] in <C, X>)
#   F <index> <value>
# and a terminating ``end`` line.


def _entries(f: LinearFunctional):
    out = []
    for j in sorted(f.blocks):
        c = np.asarray(f.blocks[j], float)
        n = c.shape[0]
        for col in range(n):
            for row in range(col, n):
                val = c[row, col] if row == col else 2.0 * c[row, col]
                if val != 0.0:
                    out.append(f"B {j} {row} {col} {float(val)!r}")
    for k in sorted(f.free):
        if f.free[k] != 0.0:
            out.append(f"F {k} {float(f.free[k])!r}")
    return out


def dumps(problem: SdpProblem) -> str:
    lines = ["sdp 1", "blocks " + " ".join(str(n) for n in problem.psd_blocks),
             f"free {problem.free_vars}", "objective"]
    lines += _entries(problem.objective)
    for f, rhs in problem.eq_constraints:
        lines.append(f"eq {float(rhs)!r}")
        lines += _entries(f)
    for f, rhs in problem.ineq_constraints:
        lines.append(f"ineq {float(rhs)!r}")
        lines += _entries(f)
    lines.append("end")
    return "\n".join(lines) + "\n"


def loads(text: str) -> SdpProblem:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != "sdp 1":
        raise ValueError("not an sdp dump (missing 'sdp 1' header)")
    blocks = [int(t) for t in lines[1].split()[1:]]
    free = int(lines[2].split()[1])
    prob = SdpProblem(psd_blocks=blocks, free_vars=free)
    current = None

    def start(kind, rhs=None):
        f = LinearFunctional({}, {})
        if kind == "objective":
            prob.objective = f
        elif kind == "eq":
            prob.eq_constraints.append((f, rhs))
        else:
            prob.ineq_constraints.append((f, rhs))
        return f

    for ln in lines[3:]:
        tok = ln.split()
        if tok[0] == "objective":
            current = start("objective")
        elif tok[0] in ("eq", "ineq"):
            current = start(tok[0], float(tok[1]))
        elif tok[0] == "B":
            j, row, col, val = int(tok[1]), int(tok[2]), int(tok[3]), float(tok[4])
            mat = current.blocks.setdefault(j, np.zeros((blocks[j], blocks[j])))
            if row == col:
                mat[row, row] += val
            else:
                mat[row, col] += 0.5 * val
                mat[col, row] += 0.5 * val
        elif tok[0] == "F":
            k = int(tok[1])
            current.free[k] = current.free.get(k, 0.0) + float(tok[2])
        elif tok[0] == "end":
            break
        else:
            raise ValueError(f"unrecognized line {ln!r}")
    return prob
