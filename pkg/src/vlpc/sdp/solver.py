"""Dense primal-dual interior-point solver for small SDPs.

The problem is mapped to the conic form

    minimize c^T x  s.t.  G x + s = h,  A x = b,  s in K,

where ``x`` stacks the svec of every block and the free scalars, ``K`` is
a nonnegative orthant (one slack per scalar inequality) times one PSD cone
per block (``G = -I`` on that block, ``h = 0``). It is solved through the
homogeneous self-dual embedding, so infeasible and unbounded problems are
detected from certificates instead of a phase-1. Directions are
Nesterov-Todd scaled with a Mehrotra predictor-corrector step, and the
scaled KKT system is solved densely with iterative refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .model import (
    INFEASIBLE, NUMERICAL_LIMIT, OPTIMAL, UNBOUNDED,
    SdpProblem, SdpSolution, smat, svec, svec_len,
)


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 100
    feastol: float = 1e-10
    abstol: float = 1e-10
    reltol: float = 1e-10
    # looser levels accepted when progress stalls
    stall_feastol: float = 1e-8
    stall_gaptol: float = 1e-8
    step_fraction: float = 0.99
    refinement: int = 2
    verbose: bool = False


class _Cone:
    """Orthant of size ``l`` followed by PSD blocks, with NT scaling state."""

    def __init__(self, l, sizes):
        self.l = l
        self.sizes = list(sizes)
        self.offsets = []
        off = l
        for n in self.sizes:
            self.offsets.append(off)
            off += svec_len(n)
        self.dim = off
        self.degree = l + sum(self.sizes)

    def split(self, v):
        parts = [v[self.offsets[k]:self.offsets[k] + svec_len(n)]
                 for k, n in enumerate(self.sizes)]
        return v[:self.l], parts

    def identity(self):
        e = np.zeros(self.dim)
        e[:self.l] = 1.0
        for k, n in enumerate(self.sizes):
            e[self.offsets[k]:self.offsets[k] + svec_len(n)] = svec(np.eye(n))
        return e

    def min_eig(self, v):
        lp, blocks = self.split(v)
        vals = [lp.min()] if self.l else []
        vals += [np.linalg.eigvalsh(smat(b, n))[0] for b, n in zip(blocks, self.sizes)]
        return min(vals) if vals else math.inf

    def inner(self, a, b):
        return float(a @ b)

    # -- NT scaling ------------------------------------------------------
    def init_scaling(self, s, z):
        """Scaling with ``W z = W^-T s = lambda``; returns False if not interior."""
        lp_s, bs = self.split(s)
        lp_z, bz = self.split(z)
        if self.l and (lp_s.min() <= 0 or lp_z.min() <= 0):
            return False
        self.d = np.sqrt(lp_s / lp_z) if self.l else np.zeros(0)
        self.lam_lp = np.sqrt(lp_s * lp_z) if self.l else np.zeros(0)
        self.r = []
        self.lam = []
        for vs, vz, n in zip(bs, bz, self.sizes):
            got = _nt_block(smat(vs, n), smat(vz, n))
            if got is None:
                return False
            self.r.append(got[0])
            self.lam.append(got[1])
        self._build()
        return True

    def _build(self):
        """Dense matrices of W and W^-1 on the svec coordinates."""
        w = np.zeros((self.dim, self.dim))
        winv = np.zeros((self.dim, self.dim))
        if self.l:
            w[:self.l, :self.l] = np.diag(self.d)  # W z = d z = sqrt(s z)
            winv[:self.l, :self.l] = np.diag(1.0 / self.d)
        for k, n in enumerate(self.sizes):
            o = self.offsets[k]
            m = svec_len(n)
            r = self.r[k]
            rinv = np.linalg.inv(r)
            w[o:o + m, o:o + m] = _congruence(r.T, n)  # Z -> R^T Z R
            winv[o:o + m, o:o + m] = _congruence(rinv.T, n)
        self.W = w
        self.Winv = winv

    def lam_vec(self):
        parts = [self.lam_lp] + [svec(np.diag(l)) for l in self.lam]
        return np.concatenate(parts)

    def lam_prod(self, v):
        """``lambda o v`` for the Jordan product of each cone."""
        lp, blocks = self.split(v)
        out = [self.lam_lp * lp]
        for l, b, n in zip(self.lam, blocks, self.sizes):
            m = smat(b, n)
            out.append(svec(0.5 * (l[:, None] * m + m * l[None, :])))
        return np.concatenate(out)

    def lam_div(self, v):
        """Inverse of ``lambda o .``."""
        lp, blocks = self.split(v)
        out = [lp / self.lam_lp] if self.l else [np.zeros(0)]
        for l, b, n in zip(self.lam, blocks, self.sizes):
            m = smat(b, n)
            out.append(svec(2.0 * m / (l[:, None] + l[None, :])))
        return np.concatenate(out)

    def jordan(self, a, b):
        la, ba = self.split(a)
        lb, bb = self.split(b)
        out = [la * lb]
        for x, y, n in zip(ba, bb, self.sizes):
            mx, my = smat(x, n), smat(y, n)
            out.append(svec(0.5 * (mx @ my + my @ mx)))
        return np.concatenate(out)

    def max_step(self, v):
        """Largest alpha with ``lambda + alpha v`` in the cone (inf if unbounded)."""
        lp, blocks = self.split(v)
        alpha = math.inf
        if self.l:
            neg = lp < 0
            if np.any(neg):
                alpha = min(alpha, float(np.min(-self.lam_lp[neg] / lp[neg])))
        for l, b, n in zip(self.lam, blocks, self.sizes):
            isq = 1.0 / np.sqrt(l)
            m = smat(b, n) * isq[:, None] * isq[None, :]
            e = np.linalg.eigvalsh(m)[0]
            if e < 0:
                alpha = min(alpha, -1.0 / e)
        return alpha


def _congruence(t, n):
    """Matrix of ``X -> t X t^T`` acting on svec coordinates."""
    m = svec_len(n)
    out = np.empty((m, m))
    basis = np.eye(m)
    for k in range(m):
        e = smat(basis[k], n)
        out[:, k] = svec(t @ e @ t.T)
    return out


def _nt_block(s, z):
    """R and lambda with ``R^-1 s R^-T = R^T z R = diag(lambda)``."""
    try:
        ls = np.linalg.cholesky(0.5 * (s + s.T))
        lz = np.linalg.cholesky(0.5 * (z + z.T))
    except np.linalg.LinAlgError:
        return None
    u, lam, vt = np.linalg.svd(lz.T @ ls)
    if lam.min() <= 0:
        return None
    r = ls @ vt.T / np.sqrt(lam)[None, :]
    return r, lam


def _independent_rows(a, b, tol=1e-10):
    """Drop linearly dependent equality rows; report inconsistency."""
    if a.shape[0] == 0:
        return a, b, True, np.zeros(0)
    q, r, piv = linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * max(diag.max(), 1.0)))
    keep = np.sort(piv[:rank])
    a_k, b_k = a[keep], b[keep]
    # consistency of the dropped rows: b must lie in the row space image
    sol, *_ = np.linalg.lstsq(a_k.T, a.T, rcond=None)  # a = sol^T a_k
    resid = b - sol.T @ b_k
    consistent = np.linalg.norm(resid) <= 1e-9 * (1.0 + np.linalg.norm(b))
    return a_k, b_k, consistent, resid


def assemble(problem: SdpProblem):
    """Conic data (c, G, h, A, b, l, sizes) for ``problem``."""
    sizes = [int(n) for n in problem.psd_blocks]
    offs = np.cumsum([0] + [svec_len(n) for n in sizes])
    nfree = problem.free_vars
    n = int(offs[-1]) + nfree

    def row(f):
        v = np.zeros(n)
        for j, c in f.blocks.items():
            v[offs[j]:offs[j + 1]] += svec(c)
        for k, c in f.free.items():
            v[offs[-1] + k] += c
        return v

    c = row(problem.objective)
    a = np.array([row(f) for f, _ in problem.eq_constraints]).reshape(-1, n)
    b = np.array([r for _, r in problem.eq_constraints], float)
    l = len(problem.ineq_constraints)
    g_lp = np.array([row(f) for f, _ in problem.ineq_constraints]).reshape(-1, n)
    h_lp = np.array([r for _, r in problem.ineq_constraints], float)
    g_psd = np.zeros((int(offs[-1]), n))
    g_psd[:, :offs[-1]] = -np.eye(int(offs[-1]))
    g = np.vstack([g_lp, g_psd])
    h = np.concatenate([h_lp, np.zeros(int(offs[-1]))])
    return c, g, h, a, b, l, sizes


def solve(problem: SdpProblem, options: SolverOptions | None = None) -> SdpSolution:
    """Solve ``problem``; never raises on numerical trouble."""
    opts = options or SolverOptions()
    problem.validate()
    c, g, h, a_full, b_full, l, sizes = assemble(problem)
    n = c.size
    a, b, consistent, resid = _independent_rows(a_full, b_full)
    if not consistent:
        # the affine hull alone is empty: y proportional to the residual certifies it
        y = resid / float(resid @ b_full)
        return _package(problem, INFEASIBLE, None, None, y, np.zeros(l), 0, {"reason": "equalities"},
                        sizes, l, certificate=True, a_map=None)
    p = a.shape[0]

    # free scalars that appear in no constraint
    used = np.any(g != 0, axis=0) | (np.any(a != 0, axis=0) if p else np.zeros(n, bool))
    if np.any(~used & (c != 0)):
        return _package(problem, UNBOUNDED, None, None, np.zeros(p), np.zeros(l), 0,
                        {"reason": "free variable unconstrained"}, sizes, l)
    cone = _Cone(l, sizes)
    ipm = _Hsde(c, g, h, a, b, cone, opts, used)
    status, x, s, y, z, iters, info = ipm.run()

    # map multipliers of the reduced equality set to the full list
    y_full = np.zeros(len(b_full))
    if p and y is not None:
        _, _, piv = linalg.qr(a_full.T, mode="economic", pivoting=True)
        keep = np.sort(piv[:p])
        y_full[keep] = y
    return _package(problem, status, x, z, -y_full, None, iters, info, sizes, l)


class _Hsde:
    def __init__(self, c, g, h, a, b, cone, opts, used):
        self.c, self.g, self.h, self.a, self.b = c, g, h, a, b
        self.cone, self.opts = cone, opts
        self.n, self.p, self.m = c.size, a.shape[0], cone.dim
        self.resx0 = max(1.0, np.linalg.norm(c))
        self.resy0 = max(1.0, np.linalg.norm(b))
        self.resz0 = max(1.0, np.linalg.norm(h))
        # free columns no constraint touches are pinned to zero in the KKT
        self.unused = ~used

    # dense KKT  [[0, A^T, Gs^T], [A, 0, 0], [Gs, 0, -I]] with Gs = W^-T G
    def factor(self, winvt):
        n, p, m = self.n, self.p, self.m
        gs = winvt @ self.g
        k = np.zeros((n + p + m, n + p + m))
        k[:n, n:n + p] = self.a.T
        k[n:n + p, :n] = self.a
        k[:n, n + p:] = gs.T
        k[n + p:, :n] = gs
        k[n + p:, n + p:] = -np.eye(m)
        if np.any(self.unused):
            idx = np.flatnonzero(self.unused)
            k[idx, idx] = 1.0
        self.kmat = k
        self.gs = gs
        self.lu = linalg.lu_factor(k, check_finite=False)

    def kkt(self, bx, by, bz):
        """Solve K [x; y; z] = [bx; by; bz] with bz in unscaled coordinates.

        Returns x, y and the unscaled z.
        """
        n, p = self.n, self.p
        rhs = np.concatenate([bx, by, self.winvt @ bz])
        sol = linalg.lu_solve(self.lu, rhs, check_finite=False)
        for _ in range(self.opts.refinement):
            r = rhs - self.kmat @ sol
            sol = sol + linalg.lu_solve(self.lu, r, check_finite=False)
        x, y, zs = sol[:n], sol[n:n + p], sol[n + p:]
        return x, y, self.winvt.T @ zs  # z = W^-1 z_scaled, with W^-1 = W^-T^T

    def run(self):
        c, g, h, a, b, cone, opts = self.c, self.g, self.h, self.a, self.b, self.cone, self.opts
        e = cone.identity()

        # initial point: least-norm primal and dual slacks with W = I
        self.winvt = np.eye(self.m)
        try:
            self.factor(self.winvt)
        except (ValueError, linalg.LinAlgError):
            return NUMERICAL_LIMIT, None, None, np.zeros(self.p), None, 0, {"reason": "singular KKT"}
        x, _, zneg = self.kkt(np.zeros(self.n), b, h)
        s = -zneg  # G x - z = h  ->  s = h - G x
        _, y, z = self.kkt(-c, np.zeros(self.p), np.zeros(self.m))
        for v in (s, z):
            ts = -cone.min_eig(v)
            if ts >= -1e-8 * max(np.linalg.norm(v), 1.0):
                v += (1.0 + ts) * e
        tau, kappa = 1.0, 1.0

        best = None
        info = {}
        status = NUMERICAL_LIMIT
        it = 0
        for it in range(opts.max_iters + 1):
            if it == 0 and not cone.init_scaling(s, z):
                info["reason"] = "initial point not interior"
                break
            # residuals of the embedding
            rx = a.T @ y + g.T @ z + c * tau
            ry = a @ x - b * tau if self.p else np.zeros(0)
            rz = g @ x + s - h * tau
            cx, by_, hz = float(c @ x), float(b @ y), float(h @ z)
            rt = kappa + cx + by_ + hz
            gap = float(s @ z)
            mu = (gap + tau * kappa) / (cone.degree + 1)

            pcost, dcost = cx / tau, -(hz + by_) / tau
            pres = max(np.linalg.norm(ry) / tau / self.resy0 if self.p else 0.0,
                       np.linalg.norm(rz) / tau / self.resz0)
            dres = np.linalg.norm(rx) / tau / self.resx0
            gap_t = gap / tau**2
            relgap = None
            if pcost < 0:
                relgap = gap_t / -pcost
            elif dcost > 0:
                relgap = gap_t / dcost
            pinf = dinf = math.inf
            if hz + by_ < 0:
                pinf = np.linalg.norm(a.T @ y + g.T @ z) / self.resx0 / -(hz + by_)
            if cx < 0:
                dinf = max(np.linalg.norm(a @ x) / self.resy0 if self.p else 0.0,
                           np.linalg.norm(g @ x + s) / self.resz0) / -cx
            info = dict(pres=pres, dres=dres, gap=gap_t, pcost=pcost, dcost=dcost,
                        pinf=pinf, dinf=dinf, iterations=it)

            if opts.verbose:
                print(f"{it:3d} pcost {pcost: .8e} dcost {dcost: .8e} gap {gap_t:.1e} "
                      f"pres {pres:.1e} dres {dres:.1e} tau {tau:.1e} kappa {kappa:.1e}")
            score = max(pres, dres, min(gap_t, relgap if relgap is not None else math.inf))
            if best is None or score < best[0]:
                best = (score, x / tau, s / tau, y / tau, z / tau, dict(info))

            if pres <= opts.feastol and dres <= opts.feastol and (
                gap_t <= opts.abstol or (relgap is not None and relgap <= opts.reltol)
            ):
                return OPTIMAL, x / tau, s / tau, y / tau, z / tau, it, info
            if pinf <= opts.feastol:
                return INFEASIBLE, None, None, y / -(hz + by_), z / -(hz + by_), it, info
            if dinf <= opts.feastol:
                return UNBOUNDED, x / -cx, s / -cx, y, None, it, info
            if it == opts.max_iters:
                info["reason"] = "iteration limit"
                break

            self.winvt = cone.Winv.T  # W^-T
            try:
                self.factor(self.winvt)
            except (ValueError, linalg.LinAlgError):
                info["reason"] = "singular KKT"
                break
            lam = cone.lam_vec()
            lam_sq = cone.lam_prod(lam)

            d_aff = self._direction(lam, lam_sq, rx, ry, rz, rt, tau, kappa, mu,
                                    sigma=0.0, corr=None)
            if d_aff is None:
                info["reason"] = "direction failed"
                break
            dx, dy, dz, dt, ds, dk, ds_sc, dz_sc = d_aff
            alpha = self._step(ds_sc, dz_sc, tau, kappa, dt, dk)
            sigma = (1.0 - min(alpha, 1.0)) ** 3
            corr = (cone.jordan(ds_sc, dz_sc), dt * dk)
            d = self._direction(lam, lam_sq, rx, ry, rz, rt, tau, kappa, mu,
                                sigma=sigma, corr=corr)
            if d is None:
                info["reason"] = "direction failed"
                break
            dx, dy, dz, dt, ds, dk, ds_sc, dz_sc = d
            alpha = min(1.0, opts.step_fraction * self._step(ds_sc, dz_sc, tau, kappa, dt, dk))
            if not alpha > 1e-14:
                info["reason"] = "step too short"
                break
            x = x + alpha * dx
            y = y + alpha * dy
            tau = tau + alpha * dt
            kappa = kappa + alpha * dk
            s = s + alpha * ds
            z = z + alpha * dz
            # recomputing the scaling from (s, z) keeps the iterates and W
            # consistent; composing updates drifts once mu is tiny
            if not cone.init_scaling(s, z):
                info["reason"] = "lost interiority"
                break
            if not (np.all(np.isfinite(x)) and np.isfinite(tau)):
                info["reason"] = "non-finite iterate"
                break

        # stalled: accept the best iterate if it meets the looser contract levels
        score, xb, sb, yb, zb, ib = best
        ib.update(reason=info.get("reason", "stalled"))
        if (ib["pres"] <= opts.stall_feastol and ib["dres"] <= opts.stall_feastol
                and ib["gap"] <= opts.stall_gaptol * (1.0 + abs(ib["pcost"]))):
            return OPTIMAL, xb, sb, yb, zb, it, ib
        if ib["pinf"] <= opts.stall_feastol and hz + by_ < 0:
            return INFEASIBLE, None, None, y / -(hz + by_), z / -(hz + by_), it, ib
        return status, xb, sb, yb, zb, it, ib

    def _direction(self, lam, lam_sq, rx, ry, rz, rt, tau, kappa, mu, sigma, corr):
        cone = self.cone
        eta = 1.0 - sigma
        e = cone.identity()
        ds_target = -lam_sq + sigma * mu * e
        dk_target = -tau * kappa + sigma * mu
        if corr is not None:
            ds_target = ds_target - corr[0]
            dk_target = dk_target - corr[1]
        rs = cone.lam_div(ds_target)  # ds_sc + dz_sc = rs
        w_t = cone.W.T
        bx = -eta * rx
        by = -eta * ry
        bz = -eta * rz - w_t @ rs
        try:
            px, py, pz = self.kkt(bx, by, bz)
            qx, qy, qz = self.kkt(-self.c, self.b, self.h)
        except (ValueError, linalg.LinAlgError):
            return None
        bt = -eta * rt - dk_target / tau
        den = float(self.c @ qx + self.b @ qy + self.h @ qz) - kappa / tau
        if den == 0.0 or not np.isfinite(den):
            return None
        dt = (bt - float(self.c @ px + self.b @ py + self.h @ pz)) / den
        dx = px + dt * qx
        dy = py + dt * qy
        dz = pz + dt * qz
        dk = (dk_target - kappa * dt) / tau
        dz_sc = cone.W @ dz
        # take ds from the primal equation G dx + ds - h dt = -eta rz so it
        # holds exactly; back-substituting through complementarity instead
        # amplifies KKT error by W^T near the boundary
        ds = -eta * rz + self.h * dt - self.g @ dx
        ds_sc = self.winvt @ ds
        return dx, dy, dz, dt, ds, dk, ds_sc, dz_sc

    def _step(self, ds_sc, dz_sc, tau, kappa, dt, dk):
        alpha = min(self.cone.max_step(ds_sc), self.cone.max_step(dz_sc))
        if dt < 0:
            alpha = min(alpha, -tau / dt)
        if dk < 0:
            alpha = min(alpha, -kappa / dk)
        return alpha


def _package(problem, status, x, z, y, w, iters, info, sizes, l, certificate=False, a_map=None):
    nfree = problem.free_vars
    offs = np.cumsum([0] + [svec_len(n) for n in sizes])
    if x is not None:
        blocks = [smat(x[offs[k]:offs[k + 1]], n) for k, n in enumerate(sizes)]
        free = np.array(x[offs[-1]:offs[-1] + nfree], float)
    else:
        blocks = [np.full((n, n), np.nan) for n in sizes]
        free = np.full(nfree, np.nan)
    if z is not None:
        w = np.array(z[:l], float)
        zb = [smat(z[l + offs[k]:l + offs[k + 1]], n) for k, n in enumerate(sizes)]
    else:
        w = np.zeros(l) if w is None else w
        zb = [np.full((n, n), np.nan) for n in sizes]
    y = np.zeros(len(problem.eq_constraints)) if y is None else np.asarray(y, float)
    obj = problem.objective.value(blocks, free) if x is not None else math.nan
    rhs_eq = np.array([r for _, r in problem.eq_constraints], float)
    rhs_in = np.array([r for _, r in problem.ineq_constraints], float)
    dual = float(rhs_eq @ y - rhs_in @ w) if (z is not None or certificate) else math.nan
    gap = abs(obj - dual) if status == OPTIMAL else math.nan
    return SdpSolution(status=status, blocks=blocks, free=free, y=y, w=w, z_blocks=zb,
                       objective=obj, dual_objective=dual, gap=gap,
                       iterations=iters, info=info)
