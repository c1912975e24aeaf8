"""CVaR-robust power allocation between positioning and communication.

Pipeline: worst-case CVaR over the moment ambiguity set as an SDP, the
VLC subproblem (minimal communication power meeting the rate outage
target under CSI uncertainty), the closed-form VLP update, and the block
coordinate descent loop that alternates the two.

Gains are O(1e-5) while powers are O(1), so every SDP is assembled in
units of ``g = ||h_hat||``: ``h_hat/g``, ``mu/g``, ``D/g^2`` and
``delta/g^2``. The communication power is unchanged by this rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import sdp
from .csi import DEFAULT_SAMPLES, DEFAULT_SEED, CsiMoments, csi_moments, sqrt_psd
from .errors import DomainError, InfeasibleError
from .fisher import crlb_covariance, crlb_trace, fim
from .ook import delta_threshold, max_lower_bound_rate
from .scenario import Scenario, gain_vector
from .sdp import LinearFunctional, SdpProblem, entry

RANK1_TOL = 1e-6
N_CANDIDATES = 100


@dataclass(frozen=True)
class AllocationConfig:
    p_total: float
    rbar: float
    p_out: float
    p_p_max: float
    p_c_max: float
    bcd_tol: float = 1e-7
    max_iters: int = 30

    def __post_init__(self):
        if not 0.0 < self.p_out < 1.0:
            raise DomainError("p_out must lie in (0, 1)")
        if self.p_total <= 0:
            raise DomainError("p_total must be positive")
        if self.rbar < 0:
            raise DomainError("rbar must be non-negative")
        if self.p_p_max < 0 or self.p_c_max < 0:
            raise DomainError("power caps must be non-negative")
        if self.bcd_tol <= 0 or self.max_iters < 1:
            raise DomainError("bcd_tol must be positive and max_iters >= 1")

    @classmethod
    def from_scenario(cls, scenario: Scenario, p_total, rbar, p_out, **kw):
        return cls(p_total=float(p_total), rbar=float(rbar), p_out=float(p_out),
                   p_p_max=scenario.p_p_max, p_c_max=scenario.p_c_max, **kw)

    @property
    def p_c_bound(self) -> float:
        return min(self.p_c_max, self.p_total)


@dataclass(frozen=True)
class CvarCertificate:
    w: np.ndarray  # (M+1) x (M+1) auxiliary matrix, original gain units
    beta: float
    t: float  # surrogate for delta / P_c


@dataclass(frozen=True)
class VlcContext:
    """Data of one VLC subproblem in normalized units."""

    h_hat: np.ndarray
    omega: np.ndarray
    delta: float
    p_out: float
    p_c_bound: float
    gain_scale: float

    @classmethod
    def build(cls, h_hat, omega, delta, config: AllocationConfig):
        if not delta > 0:
            raise DomainError("delta must be positive")
        h_hat = np.asarray(h_hat, float)
        g = float(np.linalg.norm(h_hat))
        if g <= 0:
            raise DomainError("estimated channel is identically zero")
        om = np.array(omega, float)
        m = h_hat.size
        om[:m, :m] /= g * g
        om[:m, m] /= g
        om[m, :m] /= g
        return cls(h_hat / g, om, float(delta) / (g * g), config.p_out,
                   config.p_c_bound, g)


@dataclass
class VlcSolution:
    p_c: float
    v_matrix: np.ndarray
    certificate: CvarCertificate
    rank_ratio: float
    solution: sdp.SdpSolution
    problem: SdpProblem


@dataclass
class AllocationResult:
    p_p: float
    p_c: float
    v_matrix: np.ndarray
    v: np.ndarray
    crlb: float
    trace: list  # (objective, p_p, p_c) per iteration
    rank1: bool
    converged: bool
    iterations: int
    moments: CsiMoments
    certificate: CvarCertificate
    h_hat: np.ndarray
    delta: float
    init: str
    info: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# worst-case CVaR


def worst_case_cvar_quadratic(q_mat, q_vec, q0, mu, sigma, rho,
                              options: sdp.SolverOptions | None = None) -> float:
    """Worst-case CVaR_rho of ``xi^T Q xi + q^T xi + q0`` over all laws with
    mean ``mu`` and covariance ``sigma``.

    Solves ``min beta + Tr(Omega M) / rho`` over ``M >= 0`` with
    ``M - [[Q, q/2], [q^T/2, q0 - beta]] >= 0``.
    """
    q_mat = np.atleast_2d(np.asarray(q_mat, float))
    q_vec = np.atleast_1d(np.asarray(q_vec, float))
    mu = np.atleast_1d(np.asarray(mu, float))
    sigma = np.atleast_2d(np.asarray(sigma, float))
    if not 0.0 < rho < 1.0:
        raise DomainError("rho must lie in (0, 1)")
    sqrt_psd(sigma, "Sigma")
    n = mu.size
    k = n + 1
    qbar = np.zeros((k, k))
    qbar[:n, :n] = 0.5 * (q_mat + q_mat.T)
    qbar[:n, n] = qbar[n, :n] = 0.5 * q_vec
    qbar[n, n] = q0
    om = np.zeros((k, k))
    om[:n, :n] = sigma + np.outer(mu, mu)
    om[:n, n] = om[n, :n] = mu
    om[n, n] = 1.0

    # blocks: 0 -> M, 1 -> S = M - qbar + beta E; free 0 -> beta
    prob = SdpProblem(psd_blocks=[k, k], free_vars=1)
    prob.objective = LinearFunctional({0: om / rho}, {0: 1.0})
    for j in range(k):
        for i in range(j, k):
            e = entry(k, i, j)
            free = {0: -1.0} if i == j == n else {}
            prob.add_eq(LinearFunctional({1: e, 0: -e}, free), -qbar[i, j])
    sol = sdp.solve(prob, options)
    if sol.status != sdp.OPTIMAL:
        raise InfeasibleError(f"worst-case CVaR SDP ended with status {sol.status}",
                              status=sol.status)
    return sol.objective


# ---------------------------------------------------------------------------
# VLC subproblem


def _lift(h):
    m = h.size
    p = np.zeros((m + 1, m))
    p[:m] = np.eye(m)
    p[m] = h
    return p


def _vlc_problem(ctx: VlcContext, v_fixed=None) -> SdpProblem:
    m = ctx.h_hat.size
    k = m + 1
    lift = _lift(ctx.h_hat)
    if v_fixed is None:
        blocks = [m, k, k, 2]  # V, W, S, T
        iv, iw, is_, it = 0, 1, 2, 3
    else:
        blocks = [k, k, 2]
        iv, iw, is_, it = None, 0, 1, 2
    prob = SdpProblem(psd_blocks=blocks, free_vars=1,
                      names={"V": iv, "W": iw, "S": is_, "T": it})
    prob.objective = LinearFunctional({it: entry(2, 1, 1)})
    if iv is not None:
        prob.add_eq(LinearFunctional({iv: np.eye(m)}), 1.0)
    prob.add_eq(LinearFunctional({it: entry(2, 0, 1)}), math.sqrt(ctx.delta))
    pvp = None if v_fixed is None else lift @ np.outer(v_fixed, v_fixed) @ lift.T
    # S = W + P V P^T + (beta - t) E_kk, entrywise on the lower triangle
    for j in range(k):
        for i in range(j, k):
            e = entry(k, i, j)
            terms = {is_: e, iw: -e}
            free = {}
            if i == j == m:
                free = {0: -1.0}
                terms[it] = entry(2, 0, 0)
            if iv is not None:
                terms[iv] = -(lift.T @ e @ lift)
                rhs = 0.0
            else:
                rhs = pvp[i, j]
            prob.add_eq(LinearFunctional(terms, free), rhs)
    prob.add_ineq(LinearFunctional({iw: ctx.omega / ctx.p_out}, {0: 1.0}), 0.0)
    prob.add_ineq(LinearFunctional({it: entry(2, 1, 1)}), ctx.p_c_bound)
    return prob


def build_vlc_sdp(scenario: Scenario, h_hat, omega, delta, config: AllocationConfig,
                  p_c_bound=None) -> SdpProblem:
    """Assemble the relaxed VLC subproblem (blocks V, W, S, T; free beta)."""
    ctx = VlcContext.build(h_hat, omega, delta, config)
    if p_c_bound is not None:
        ctx = VlcContext(ctx.h_hat, ctx.omega, ctx.delta, ctx.p_out, float(p_c_bound),
                         ctx.gain_scale)
    return _vlc_problem(ctx)


def _certificate(ctx, sol, prob):
    n = prob.names
    g2 = ctx.gain_scale**2
    w = sol.blocks[n["W"]] * g2
    beta = float(sol.free[0]) * g2
    t = float(sol.blocks[n["T"]][0, 0]) * g2
    return CvarCertificate(w=w, beta=beta, t=t)


def _check(sol, prob, what):
    if sol.status != sdp.OPTIMAL:
        raise InfeasibleError(f"{what}: solver status {sol.status}", status=sol.status)
    rep = sdp.verify_solution(prob, sol)
    if not rep.ok:
        raise InfeasibleError(f"{what}: solution failed verification ({rep.failures()})",
                              status=sdp.NUMERICAL_LIMIT)


def solve_vlc_subproblem(ctx: VlcContext) -> VlcSolution:
    prob = _vlc_problem(ctx)
    sol = sdp.solve(prob)
    _check(sol, prob, "VLC subproblem")
    v = sol.blocks[prob.names["V"]]
    ev = np.linalg.eigvalsh(0.5 * (v + v.T))
    ratio = float(max(ev[-2], 0.0) / ev[-1]) if ev.size > 1 else 0.0
    p_c = float(sol.blocks[prob.names["T"]][1, 1])
    return VlcSolution(p_c=p_c, v_matrix=v, certificate=_certificate(ctx, sol, prob),
                       rank_ratio=ratio, solution=sol, problem=prob)


def min_pc_for_fixed_v(v, ctx: VlcContext):
    """Minimal P_c for a fixed unit beamformer; returns ``(p_c, certificate)``."""
    v = np.asarray(v, float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise DomainError("beamformer must have unit norm")
    prob = _vlc_problem(ctx, v_fixed=v)
    sol = sdp.solve(prob)
    _check(sol, prob, "fixed-beamformer subproblem")
    return float(sol.blocks[prob.names["T"]][1, 1]), _certificate(ctx, sol, prob)


def normalize_sign(v) -> np.ndarray:
    v = np.asarray(v, float) / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


def extract_beamformer(v_matrix, ctx: VlcContext | None = None, seed=DEFAULT_SEED,
                       n_candidates: int = N_CANDIDATES):
    """Unit beamformer from the relaxed V; returns ``(v, p_c or None)``.

    Rank-one V gives its principal eigenvector. Otherwise Gaussian
    randomization draws candidates ``xi ~ N(0, V)`` and keeps the one with
    the smallest feasible communication power (requires ``ctx``).
    """
    v_matrix = np.asarray(v_matrix, float)
    ev, vecs = np.linalg.eigh(0.5 * (v_matrix + v_matrix.T))
    if ev[-1] <= 0:
        raise DomainError("V has no positive eigenvalue")
    ratio = max(ev[-2], 0.0) / ev[-1] if ev.size > 1 else 0.0
    if ratio <= RANK1_TOL:
        return normalize_sign(vecs[:, -1]), None
    root = sqrt_psd(v_matrix, "V")
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n_candidates, v_matrix.shape[0])) @ root
    best = None
    for xi in draws:
        nrm = np.linalg.norm(xi)
        if nrm == 0:
            continue
        cand = normalize_sign(xi / nrm)
        if ctx is None:
            return cand, None
        try:
            p_c, _ = min_pc_for_fixed_v(cand, ctx)
        except InfeasibleError:
            continue
        if best is None or p_c < best[1]:
            best = (cand, p_c)
    if best is None:
        raise InfeasibleError("no randomized beamformer candidate is feasible")
    return best


# ---------------------------------------------------------------------------
# VLP update and BCD


def vlp_power_update(p_c: float, config: AllocationConfig) -> float:
    """Positioning power maximizing Fisher information: ``min(P_p^max, P_T - P_c)``."""
    if p_c > config.p_total * (1.0 + 1e-12):
        raise InfeasibleError(
            f"communication power {p_c:g} W alone exceeds the budget {config.p_total:g} W")
    return max(0.0, min(config.p_p_max, config.p_total - p_c))


def _moments_at(scenario, u_hat, p_p, n_samples, seed):
    cov = crlb_covariance(fim(scenario, u_hat, p_p))
    return csi_moments(scenario, u_hat, cov, n_samples, seed)


START_GRID = 11
METHODS = ("accelerated", "plain")
OMEGA_MAX = 64.0


def bcd_optimize(scenario: Scenario, u_hat, config: AllocationConfig,
                 seed=DEFAULT_SEED, init: str = "conservative",
                 n_samples: int = DEFAULT_SAMPLES,
                 method: str = "accelerated") -> AllocationResult:
    """Alternate the VLC and VLP subproblems until the CRLB settles.

    With ``P_c(P_p)`` the minimal communication power under the moments
    induced by ``P_p``, one sweep maps ``P_p -> F(P_p) = min(P_p^max,
    P_T - P_c(P_p))``. F is increasing, so a start with ``F(P_p) >= P_p``
    gives nondecreasing positioning power and a nonincreasing CRLB.

    ``init='conservative'`` takes the smallest such start on a grid over
    ``[0, min(P_p^max, P_T)]``. ``init='optimistic'`` starts at the top of
    that range; its first subproblem sees the smallest CSI error, so the
    positioning power then shrinks and the CRLB grows.

    ``method='plain'`` iterates F as is. Near the fixed point F has slope
    close to one, so ``'accelerated'`` (the default) proposes the next
    positioning power by extrapolating ``F(p) - p`` and keeps a proposal
    only when it has not crossed the fixed point (from the conservative
    side: when it is budget feasible under its own moments); otherwise it
    falls back to ``F`` of the incumbent. Every VLC solve counts as an
    iteration.

    The CSI moments reuse one seed across iterations so that successive
    subproblems differ only through the positioning power.
    """
    if init not in ("conservative", "optimistic"):
        raise DomainError("init must be 'conservative' or 'optimistic'")
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}")
    if config.rbar >= max_lower_bound_rate(scenario.bandwidth_hz):
        raise InfeasibleError(
            f"rate {config.rbar:g} b/s exceeds the saturation of the rate bound")
    u_hat = np.asarray(u_hat, float)
    delta = delta_threshold(config.rbar, scenario.bandwidth_hz, scenario.sigma2_c,
                            scenario.peak_amp)
    h_hat = gain_vector(scenario, u_hat)
    run = _Bcd(scenario, u_hat, config, seed, n_samples, delta, h_hat)
    p_hi = min(config.p_p_max, config.p_total)
    if init == "optimistic":
        if method == "plain":
            return run.plain(p_hi, init)
        return run.accelerated(p_hi, p_hi, side=-1)
    p0 = run.conservative_start(p_hi)
    if method == "plain":
        return run.plain(p0, init)
    return run.accelerated(p0, p_hi)


@dataclass
class _Eval:
    p_eval: float  # positioning power the moments were drawn at
    vlc: VlcSolution | None
    ctx: VlcContext | None
    mom: CsiMoments

    @property
    def p_c(self):
        return self.vlc.p_c if self.vlc is not None else math.inf


class _Bcd:
    def __init__(self, scenario, u_hat, config, seed, n_samples, delta, h_hat):
        self.scenario, self.u_hat, self.config = scenario, u_hat, config
        self.seed, self.n_samples = seed, n_samples
        self.delta, self.h_hat = delta, h_hat
        self.evaluations = []
        self.omega = 2.0

    def crlb(self, p_p):
        return crlb_trace(fim(self.scenario, self.u_hat, p_p))

    def evaluate(self, p_p, raise_infeasible=True):
        mom = _moments_at(self.scenario, self.u_hat, p_p, self.n_samples, self.seed)
        ctx = VlcContext.build(self.h_hat, mom.omega, self.delta, self.config)
        try:
            vlc = solve_vlc_subproblem(ctx)
        except InfeasibleError:
            if raise_infeasible:
                raise
            vlc = None
        ev = _Eval(float(p_p), vlc, ctx, mom)
        self.evaluations.append((ev.p_eval, ev.p_c))
        return ev

    def excess(self, ev):
        return ev.p_eval + ev.p_c - self.config.p_total

    def conservative_start(self, p_hi):
        """Smallest grid power whose own VLC solution fits the budget.

        Falls back to a bounded scalar search on ``P_p + P_c(P_p)`` around
        the best grid point; raises InfeasibleError if nothing fits.
        """
        grid = np.linspace(0.0, p_hi, START_GRID)
        vals = []
        for p in grid:
            e = self.excess(self.evaluate(p, raise_infeasible=False))
            if e <= 0.0:
                return float(p)
            vals.append(e)
        k = int(np.argmin(vals))
        if not np.isfinite(vals[k]):
            raise InfeasibleError(
                f"no positioning power in [0, {p_hi:g}] W admits a rate-feasible "
                "communication power within the caps")
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, len(grid) - 1)]
        best_p, best_e = float(grid[k]), float(vals[k])
        penalty = self.config.p_total + self.config.p_c_bound + p_hi

        def fun(p):
            e = self.excess(self.evaluate(p, raise_infeasible=False))
            return e if np.isfinite(e) else penalty - p

        res = optimize.minimize_scalar(
            fun,
            bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-3 * max(hi - lo, 1e-12)})
        if res.fun < best_e:
            best_p, best_e = float(res.x), float(res.fun)
        if best_e <= 0.0:
            return best_p
        raise InfeasibleError(
            f"robust design needs at least {best_e + self.config.p_total:.6g} W in "
            f"total (at P_p = {best_p:.4g} W), above the budget {self.config.p_total:g} W")

    def plain(self, p_p0, label):
        cfg = self.config
        p_p = p_p0
        obj_prev = self.crlb(p_p)
        trace = []
        ev = None
        converged = False
        k = 0
        for k in range(1, cfg.max_iters + 1):
            ev = self.evaluate(p_p)
            p_p = vlp_power_update(ev.p_c, cfg)
            obj = self.crlb(p_p)
            trace.append((obj, p_p, ev.p_c))
            if abs(obj - obj_prev) <= cfg.bcd_tol:
                converged = True
                break
            obj_prev = obj
        return self.result(ev, p_p, trace, converged, k, label + "/plain")

    def accelerated(self, p0, p_hi, side=1):
        """Extrapolated iteration of F from one side of its fixed point.

        ``side=+1`` starts below the fixed point (``F(p0) >= p0``), ``-1``
        above it. A trial is kept only if it stays on the starting side, so
        the incumbents move monotonically toward the fixed point.
        """
        cfg = self.config
        inc = self.evaluate(p0)
        p_p = vlp_power_update(inc.p_c, cfg)
        obj = self.crlb(p_p)
        trace = [(obj, p_p, inc.p_c)]
        prev = None  # previous incumbent, for the secant
        far = None  # (power, r) of the nearest trial that crossed the fixed point
        converged = False
        k = 1
        while k < cfg.max_iters:
            if (side > 0 and p_p >= p_hi) or side * (p_p - inc.p_eval) <= 0:
                converged = True  # cap reached or at the fixed point
                break
            prop = self._propose(inc, prev, far, p_p, p_hi, side)
            k += 1
            ev = self.evaluate(prop, raise_infeasible=False)
            r = self._residual(ev)
            if ev.vlc is not None and side * r >= 0.0:
                prev, inc = inc, ev
                self.omega = min(2.0 * self.omega, OMEGA_MAX)
                if far is not None:
                    far = (far[0], 0.5 * far[1])  # Illinois: inc moved, damp far
            else:
                # an infeasible VLC says nothing about which root was crossed
                if ev.vlc is not None and (far is None or side * (prop - far[0]) < 0):
                    far = (prop, r)
                self.omega = max(1.0, 0.25 * self.omega)
                ev = self.evaluate(p_p)  # the plain step stays on our side
                prev, inc = inc, ev
                k += 1
            p_new = vlp_power_update(inc.p_c, cfg)
            obj_new = self.crlb(p_new)
            trace.append((obj_new, p_new, inc.p_c))
            done = abs(obj_new - obj) <= cfg.bcd_tol
            p_p, obj = p_new, obj_new
            if done:
                converged = True
                break
        label = ("conservative" if side > 0 else "optimistic") + "/accelerated"
        return self.result(inc, p_p, trace, converged, k, label)

    def _residual(self, ev):
        """``r(p) = F(p) - p``; finite stand-in when the VLC is infeasible."""
        if not np.isfinite(ev.p_c):
            return -(self.config.p_total + ev.p_eval)
        return vlp_power_update(min(ev.p_c, self.config.p_total), self.config) - ev.p_eval

    def _propose(self, inc, prev, far, p_plain, p_hi, side):
        """Next trial power, at least as far along as the plain step ``F(inc)``.

        With a crossing trial on record this is regula falsi on
        ``r(p) = F(p) - p`` between the incumbent and that trial. Before
        that it is the secant through the last two incumbents when
        ``|r|`` is shrinking, else (from below only) the over-relaxed step
        ``inc + omega (F(inc) - inc)``.
        """
        r_inc = p_plain - inc.p_eval
        if far is not None:
            p_f, r_f = far
            guess = inc.p_eval + r_inc * (p_f - inc.p_eval) / (r_inc - r_f)
        else:
            # r rises to a hump and falls again, so from above an
            # over-relaxed step can jump past both of its roots; the secant
            # of a concave r cannot
            guess = inc.p_eval + (self.omega if side > 0 else 1.0) * r_inc
            if prev is not None:
                r_prev = self._residual(prev)
                dp = inc.p_eval - prev.p_eval
                if side * dp > 0 and side * (r_prev - r_inc) > 0:
                    guess = inc.p_eval - r_inc * dp / (r_inc - r_prev)
        if side * (guess - p_plain) < 0:
            guess = p_plain
        if far is not None and side * (guess - far[0]) >= 0:
            guess = 0.5 * (p_plain + far[0])
        return float(min(max(guess, 0.0), p_hi))

    def result(self, ev, p_p, trace, converged, iterations, label):
        # close with the communication block at the final P_p so the
        # reported (P_c, v, moments) belong to it; matters when the cap
        # stops the loop far from the last evaluated power
        closed = False
        if abs(p_p - ev.p_eval) > 1e-9 * max(1.0, p_p):
            last = self.evaluate(p_p, raise_infeasible=False)
            if last.vlc is not None and self.excess(last) <= 0.0:
                ev, closed = last, True
                trace = trace + [(self.crlb(p_p), p_p, ev.p_c)]
        vlc, ctx = ev.vlc, ev.ctx
        v, _ = extract_beamformer(vlc.v_matrix, ctx, self.seed)
        return AllocationResult(
            p_p=p_p, p_c=vlc.p_c, v_matrix=vlc.v_matrix, v=v, crlb=self.crlb(p_p),
            trace=trace, rank1=vlc.rank_ratio <= RANK1_TOL, converged=converged,
            iterations=iterations, moments=ev.mom, certificate=vlc.certificate,
            h_hat=self.h_hat, delta=self.delta, init=label,
            info={"rank_ratio": vlc.rank_ratio, "gain_scale": ctx.gain_scale,
                  "moments_at_p_p": ev.p_eval, "closing_solve": closed,
                  "evaluations": list(self.evaluations)},
        )


# ---------------------------------------------------------------------------
# baselines


@dataclass(frozen=True)
class BaselineAllocation:
    p_p: float
    p_c: float
    v: np.ndarray
    crlb: float
    label: str


def nonrobust_allocation(scenario: Scenario, u_hat, config: AllocationConfig):
    """Treat ``h_hat`` as exact: matched combining and the least P_c meeting r̄."""
    u_hat = np.asarray(u_hat, float)
    h_hat = gain_vector(scenario, u_hat)
    delta = delta_threshold(config.rbar, scenario.bandwidth_hz, scenario.sigma2_c,
                            scenario.peak_amp)
    v = normalize_sign(h_hat)
    p_c = delta / float(h_hat @ h_hat)
    if p_c > config.p_c_bound:
        raise InfeasibleError("non-robust design needs more than the available power")
    p_p = vlp_power_update(p_c, config)
    return BaselineAllocation(p_p, p_c, v, crlb_trace(fim(scenario, u_hat, p_p)), "non-robust")


def equal_power_allocation(scenario: Scenario, u_hat, config: AllocationConfig):
    """Split the budget evenly (each share capped), with matched combining."""
    u_hat = np.asarray(u_hat, float)
    h_hat = gain_vector(scenario, u_hat)
    p_p = min(0.5 * config.p_total, config.p_p_max)
    p_c = min(0.5 * config.p_total, config.p_c_max)
    return BaselineAllocation(p_p, p_c, normalize_sign(h_hat),
                              crlb_trace(fim(scenario, u_hat, p_p)), "equal-power")
