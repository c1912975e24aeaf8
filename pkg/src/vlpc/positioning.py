"""RSS observation model and the Levenberg-Marquardt position solver.

The estimator works on per-PD gain estimates ``h_hat_i = h_i + e_i``. The
correlator output over the positioning slot is a sufficient statistic for
the gain, so the noise variance of ``e_i`` is the per-coefficient Fisher
scale and simulated RMSE is directly comparable to the reported CRLB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fisher import power_factor
from .scenario import Scenario, _check_index, _jacobian_rows, gain_vector

LM_LAMBDA0 = 1e-3
GRAD_TOL = 1e-10
STEP_TOL = 1e-12
MAX_ITERS = 200
Z_MARGIN = 1e-3


@dataclass(frozen=True)
class RssObservation:
    """Either received powers or gain estimates for every PD (one is None)."""

    p_p: float
    noise_power: float  # B sigma2_p, per PD
    rx_power: np.ndarray | None = None
    gain_estimates: np.ndarray | None = None
    power_factor: float = 0.0  # P_p eps + I_DC^2

    def __post_init__(self):
        if self.p_p < 0:
            raise DomainError("p_p must be non-negative")
        if (self.rx_power is None) == (self.gain_estimates is None):
            raise DomainError("exactly one of rx_power or gain_estimates must be given")


@dataclass(frozen=True)
class PositionEstimate:
    u_hat: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int


def expected_rx_power(scenario: Scenario, pd_index: int, p_p: float,
                      mu_position=None) -> float:
    """Mean electrical power at PD ``pd_index``: ``(P_p eps + I^2) h^2 + B sigma2_p``."""
    _check_index(scenario, pd_index)
    _check_pp(scenario, p_p)
    h = gain_vector(scenario, mu_position)[pd_index]
    return float(power_factor(scenario, p_p) * h * h
                 + scenario.bandwidth_hz * scenario.sigma2_p)


def gain_estimate_noise_var(scenario: Scenario, p_p: float) -> float:
    """Variance of one gain estimate, ``B sigma2_p / (T_p (P_p eps + I^2))``.

    Uses the same bandwidth convention as the reported CRLB.
    """
    if p_p < 0:
        raise DomainError("p_p must be non-negative")
    denom = scenario.t_p * power_factor(scenario, p_p)
    if denom <= 0.0:
        raise DomainError("zero drive level: gain estimate variance is unbounded")
    return scenario.bandwidth_hz * scenario.sigma2_p / denom


def simulate_gain_estimates(scenario: Scenario, p_p: float, rng_seed,
                            mu_position=None) -> RssObservation:
    rng = np.random.default_rng(rng_seed)
    h = gain_vector(scenario, mu_position)
    std = math.sqrt(gain_estimate_noise_var(scenario, p_p))
    est = h + std * rng.standard_normal(h.shape)
    return RssObservation(
        p_p=p_p,
        noise_power=scenario.bandwidth_hz * scenario.sigma2_p,
        gain_estimates=est,
        power_factor=power_factor(scenario, p_p),
    )


def powers_to_gain_estimates(obs: RssObservation):
    """Invert the power model. Returns ``(gains, clamped_mask)``."""
    if obs.gain_estimates is not None:
        g = np.asarray(obs.gain_estimates, float)
        return g, np.zeros(g.shape, bool)
    if obs.power_factor <= 0:
        raise DomainError("power_factor must be positive to invert received powers")
    rad = np.asarray(obs.rx_power, float) - obs.noise_power
    clamped = rad < 0.0
    return np.sqrt(np.maximum(rad, 0.0) / obs.power_factor), clamped


def residuals_eta(scenario: Scenario, candidate_u, gain_estimates) -> np.ndarray:
    """Gain-domain residuals ``h_i(u) - h_hat_i``."""
    u = np.asarray(candidate_u, float)
    if np.any(u[2] + scenario.pd_offsets[:, 2] >= scenario.lamp[2]):
        raise DomainError("candidate position is not below the lamp plane")
    return gain_vector(scenario, u) - np.asarray(gain_estimates, float)


def _z_bounds(scenario):
    hi = scenario.lamp[2] - float(np.max(scenario.pd_offsets[:, 2])) - Z_MARGIN
    lo = min(0.0, hi)
    return lo, hi


def _model(scenario, u):
    h = gain_vector(scenario, u)
    jac = _jacobian_rows(scenario, u, slice(None))
    jac[h <= 0.0] = 0.0  # clipped PDs contribute no slope
    return h, jac


def _lm(scenario, target, scale, u0, zlo, zhi):
    u = u0.copy()
    u[2] = min(max(u[2], zlo), zhi)
    h, jac = _model(scenario, u)
    r = (h - target) / scale
    jac = jac / scale
    cost = float(r @ r)
    lam = LM_LAMBDA0
    converged = False
    it = 0
    for it in range(1, MAX_ITERS + 1):
        grad = jac.T @ r
        pg = grad.copy()
        # projected gradient on the z box
        if u[2] <= zlo and pg[2] > 0:
            pg[2] = 0.0
        if u[2] >= zhi and pg[2] < 0:
            pg[2] = 0.0
        if np.max(np.abs(pg)) <= GRAD_TOL:
            converged = True
            break
        jtj = jac.T @ jac
        diag = np.maximum(np.diag(jtj), 1e-30)
        try:
            step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        trial = u + step
        trial[2] = min(max(trial[2], zlo), zhi)
        taken = trial - u
        if np.linalg.norm(taken) <= STEP_TOL:
            converged = True
            break
        h_t, jac_t = _model(scenario, trial)
        r_t = (h_t - target) / scale
        cost_t = float(r_t @ r_t)
        if cost_t < cost:
            u, r, jac, cost = trial, r_t, jac_t / scale, cost_t
            lam = max(lam / 10.0, 1e-12)
        else:
            lam *= 10.0
            if lam > 1e16:
                converged = np.linalg.norm(taken) <= 1e-9
                break
    return u, cost, converged, it


def grid_seed(scenario: Scenario, gain_estimates, n: int = 21) -> np.ndarray:
    """Best point of a coarse grid over the region the gains allow.

    Every gain obeys ``h <= alpha / d^2``, so the MU lies within
    ``sqrt(alpha / max h_hat)`` of the lamp (plus the PD offset radius).
    """
    from .scenario import alpha_const

    target = np.asarray(gain_estimates, float)
    zlo, zhi = _z_bounds(scenario)
    hmax = float(np.max(target))
    reach = float(np.max(np.linalg.norm(scenario.pd_offsets, axis=1)))
    if hmax > 0:
        radius = math.sqrt(alpha_const(scenario.channel) / hmax) + reach
    else:
        radius = 10.0 * scenario.lamp[2]
    lx, ly, lz = scenario.lamp
    xs = np.linspace(lx - radius, lx + radius, n)
    ys = np.linspace(ly - radius, ly + radius, n)
    zs = np.linspace(max(zlo, lz - radius), zhi, max(n // 2, 3))
    grid = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1).reshape(-1, 3)
    cost = np.sum((gain_vector(scenario, grid) - target) ** 2, axis=1)
    return grid[int(np.argmin(cost))]


def solve_position(scenario: Scenario, gain_estimates, init_guess=None,
                   extra_starts=()) -> PositionEstimate:
    """Least-squares fit of the LOS model to the gain estimates.

    Starts from ``init_guess``, the best point of a coarse grid, the point
    under the lamp at half height and any ``extra_starts`` such as the
    previous estimate, and keeps the best converged result.
    """
    if scenario.n_pd < 3:
        raise DomainError("at least 3 PDs are required")
    target = np.asarray(gain_estimates, float)
    if target.shape != (scenario.n_pd,):
        raise DomainError(f"expected {scenario.n_pd} gain estimates, got {target.shape}")
    zlo, zhi = _z_bounds(scenario)
    nadir = np.array([scenario.lamp[0], scenario.lamp[1], 0.5 * scenario.lamp[2]])
    starts = []
    if init_guess is not None:
        g = np.asarray(init_guess, float).reshape(3)
        if np.any(g[2] + scenario.pd_offsets[:, 2] >= scenario.lamp[2]):
            raise DomainError("init_guess must lie below the lamp plane")
        starts.append(g)
    starts.append(grid_seed(scenario, target))
    starts.append(nadir)
    starts.extend(np.asarray(s, float).reshape(3) for s in extra_starts)
    scale = max(float(np.max(np.abs(target))), 1e-300)

    best = None
    total_its = 0
    for s in starts:
        u, cost, conv, its = _lm(scenario, target, scale, s, zlo, zhi)
        total_its += its
        if best is None or (conv, -cost) > (best[2], -best[1]):
            best = (u, cost, conv)
    u, cost, conv = best
    return PositionEstimate(
        u_hat=u,
        residual_norm=math.sqrt(cost),
        converged=bool(conv),
        iterations=total_its,
    )


@dataclass(frozen=True)
class RmseResult:
    rmse: float
    stderr: float
    sqrt_crlb: float
    trials: int
    failures: int


def positioning_rmse(scenario: Scenario, p_p: float, trials: int, seed,
                     normals=None, crlb_value=None) -> RmseResult:
    """Monte Carlo RMSE of ``solve_position`` at positioning power ``p_p``.

    ``normals`` of shape (trials, M) may be passed to reuse the same noise
    draws across sweep points.
    """
    from .fisher import crlb

    if trials < 1:
        raise DomainError("trials must be >= 1")
    h = gain_vector(scenario)
    if normals is None:
        normals = np.random.default_rng(seed).standard_normal((trials, scenario.n_pd))
    std = math.sqrt(gain_estimate_noise_var(scenario, p_p))
    truth = scenario.mu_position
    sq = np.empty(trials)
    failures = 0
    for k in range(trials):
        est = solve_position(scenario, h + std * normals[k])
        failures += not est.converged
        sq[k] = float(np.sum((est.u_hat - truth) ** 2))
    mse = float(sq.mean())
    rmse = math.sqrt(mse)
    se_mse = float(sq.std(ddof=1)) / math.sqrt(trials) if trials > 1 else 0.0
    stderr = se_mse / (2.0 * rmse) if rmse > 0 else 0.0
    c = crlb(scenario, None, p_p) if crlb_value is None else crlb_value
    return RmseResult(rmse, stderr, math.sqrt(c), trials, failures)


def p_p_for_snr(scenario: Scenario, snr_db: float, pd_index: int = 0) -> float:
    """Positioning power giving ``10 lg(P_p h_1^2 / (B sigma2_p)) = snr_db``."""
    h = gain_vector(scenario)[pd_index]
    if h <= 0:
        raise DomainError("reference PD has zero gain")
    return 10.0 ** (snr_db / 10.0) * scenario.bandwidth_hz * scenario.sigma2_p / (h * h)


def _check_pp(scenario, p_p):
    if p_p < 0:
        raise DomainError("p_p must be non-negative")
    if p_p > scenario.p_p_max * (1 + 1e-12):
        raise DomainError(f"p_p {p_p:g} exceeds the positioning cap {scenario.p_p_max:g}")
