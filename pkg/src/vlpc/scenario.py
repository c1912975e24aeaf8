"""Geometry, physical constants and the Lambertian line-of-sight channel.

All positions are 3D Cartesian coordinates in meters. The LED points
straight down and every photodetector (PD) points straight up, so both the
radiance and the incidence cosine reduce to ``(z_l - z_i) / d_i``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, DomainError

N_LED = (0.0, 0.0, -1.0)
N_PD = (0.0, 0.0, 1.0)


def vec3(values) -> np.ndarray:
    """Return a read-only float array of shape (3,)."""
    arr = np.array(values, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"non-finite vector component in {values!r}")
    arr.setflags(write=False)
    return arr


def triangle_offsets(side_length: float) -> np.ndarray:
    """PD offsets forming an equilateral triangle centered on the MU.

    Vertices sit at ``(L/sqrt3, 0, 0)`` and ``(-L/(2 sqrt3), +-L/2, 0)``.
    """
    if side_length <= 0:
        raise DomainError("side_length must be positive")
    r = side_length / math.sqrt(3.0)
    out = np.array(
        [
            [r, 0.0, 0.0],
            [-r / 2.0, side_length / 2.0, 0.0],
            [-r / 2.0, -side_length / 2.0, 0.0],
        ]
    )
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ChannelParams:
    theta_half_deg: float = 60.0
    a_pd: float = 1e-4
    g_conc: float = 1.0
    t_f: float = 1.0
    fov_deg: float = 90.0

    def __post_init__(self):
        if not 0.0 < self.theta_half_deg < 90.0:
            raise DomainError("theta_half_deg must lie in (0, 90)")
        if not 0.0 < self.fov_deg <= 90.0:
            raise DomainError("fov_deg must lie in (0, 90]")
        for name in ("a_pd", "g_conc", "t_f"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive")

    @property
    def order(self) -> float:
        return lambertian_order(self.theta_half_deg)


@dataclass(frozen=True)
class Scenario:
    """Single-lamp VLPC scenario.

    Defaults: lamp at (2.5, 2.5, 3) in a 5 x 5 x 3 m room, MU at test point U3 with
    height 1.5 m and three PDs on a 10 cm equilateral triangle.
    """

    lamp: np.ndarray = field(default_factory=lambda: vec3((2.5, 2.5, 3.0)))
    mu_position: np.ndarray = field(default_factory=lambda: vec3((2.0, 2.0, 1.5)))
    pd_offsets: np.ndarray = field(default_factory=lambda: triangle_offsets(0.1))
    channel: ChannelParams = field(default_factory=ChannelParams)
    sigma2_p: float = 1e-21
    sigma2_c: float = 1e-21
    bandwidth_hz: float = 20e6
    t_p: float = 0.12
    t_u: float = 0.01
    t_c: float = 0.87
    i_dc: float = 2.0
    peak_amp: float = 0.007
    eps_sym: float = 1.0
    p_o_max: float = 8.0
    p_e_max: float = 16.0

    def __post_init__(self):
        object.__setattr__(self, "lamp", vec3(self.lamp))
        object.__setattr__(self, "mu_position", vec3(self.mu_position))
        offs = np.array(self.pd_offsets, dtype=float)
        if offs.ndim != 2 or offs.shape[1] != 3:
            raise DomainError("pd_offsets must be an (M, 3) array")
        offs.setflags(write=False)
        object.__setattr__(self, "pd_offsets", offs)
        problems = self.problems()
        if problems:
            raise DomainError("; ".join(f"{k}: {v}" for k, v in problems))

    def problems(self):
        """All invariant violations as ``(field, message)`` pairs."""
        out = []
        if self.n_pd < 3:
            out.append(("pd_offsets", "at least 3 PDs are required"))
        elif _collinear_xy(self.pd_offsets):
            out.append(("pd_offsets", "PD offsets are collinear in the horizontal plane"))
        if self.n_pd and np.any(self.pd_positions()[:, 2] >= self.lamp[2]):
            out.append(("mu_position", "every PD must lie strictly below the lamp"))
        for name in ("sigma2_p", "sigma2_c"):
            if not getattr(self, name) >= 0.0:
                out.append((name, "must be non-negative"))
        for name in ("bandwidth_hz", "t_p", "t_u", "t_c", "i_dc", "peak_amp",
                     "eps_sym", "p_o_max", "p_e_max"):
            if not getattr(self, name) > 0.0:
                out.append((name, "must be positive"))
        return out

    @property
    def n_pd(self) -> int:
        return int(self.pd_offsets.shape[0])

    def pd_positions(self, mu_position=None) -> np.ndarray:
        u = self.mu_position if mu_position is None else np.asarray(mu_position, float)
        return u + self.pd_offsets

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    @property
    def p_p_max(self) -> float:
        """Positioning power cap from non-negativity, optical and electrical limits."""
        a2 = self.peak_amp**2
        return min(
            self.i_dc**2 / a2,
            (self.p_o_max - self.i_dc) ** 2 / a2,
            (self.p_e_max - self.i_dc**2) / self.eps_sym,
        )

    @property
    def p_c_max(self) -> float:
        """Communication power cap from optical and electrical limits."""
        a2 = self.peak_amp**2
        return min(self.p_o_max**2 / a2, 2.0 * self.p_e_max / a2)


def _collinear_xy(offsets, tol=1e-12) -> bool:
    xy = np.asarray(offsets)[:, :2]
    centered = xy - xy.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    scale = max(1.0, float(np.abs(xy).max()))
    return len(sv) < 2 or sv[1] <= tol * scale


def lambertian_order(theta_half_deg: float) -> float:
    """Lambertian emission order ``m = -ln 2 / ln(cos theta_half)``."""
    if not 0.0 < theta_half_deg < 90.0:
        raise DomainError(f"semi-angle {theta_half_deg} deg is outside (0, 90)")
    return -math.log(2.0) / math.log(math.cos(math.radians(theta_half_deg)))


def alpha_const(params: ChannelParams, order: float | None = None) -> float:
    """Gain constant ``(m+1) A_PD g T_f / (2 pi)`` in m^2."""
    m = params.order if order is None else order
    return (m + 1.0) * params.a_pd * params.g_conc * params.t_f / (2.0 * math.pi)


def gain_vector(scenario: Scenario, mu_position=None) -> np.ndarray:
    """LOS gains of all PDs; zero outside the FoV or at/above the lamp plane.

    ``mu_position`` may be a single (3,) point or an (N, 3) batch, in which
    case the result has shape (N, M).
    """
    u = scenario.mu_position if mu_position is None else np.asarray(mu_position, float)
    m = scenario.channel.order
    alpha = alpha_const(scenario.channel, m)
    diff = scenario.lamp - (u[..., None, :] + scenario.pd_offsets)
    dz = diff[..., 2]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    visible = dz > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_inc = np.where(visible, dz / dist, 0.0)
        h = np.where(visible, alpha * np.abs(dz) ** (m + 1.0) / dist ** (m + 3.0), 0.0)
    if scenario.channel.fov_deg < 90.0:
        inside = cos_inc >= math.cos(math.radians(scenario.channel.fov_deg))
        h = np.where(inside, h, 0.0)
    return h


def los_gain(scenario: Scenario, pd_index: int, mu_position=None) -> float:
    """LOS gain of PD ``pd_index`` (0-based)."""
    _check_index(scenario, pd_index)
    return float(gain_vector(scenario, mu_position)[pd_index])


def gain_jacobian(scenario: Scenario, mu_position=None) -> np.ndarray:
    """Closed-form (M, 3) matrix of partials dh_i/du for all PDs.

    Raises DegenerateGeometryError if any PD has zero gain, because the
    derivative of the clipped model is undefined there.
    """
    u = scenario.mu_position if mu_position is None else np.asarray(mu_position, float)
    h = gain_vector(scenario, u)
    if np.any(h <= 0.0):
        bad = np.flatnonzero(h <= 0.0).tolist()
        raise DegenerateGeometryError(f"PDs {bad} have zero gain; gradient undefined")
    return _jacobian_rows(scenario, u, slice(None))


def los_gain_gradient(scenario: Scenario, pd_index: int, mu_position=None) -> np.ndarray:
    """Gradient (dh/dx_u, dh/dy_u, dh/dz_u) of one PD's gain."""
    _check_index(scenario, pd_index)
    u = scenario.mu_position if mu_position is None else np.asarray(mu_position, float)
    h = gain_vector(scenario, u)[pd_index]
    if h <= 0.0:
        raise DegenerateGeometryError(f"PD {pd_index} has zero gain; gradient undefined")
    return _jacobian_rows(scenario, u, [pd_index])[0]


def _jacobian_rows(scenario, u, rows):
    m = scenario.channel.order
    alpha = alpha_const(scenario.channel, m)
    diff = scenario.lamp - (u + scenario.pd_offsets[rows])  # l - u - v_i
    dz = diff[:, 2]
    dist = np.linalg.norm(diff, axis=1)
    common = -alpha * (m + 3.0) * dz ** (m + 1.0) / dist ** (m + 5.0)
    out = np.empty((diff.shape[0], 3))
    out[:, 0] = -common * diff[:, 0]  # factor (x_u + v_x - x_l)
    out[:, 1] = -common * diff[:, 1]
    out[:, 2] = (
        -(m + 1.0) * alpha * dz**m / dist ** (m + 3.0)
        + (m + 3.0) * alpha * dz ** (m + 2.0) / dist ** (m + 5.0)
    )
    return out


def _check_index(scenario, pd_index):
    if not 0 <= pd_index < scenario.n_pd:
        raise IndexError(f"pd_index {pd_index} out of range for {scenario.n_pd} PDs")
