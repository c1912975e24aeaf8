"""Fisher information of the RSS observation model and the CRLB metric.

The reported CRLB includes the bandwidth factor: ``Tr(J_p^-1) =
B sigma2_p Tr(Q^-1) / (T_p (P_p eps + I_DC^2))``. The same convention is
used for the error covariance fed into the CSI-uncertainty model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DegenerateGeometryError, DomainError
from .scenario import Scenario, gain_jacobian

COND_LIMIT = 1e12


@dataclass(frozen=True)
class FisherInfo:
    q: np.ndarray
    scale: float  # T_p (P_p eps + I_DC^2) / sigma2_p
    bandwidth_hz: float

    @property
    def matrix(self) -> np.ndarray:
        """J_p = scale * Q (noise-PSD convention, without B)."""
        return self.scale * self.q


def q_from_gradients(jac) -> np.ndarray:
    """Sum of gradient outer products; rejects numerically singular results."""
    jac = np.atleast_2d(np.asarray(jac, float))
    q = jac.T @ jac
    q = 0.5 * (q + q.T)
    eig = np.linalg.eigvalsh(q)
    if eig[0] <= 0.0 or eig[-1] / eig[0] > COND_LIMIT:
        raise DegenerateGeometryError(
            f"Q is numerically singular (eigenvalues {eig.tolist()})"
        )
    return q


def q_matrix(scenario: Scenario, mu_position=None) -> np.ndarray:
    """3x3 matrix Q[a, b] = sum_i dh_i/du_a * dh_i/du_b."""
    return q_from_gradients(gain_jacobian(scenario, mu_position))


def power_factor(scenario: Scenario, p_p: float) -> float:
    """Mean-square drive level ``P_p eps + I_DC^2`` of the positioning signal."""
    return p_p * scenario.eps_sym + scenario.i_dc**2


def fim(scenario: Scenario, mu_position=None, p_p: float = 0.0) -> FisherInfo:
    if p_p < 0:
        raise DomainError("p_p must be non-negative")
    if scenario.sigma2_p <= 0:
        raise DomainError("sigma2_p must be positive for a finite Fisher matrix")
    q = q_matrix(scenario, mu_position)
    scale = scenario.t_p * power_factor(scenario, p_p) / scenario.sigma2_p
    return FisherInfo(q=q, scale=scale, bandwidth_hz=scenario.bandwidth_hz)


def spd_inverse(q) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix.

    Jacobi-equilibrated Cholesky; a 3x3 cofactor formula loses digits to
    cancellation once Q is moderately ill-conditioned.
    """
    q = np.asarray(q, float)
    diag = np.diag(q)
    if not np.all(diag > 0):
        raise DegenerateGeometryError("Q has a non-positive diagonal entry")
    d = np.sqrt(diag)
    dd = np.outer(d, d)
    try:
        fac = linalg.cho_factor(q / dd)
    except linalg.LinAlgError as exc:
        raise DegenerateGeometryError("Q is not positive definite") from exc
    inv = linalg.cho_solve(fac, np.eye(q.shape[0])) / dd
    return 0.5 * (inv + inv.T)


def crlb_covariance(info: FisherInfo) -> np.ndarray:
    """Error covariance ``E_p = B Q^-1 / scale`` (m^2)."""
    return info.bandwidth_hz * spd_inverse(info.q) / info.scale


def crlb_trace(info: FisherInfo) -> float:
    """Sum of coordinate error variances, ``B Tr(Q^-1) / scale`` (m^2)."""
    return float(info.bandwidth_hz * np.trace(spd_inverse(info.q)) / info.scale)


def crlb(scenario: Scenario, mu_position=None, p_p: float = 0.0) -> float:
    """Shorthand for ``crlb_trace(fim(scenario, mu_position, p_p))``."""
    return crlb_trace(fim(scenario, mu_position, p_p))
