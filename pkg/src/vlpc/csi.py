"""CSI error induced by positioning error, and its Monte Carlo moments.

The channel the transmitter plans with is the gain at the estimated
position ``u_hat``. The true gain sits at ``u_hat + e_p`` with
``e_p ~ N(0, E_p)``, so the CSI error ``dh = h(u_hat + e_p) - h(u_hat)``
is a nonlinear (and FoV-clipped) function of a Gaussian vector.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._threads import max_workers
from .errors import DomainError
from .scenario import Scenario, _check_index, gain_vector

DEFAULT_SAMPLES = 10_000
DEFAULT_SEED = 20211
N_CHUNKS = 16  # fixed, so results do not depend on the thread count


@dataclass(frozen=True)
class CsiMoments:
    mu: np.ndarray
    d: np.ndarray
    omega: np.ndarray
    n_samples: int
    seed: int | None

    @property
    def n_pd(self) -> int:
        return int(self.mu.shape[0])


def omega_matrix(mu, d) -> np.ndarray:
    """Second-moment matrix ``[[D + mu mu^T, mu], [mu^T, 1]]``."""
    mu = np.asarray(mu, float)
    d = np.asarray(d, float)
    m = mu.shape[0]
    om = np.empty((m + 1, m + 1))
    om[:m, :m] = d + np.outer(mu, mu)
    om[:m, m] = mu
    om[m, :m] = mu
    om[m, m] = 1.0
    return 0.5 * (om + om.T)


def _below_lamp(scenario, u):
    return np.all(u[..., None, 2] + scenario.pd_offsets[:, 2] < scenario.lamp[2])


def csi_error(scenario: Scenario, u_hat, e_p, pd_index: int) -> float:
    """``h_i(u_hat + e_p) - h_i(u_hat)`` for one PD."""
    _check_index(scenario, pd_index)
    return float(csi_error_vector(scenario, u_hat, e_p)[pd_index])


def csi_error_vector(scenario: Scenario, u_hat, e_p) -> np.ndarray:
    """All PDs at once; ``e_p`` may be an (N, 3) batch."""
    u_hat = np.asarray(u_hat, float)
    e_p = np.asarray(e_p, float)
    if not _below_lamp(scenario, u_hat):
        raise DomainError("u_hat must lie below the lamp plane")
    return gain_vector(scenario, u_hat + e_p) - gain_vector(scenario, u_hat)


def sqrt_psd(cov, what: str = "covariance") -> np.ndarray:
    """Symmetric square root; raises DomainError unless ``cov`` is PSD."""
    cov = np.asarray(cov, float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DomainError(f"{what} must be square")
    if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-300):
        raise DomainError(f"{what} must be symmetric")
    w, v = np.linalg.eigh(0.5 * (cov + cov.T))
    tol = 1e-12 * max(float(np.abs(w).max()), 0.0)
    if w.size and w[0] < -tol:
        raise DomainError(f"{what} is not positive semidefinite (min eigenvalue {w[0]:g})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def _chunk_sizes(n):
    base, extra = divmod(n, N_CHUNKS)
    return [base + (k < extra) for k in range(N_CHUNKS)]


def sample_csi_errors(scenario: Scenario, u_hat, e_p_covariance,
                      n_samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED) -> np.ndarray:
    """(n_samples, M) draws of the CSI error vector."""
    root = sqrt_psd(e_p_covariance, "E_p")
    u_hat = np.asarray(u_hat, float)
    h0 = gain_vector(scenario, u_hat)
    children = np.random.SeedSequence(seed).spawn(N_CHUNKS)
    sizes = _chunk_sizes(n_samples)

    def work(k):
        z = np.random.default_rng(children[k]).standard_normal((sizes[k], 3))
        return gain_vector(scenario, u_hat + z @ root) - h0

    with ThreadPoolExecutor(max_workers(N_CHUNKS)) as pool:
        parts = list(pool.map(work, range(N_CHUNKS)))
    return np.concatenate(parts, axis=0)


def csi_moments(scenario: Scenario, u_hat, e_p_covariance,
                n_samples: int = DEFAULT_SAMPLES, seed=DEFAULT_SEED) -> CsiMoments:
    """Sample mean, covariance (n - 1 denominator) and Omega of the CSI error."""
    if n_samples < 1000:
        raise DomainError("n_samples must be at least 1000")
    u_hat = np.asarray(u_hat, float)
    if not _below_lamp(scenario, u_hat):
        raise DomainError("u_hat must lie below the lamp plane")
    dh = sample_csi_errors(scenario, u_hat, e_p_covariance, n_samples, seed)
    mu = dh.mean(axis=0)
    centered = dh - mu
    d = centered.T @ centered / (n_samples - 1)
    d = 0.5 * (d + d.T)
    om = omega_matrix(mu, d)
    for name, mat in (("D", d), ("Omega", om)):
        ev = np.linalg.eigvalsh(mat)
        if ev[0] < -1e-10 * max(np.trace(mat), 1e-300):
            raise DomainError(f"{name} failed the PSD check (min eigenvalue {ev[0]:g})")
    return CsiMoments(mu=mu, d=d, omega=om, n_samples=n_samples, seed=seed)
