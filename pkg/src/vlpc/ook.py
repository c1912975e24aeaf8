"""OOK mutual information, its closed-form lower bound and the rate threshold.

Sampling convention: a link of bandwidth B carries 2B channel uses per
second; each use sees signal amplitude ``s sqrt(P_c / 2B) A`` against noise
of variance ``sigma2_c / 2``. Only their ratio matters, so the exact
per-use mutual information is a function of the effective SNR argument

    r = s A sqrt(P_c) / sqrt(B sigma2_c),    s = v^T h,

and the closed-form lower bound is ``3/2 - 1/(2 ln 2) - log2(1 + e^{-r^2/4})``
per use. The DC bias cancels from every symbol difference and is omitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError

LN2 = math.log(2.0)
# per-use supremum of the lower bound, 3/2 - 1/(2 ln 2)
LB_PER_USE_MAX = 1.5 - 1.0 / (2.0 * LN2)


@dataclass(frozen=True)
class RateContext:
    s_eff: float  # v^T h
    p_c: float
    peak_amp: float
    bandwidth_hz: float
    sigma2_c: float

    def __post_init__(self):
        if self.p_c < 0:
            raise DomainError("p_c must be non-negative")
        if self.bandwidth_hz <= 0:
            raise DomainError("bandwidth must be positive")

    @classmethod
    def from_scenario(cls, scenario, s_eff, p_c):
        return cls(float(s_eff), float(p_c), scenario.peak_amp,
                   scenario.bandwidth_hz, scenario.sigma2_c)

    @property
    def snr_arg(self) -> float:
        """Amplitude-to-noise-std ratio r of one channel use."""
        if self.sigma2_c == 0:
            return math.inf if self.s_eff * self.p_c != 0 else 0.0
        return abs(self.s_eff) * self.peak_amp * math.sqrt(self.p_c) / math.sqrt(
            self.bandwidth_hz * self.sigma2_c
        )


# below this SNR argument the integrand is smooth on the Hermite scale
_SPLIT_R = 1.0


@lru_cache(maxsize=8)
def _hermite(n: int):
    x, w = np.polynomial.hermite.hermgauss(n)
    return x, w / math.sqrt(math.pi)


@lru_cache(maxsize=8)
def _laguerre(n: int):
    return np.polynomial.laguerre.laggauss(n)


def _softplus_mean_split(c, nodes):
    """E[log(1 + e^u)] for u ~ N(-c^2, 2c^2), c > 0.

    softplus(u) = max(u, 0) + log1p(e^-|u|). The hinge has a closed-form
    Gaussian mean; the remainder decays like e^-|u| and is integrated with
    a Gauss-Laguerre rule on each half line. Plain Gauss-Hermite in x sees
    a kink of width 1/c and converges slowly once c is moderate.
    """
    m = -c * c
    s = math.sqrt(2.0) * c
    hinge = m * 0.5 * special.erfc(-m / (s * math.sqrt(2.0))) + s * np.exp(
        -m * m / (2.0 * s * s)
    ) / math.sqrt(2.0 * math.pi)
    u, w = _laguerre(nodes)
    u = u[None, :]
    sc = s[:, None]
    mc = m[:, None]
    dens = (np.exp(-((u - mc) ** 2) / (2.0 * sc * sc))
            + np.exp(-((u + mc) ** 2) / (2.0 * sc * sc))) / (sc * math.sqrt(2.0 * math.pi))
    # e^u log1p(e^-u) is smooth and tends to 1
    rest = (np.exp(u) * np.log1p(np.exp(-u)) * dens) @ w
    return hinge + rest


def mi_from_snr_arg(r, nodes: int = 64):
    """Exact OOK mutual information (bits/use) at SNR argument ``r``.

    With ``x = z / (sqrt2 sigma)`` the two expectations collapse by symmetry
    to ``1 - E[log(1 + exp(-c (2x + c)))] / ln 2`` where ``c = r / sqrt2``
    and ``x`` carries the Gauss-Hermite weight ``exp(-x^2)``. For
    ``r > 1`` the expectation is split as in ``_softplus_mean_split``.
    """
    r = np.abs(np.asarray(r, float))
    flat = r.reshape(-1)
    out = np.ones_like(flat)
    c = flat / math.sqrt(2.0)
    low = flat <= _SPLIT_R
    if np.any(low):
        x, w = _hermite(nodes)
        cl = c[low][:, None]
        out[low] = 1.0 - (np.logaddexp(0.0, -cl * (2.0 * x + cl)) @ w) / LN2
    mid = ~low & np.isfinite(flat)
    if np.any(mid):
        out[mid] = 1.0 - _softplus_mean_split(c[mid], nodes) / LN2
    out[flat == 0.0] = 0.0  # input and output independent; avoid roundoff
    mi = np.clip(out, 0.0, 1.0).reshape(r.shape)
    return float(mi) if mi.ndim == 0 else mi


def mi_exact_per_use(ctx: RateContext, nodes: int = 64) -> float:
    return float(mi_from_snr_arg(ctx.snr_arg, nodes))


def rate_exact(ctx: RateContext, nodes: int = 64) -> float:
    """Exact OOK rate in bit/s (2B uses per second)."""
    return 2.0 * ctx.bandwidth_hz * mi_exact_per_use(ctx, nodes)


def lower_bound_exponent(s_eff, p_c, peak_amp, bandwidth_hz, sigma2_c):
    """The exponent ``s^2 P_c A^2 / (4 B sigma2_c)`` of the rate bound."""
    return np.asarray(s_eff) ** 2 * np.asarray(p_c) * peak_amp**2 / (
        4.0 * bandwidth_hz * sigma2_c
    )


def rate_lower_bound_raw(s_eff, p_c, peak_amp, bandwidth_hz, sigma2_c):
    """Vectorized raw lower bound (bit/s); may be negative."""
    arg = lower_bound_exponent(s_eff, p_c, peak_amp, bandwidth_hz, sigma2_c)
    b = bandwidth_hz
    return 3.0 * b - b / LN2 - 2.0 * b * np.logaddexp(0.0, -arg) / LN2


def rate_lower_bound(ctx: RateContext) -> float:
    """Closed-form achievable-rate bound in bit/s, unclamped."""
    return float(rate_lower_bound_raw(ctx.s_eff, ctx.p_c, ctx.peak_amp,
                                      ctx.bandwidth_hz, ctx.sigma2_c))


def max_lower_bound_rate(bandwidth_hz: float) -> float:
    """Supremum ``B (3 - 1/ln 2)`` of the lower bound."""
    return bandwidth_hz * (3.0 - 1.0 / LN2)


def delta_threshold(rbar, bandwidth_hz, sigma2_c, peak_amp) -> float:
    """Threshold delta such that ``R_L <= rbar  <=>  s^2 <= delta / P_c``."""
    if rbar < 0:
        raise DomainError("rbar must be non-negative")
    if rbar >= max_lower_bound_rate(bandwidth_hz):
        raise DomainError(
            f"rate {rbar:g} b/s is unreachable: the bound saturates at "
            f"{max_lower_bound_rate(bandwidth_hz):g} b/s"
        )
    expo = LB_PER_USE_MAX - rbar / (2.0 * bandwidth_hz)
    return -(4.0 * bandwidth_hz * sigma2_c / peak_amp**2) * math.log(2.0**expo - 1.0)
