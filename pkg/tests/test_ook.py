import math

import numpy as np
import pytest
from scipy.stats import norm

from vlpc.errors import DomainError
from vlpc.ook import (RateContext, delta_threshold, max_lower_bound_rate, mi_exact_per_use,
                      mi_from_snr_arg, rate_exact, rate_lower_bound)

B, S2, A = 20e6, 1e-21, 0.007


def ctx(s, p_c):
    return RateContext(s_eff=s, p_c=p_c, peak_amp=A, bandwidth_hz=B, sigma2_c=S2)


def mc_mi(r, n=1_000_000, seed=0):
    """Per-use OOK mutual information by sampling the log likelihood ratio.

    With u = r z - r^2/2 the information is 1 - E[softplus(u)] / ln 2. The
    hinge max(u, 0) has a closed-form Gaussian mean and serves as a control
    variate, leaving only the bounded log1p(e^-|u|) part to sampling.
    """
    z = np.random.default_rng(seed).standard_normal(n)
    u = r * z - 0.5 * r * r
    m = -0.5 * r * r
    hinge = m * norm.cdf(m / r) + r * norm.pdf(m / r)
    return 1.0 - (hinge + np.mean(np.log1p(np.exp(-np.abs(u))))) / math.log(2.0)


def s_for_arg(r, p_c=1.0):
    return r * math.sqrt(B * S2) / (A * math.sqrt(p_c))


def test_zero_power_zero_information():
    assert mi_exact_per_use(ctx(1e-5, 0.0)) == 0.0
    assert rate_exact(ctx(1e-5, 0.0)) == 0.0


def test_high_snr_limit():
    assert mi_from_snr_arg(100.0) >= 1 - 1e-6
    assert rate_exact(ctx(s_for_arg(100.0), 1.0)) == pytest.approx(2 * B, rel=1e-6)


def test_mid_snr_matches_monte_carlo():
    c = ctx(s_for_arg(2.0), 1.0)
    assert c.snr_arg == pytest.approx(2.0)
    assert mi_exact_per_use(c) == pytest.approx(mc_mi(2.0), abs=1e-3)


def test_lower_bound_limits():
    assert rate_lower_bound(ctx(1e-5, 0.0)) == pytest.approx(B * (1 - 1 / math.log(2)), rel=1e-12)
    assert rate_lower_bound(ctx(1e-5, 0.0)) == pytest.approx(-8.854e6, rel=1e-4)
    top = rate_lower_bound(ctx(s_for_arg(1e3), 1.0))
    assert top == pytest.approx(B * (3 - 1 / math.log(2)), rel=1e-12)
    assert max_lower_bound_rate(B) == pytest.approx(31.146e6, rel=1e-4)


def test_lower_bound_monotone_in_power():
    pcs = np.linspace(0, 20, 201)
    vals = [rate_lower_bound(ctx(2e-6, p)) for p in pcs]
    assert np.all(np.diff(vals) >= 0)


def test_bound_below_exact():
    rng = np.random.default_rng(4)
    for _ in range(200):
        c = ctx(s_for_arg(10 ** rng.uniform(-2, 1.5)), 10 ** rng.uniform(-2, 1))
        assert rate_lower_bound(c) <= rate_exact(c)


def test_delta_threshold_value():
    assert delta_threshold(10e6, B, S2, A) == pytest.approx(1.331e-9, rel=1e-3)


def test_delta_threshold_unreachable():
    with pytest.raises(DomainError):
        delta_threshold(31.2e6, B, S2, A)
    with pytest.raises(DomainError):
        delta_threshold(-1.0, B, S2, A)


def test_delta_equivalence():
    rng = np.random.default_rng(9)
    for _ in range(300):
        rbar = rng.uniform(0, 30e6)
        d = delta_threshold(rbar, B, S2, A)
        s, p = rng.uniform(1e-7, 3e-5), rng.uniform(0.0, 20.0)
        if abs(s * s * p - d) <= 1e-9 * d:
            continue
        assert (rate_lower_bound(ctx(s, p)) <= rbar) == (s * s <= d / p if p > 0 else True)


def test_context_domain():
    with pytest.raises(DomainError):
        ctx(1e-6, -1.0)
    with pytest.raises(DomainError):
        RateContext(1e-6, 1.0, A, 0.0, S2)


def test_quadrature_converged():
    for r in (0.1, 1.0, 3.0, 8.0, 20.0):
        assert mi_from_snr_arg(r, 64) == pytest.approx(mi_from_snr_arg(r, 128), abs=1e-10)
