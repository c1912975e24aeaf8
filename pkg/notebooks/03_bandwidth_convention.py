"""
How the bandwidth factor in the CRLB drives the robust design
=============================================================

The CRLB here is B sigma2_p Tr(Q^-1) / (T_p (P_p eps + I_DC^2)), with the
noise bandwidth B included, and the CSI-error model draws positions with
that covariance. Dropping B (reading sigma2_p as a per-sample variance)
shrinks the position error by sqrt(B) and nearly removes the CSI error.
Both conventions are compared here with public pieces only.
"""

# %%
import numpy as np

from vlpc import AllocationConfig, Scenario, crlb_covariance, csi_moments, fim, gain_vector
from vlpc.errors import InfeasibleError
from vlpc.experiments import empirical_outage
from vlpc.ook import delta_threshold
from vlpc.robust import (BaselineAllocation, VlcContext, extract_beamformer,
                         nonrobust_allocation, solve_vlc_subproblem, vlp_power_update)

sc = Scenario()
u = sc.mu_position
h = gain_vector(sc)
rbar = 10e6
delta = delta_threshold(rbar, sc.bandwidth_hz, sc.sigma2_c, sc.peak_amp)
SCALES = {"with B": 1.0, "without B": 1.0 / sc.bandwidth_hz}


def moments(p_p, scale):
    return csi_moments(sc, u, crlb_covariance(fim(sc, u, p_p)) * scale, 10_000, 20211)


# %% [markdown]
# Non-robust design: matched beam and the least P_c meeting the rate on the
# estimated channel. Its outage depends on how large the CSI error is.

# %%
cfg = AllocationConfig.from_scenario(sc, 10.0, rbar, 0.05)
base = nonrobust_allocation(sc, u, cfg)
for label, scale in SCALES.items():
    m = moments(base.p_p, scale)
    std = np.sqrt(np.trace(crlb_covariance(fim(sc, u, base.p_p)) * scale))
    out, _ = empirical_outage(sc, base, m, rbar, 10_000, 20211)
    ratio = np.abs(m.mu).max() / np.sqrt(np.diag(m.d)).max()
    print(f"{label:10s} position std {std:.2e} m  |mu|/std {ratio:.2f}  outage {out:.3f}")


# %% [markdown]
# Robust design at P_out = 1%: scan for a feasible start, then iterate
# the plain BCD map to its fixed point.

# %%
def vlc_at(p, scale, cfg):
    ctx = VlcContext.build(h, moments(p, scale).omega, delta, cfg)
    return ctx, solve_vlc_subproblem(ctx)


def robust_design(p_out, scale, iters=60):
    cfg = AllocationConfig.from_scenario(sc, 10.0, rbar, p_out)
    for p in np.linspace(0.0, min(cfg.p_p_max, cfg.p_total), 11):
        try:
            ctx, vlc = vlc_at(p, scale, cfg)
        except InfeasibleError:
            continue
        if p + vlc.p_c <= cfg.p_total:
            break
    else:
        return None
    for _ in range(iters):
        p_new = vlp_power_update(vlc.p_c, cfg)
        if abs(p_new - p) < 1e-6:
            break
        p = p_new
        ctx, vlc = vlc_at(p, scale, cfg)
    v, _ = extract_beamformer(vlc.v_matrix, ctx)
    return BaselineAllocation(p, vlc.p_c, v, float("nan"), "robust"), moments(p, scale)


for label, scale in SCALES.items():
    got = robust_design(0.01, scale)
    if got is None:
        print(f"{label:10s} P_out 1%: infeasible within 10 W")
        continue
    alloc, m = got
    out, _ = empirical_outage(sc, alloc, m, rbar, 10_000, 20211)
    print(f"{label:10s} P_out 1%: P_p {alloc.p_p:.3f}  P_c {alloc.p_c:.4f}  outage {out:.4f}")
