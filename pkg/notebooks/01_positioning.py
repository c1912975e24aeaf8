"""
RSS positioning with one lamp and three photodetectors
======================================================

Gains, the CRLB and the least-squares estimator on the default room.
Run as a script or open as a percent-format notebook.
"""

# %%
import numpy as np

from vlpc import Scenario, crlb, gain_vector, solve_position
from vlpc.experiments import ExperimentConfig, run_positioning_sweep
from vlpc.positioning import p_p_for_snr

sc = Scenario()
print("lamp", sc.lamp, "MU", sc.mu_position)
print("gains", gain_vector(sc))

# %% [markdown]
# Noiseless gains pin the position down exactly.

# %%
est = solve_position(sc, gain_vector(sc))
print("noiseless error [m]:", np.linalg.norm(est.u_hat - sc.mu_position))

# %% [markdown]
# SNR is defined at the first PD, so each SNR maps to a positioning power.
# Those powers are tiny next to the 2 A DC bias, and the Fisher scale
# T_p (P_p eps + I_DC^2) barely moves: the curve is nearly flat.

# %%
for snr in (0, 15, 30):
    p = p_p_for_snr(sc, snr)
    print(f"{snr:>3} dB  P_p = {p:.3e} W  sqrt CRLB = {np.sqrt(crlb(sc, None, p)):.4f} m")

# %%
cfg = ExperimentConfig(sweep_param="snr_db", values=(0.0, 10.0, 20.0, 30.0), trials=300)
for r in run_positioning_sweep(cfg, sc):
    print(f"{r['value']:>5.1f} dB  RMSE {r['rmse']:.4f} +- {r['rmse_stderr']:.4f}"
          f"  sqrt CRLB {r['sqrt_crlb']:.4f}")

# %% [markdown]
# Same power, four test points along the diagonal toward the lamp.

# %%
cfg = ExperimentConfig(sweep_param="test_point", values=(1.0, 2.0, 3.0, 4.0), trials=300)
for r in run_positioning_sweep(cfg, sc):
    print(f"U{int(r['value'])} ({r['x_u']}, {r['y_u']})  RMSE {r['rmse']:.3f}"
          f"  sqrt CRLB {r['sqrt_crlb']:.3f}")

# %% [markdown]
# A wider PD triangle separates the three gains and helps quickly at first.

# %%
cfg = ExperimentConfig(sweep_param="side_length", values=(0.05, 0.1, 0.2, 0.4), trials=300)
for r in run_positioning_sweep(cfg, sc):
    print(f"L = {r['value']:.2f} m  RMSE {r['rmse']:.4f}  sqrt CRLB {r['sqrt_crlb']:.4f}")
