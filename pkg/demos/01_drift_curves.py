# %% [markdown]
# # Drift of the backlog estimate
#
# Every estimator here broadcasts p = 1/N_hat. When the true backlog is N, the
# offered load is rho = N / N_hat, and the expected one-slot change of N_hat
# (the *drift*) tells us which way the estimate moves. A good estimator has
# negative drift for rho < 1 (overestimate: shrink) and positive drift for
# rho > 1 (underestimate: grow).

# %%
import numpy as np

from fasalab import drift
from fasalab.estimators import FasaParams, KellyParams

# %% [markdown]
# ## Fixed-step baseline
# Steps (-1, 0, 1/(e-2)) give zero drift at rho = 1, but the drift saturates at
# the step sizes when the estimate is far off.

# %%
fixed = KellyParams()
for rho in (1e-6, 0.5, 1.0, 2.0, 50.0):
    print(f"rho={rho:<8g} drift={drift.kelly_drift(rho, fixed):+.4f}")

# %% [markdown]
# ## Run-length accelerated steps
# The step after k consecutive idles (collisions) grows like k**nu. The scale
# factors h0, hc come from the geometric power moment M(nu, q) and make the
# drift vanish exactly at rho = 1.

# %%
for nu in (1, 2, 3):
    h0, hc = drift.normalizers(nu, 1.0)
    print(f"nu={nu}: h0={h0:.6f} hc={hc:.6f} drift(1)={drift.fasa_drift(1.0, nu, 1.0):+.1e}")

# %%
grid = drift.rho_grid(0.05, 10.0, 0.05)
curves = {f"fasa nu={nu}": drift.drift_curve(grid, FasaParams(nu, 1.0)) for nu in (1, 2, 3)}
curves["fixed step"] = drift.drift_curve(grid, fixed)
for rho in (0.1, 0.5, 2.0, 5.0):
    i = int(np.argmin(np.abs(grid - rho)))
    row = "  ".join(f"{name}: {pts[i].delta:+10.2f}" for name, pts in curves.items())
    print(f"rho={rho:<4g} {row}")

# %% [markdown]
# For nu = 2 there is a closed form; it agrees with the series evaluation.

# %%
gap = max(abs(drift.fasa_drift(r, 2, 1) - drift.fasa_drift_nu2_closed_form(r, 1)) / max(1, abs(drift.fasa_drift(r, 2, 1)))
          for r in grid)
print(f"largest relative gap, series vs closed form: {gap:.1e}")

# %% [markdown]
# ## Monotonicity
# The drift is strictly increasing in rho, so its only zero is rho = 1.

# %%
report = drift.verify_proposition1(2, 1.0, drift.rho_grid(0.05, 10.0, 0.01))
print("\n".join(report.lines()))

# %%
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, pts in curves.items():
        ax.plot([p.rho for p in pts], [p.delta for p in pts], label=name)
    ax.set(xscale="log", yscale="symlog", xlabel="offered load rho", ylabel="drift")
    ax.axhline(0, color="k", lw=0.5)
    ax.legend()
    fig.savefig("drift_curves.png", dpi=120, bbox_inches="tight")
    print("wrote drift_curves.png")
except ImportError:
    pass
