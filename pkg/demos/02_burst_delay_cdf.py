# %% [markdown]
# # One activation burst
#
# N devices wake up within T = 50 slots with Beta(3, 4)-shaped activation
# times, and every scheme must drain the backlog. All schemes see the same
# activation schedules (common random numbers).

# %%
import numpy as np

from fasalab import BurstSpec
from fasalab.engine import run_paired
from fasalab.metrics import delay_cdf, mean_delay, percentile_delay

SCHEMES = {"ideal": {}, "fasa": {"nu": 2, "eta": 1}, "qplus": {}, "pb-aloha": {}}

# %%
for n in (500, 1000):
    results = run_paired(BurstSpec(n), SCHEMES, n_reps=100, seed=7)
    print(f"N = {n}")
    for name, runs in results.items():
        cdf = delay_cdf(runs)
        drain = np.mean([r.slots_elapsed for r in runs])
        print(f"  {name:9s} 10% delay {percentile_delay(cdf, 0.1):6.0f}  "
              f"median {percentile_delay(cdf, 0.5):6.0f}  mean {mean_delay(runs):7.1f}  drain {drain:7.1f}")

# %% [markdown]
# The fixed-step scheme wastes its first few hundred slots on collisions while
# the estimate climbs by ~1.76 per slot; the run-length accelerated scheme
# catches up within a handful of slots and stays close to the genie.

# %%
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, runs in results.items():
        cdf = delay_cdf(runs)
        ax.step(cdf.grid, cdf.cum_fraction, where="post", label=name)
    ax.set(xlabel="access delay (slots)", ylabel="CDF", title="N = 1000")
    ax.legend()
    fig.savefig("delay_cdf.png", dpi=120, bbox_inches="tight")
    print("wrote delay_cdf.png")
except ImportError:
    pass
