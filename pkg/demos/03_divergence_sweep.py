# %% [markdown]
# # Mean delay against the perfect-knowledge benchmark
#
# e(D) = (D - D*) / D* * 100 where D* is the genie's mean delay on the same
# activation schedules.

# %%
from fasalab import BurstSpec
from fasalab.engine import run_paired
from fasalab.metrics import divergence

SCHEMES = {"ideal": {}, "pb-aloha": {}, "qplus": {}, "fasa": {"nu": 2, "eta": 1}}

# %%
print(f"{'N':>5} {'ideal D*':>9} " + " ".join(f"{s:>10}" for s in list(SCHEMES)[1:]))
for n in (100, 500, 1000, 2000, 3000):
    res = run_paired(BurstSpec(n), SCHEMES, n_reps=50, seed=3)
    reps = {s: divergence(res[s], res["ideal"], scheme=s) for s in SCHEMES if s != "ideal"}
    d_star = next(iter(reps.values())).ideal_mean_delay
    print(f"{n:5d} {d_star:9.1f} " + " ".join(f"{r.divergence_pct:9.1f}%" for r in reps.values()))

# %% [markdown]
# The genie's delay grows linearly in N (it drains at rate 1/e). The fixed-step
# scheme pays a tracking penalty proportional to N, so its divergence stays
# near a constant ~20-25%, while the accelerated and multiplicative schemes
# approach the benchmark as N grows.
