# %% [markdown]
# # Open system with Poisson arrivals
#
# Multiplicative estimators keep fluctuating around the true backlog, which
# lowers their maximum stable throughput below 1/e. Near that limit the
# backlog of such a scheme grows without bound, while additive schemes stay
# stable.

# %%
from fasalab import PoissonSpec, ScenarioConfig
from fasalab.engine import run_replications
from fasalab.metrics import UNBOUNDED, stability_verdict

HORIZON = 100_000

# %%
for rate in (0.34, 0.36, 0.37):
    for scheme in ("pb-aloha", "qplus", "fasa"):
        cfg = ScenarioConfig(PoissonSpec(rate, HORIZON), scheme, max_slots=HORIZON,
                             seed=11, record_backlog_trace=True)
        verdicts = [stability_verdict(r, rate) for r in run_replications(cfg, 5)]
        k = sum(v.verdict == UNBOUNDED for v in verdicts)
        finals = [v.final_backlog for v in verdicts]
        print(f"lambda={rate:.2f} {scheme:9s} unbounded {k}/5  final backlogs {finals}")
