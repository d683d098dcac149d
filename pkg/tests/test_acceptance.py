"""Exit criteria, one test per criterion, each printing a PASS/FAIL line.

Monte-Carlo criteria all use one fixed base seed, ACCEPTANCE_SEED.
"""

import math
import subprocess
import sys

import numpy as np

from conftest import ACCEPTANCE_LINES
from fasalab import drift
from fasalab.cli import main as cli_main
from fasalab.core import COLLISION, IDLE, SUCCESS, EstimatorState
from fasalab.engine import ScenarioConfig, run_paired, run_replications, run_scenario
from fasalab.estimators import (
    FasaParams,
    KellyParams,
    PbAlohaParams,
    QPlusParams,
    fasa_update,
    kelly_update,
    pb_aloha_update,
    qplus_update,
)
from fasalab.metrics import UNBOUNDED, delay_cdf, divergence, percentile_delay, stability_verdict
from fasalab.traffic import BurstSpec, PoissonSpec, burst_activation_times
from fasalab.core import RngStream

ACCEPTANCE_SEED = 2026
E = math.e


def report(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_c1_drift_equilibrium():
    worst = max(abs(drift.fasa_drift(1.0, nu, eta)) for nu in (0.5, 1, 2, 3, 5) for eta in (0.5, 1, 2))
    assert report(1, worst < 1e-9, f"max |drift(1)| = {worst:.2e} (tol 1e-9)")


def test_c2_closed_form_cross_check():
    grid = drift.rho_grid(0.05, 10.0, 0.01)
    worst = 0.0
    for eta in (0.5, 1, 2):
        for rho in grid:
            a = drift.fasa_drift(rho, 2, eta)
            b = drift.fasa_drift_nu2_closed_form(rho, eta)
            worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    assert report(2, worst < 1e-9, f"max series/closed-form gap = {worst:.2e} (tol 1e-9, relative above |drift|>1)")


def test_c3_proposition1():
    grid = drift.rho_grid(0.05, 10.0, 0.01)
    reports = [drift.verify_proposition1(nu, eta, grid) for nu in (1, 2, 3) for eta in (0.5, 1, 2)]
    failed = [r for r in reports if not r.passed]
    detail = "all monotonicity/sign/meeting-point checks hold for nu in {1,2,3}, eta in {0.5,1,2}"
    if failed:
        detail = f"{len(failed)} failing: {failed[0].first_violation}"
    assert report(3, not failed, detail)


def test_c4_kelly_limits():
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    gaps = []
    for _ in range(3):
        a0, a1, ac = rng.uniform(-3, -0.1), rng.uniform(-1, 1), rng.uniform(0.1, 3)
        gaps.append(abs(drift.kelly_drift(1e-9, (a0, a1, ac)) - a0))
        gaps.append(abs(drift.kelly_drift(50.0, (a0, a1, ac)) - ac))
    assert report(4, max(gaps) < 1e-6, f"max limit gap = {max(gaps):.2e} (tol 1e-6)")


def _quantiles_10(n_devices):
    res = run_paired(BurstSpec(n_devices), {"fasa": {"nu": 2, "eta": 1}, "pb-aloha": {}}, 100, ACCEPTANCE_SEED)
    return {s: percentile_delay(delay_cdf(v), 0.1) for s, v in res.items()}


def test_c5_fig2_quantiles():
    q = _quantiles_10(500)
    ok = 230 <= q["fasa"] <= 330 and 440 <= q["pb-aloha"] <= 600
    assert report(5, ok, f"N=500 10% delay: FASA {q['fasa']:g} (want [230,330]), "
                         f"PB-ALOHA {q['pb-aloha']:g} (want [440,600])")


def test_fig2_quantiles_at_n1000_supplementary():
    # not an exit criterion: the reported 280/520 slot values are reproduced at N = 1000
    q = _quantiles_10(1000)
    ok = 230 <= q["fasa"] <= 330 and 440 <= q["pb-aloha"] <= 600
    report("5 (supplementary, N=1000)", ok, f"10% delay: FASA {q['fasa']:g}, PB-ALOHA {q['pb-aloha']:g}")
    assert ok


def test_c6_fig3_divergence():
    bands = {"pb-aloha": (14, 30), "qplus": (2, 9), "fasa": (0, 5)}
    ok = True
    parts = []
    for n in (1000, 3000):
        res = run_paired(BurstSpec(n), {"ideal": {}, "fasa": {"nu": 2, "eta": 1}, "qplus": {}, "pb-aloha": {}},
                         100, ACCEPTANCE_SEED)
        e = {s: divergence(res[s], res["ideal"], scheme=s).divergence_pct for s in bands}
        ok &= all(lo <= e[s] <= hi for s, (lo, hi) in bands.items())
        ok &= e["fasa"] < e["qplus"] < e["pb-aloha"]
        parts.append(f"N={n}: PB {e['pb-aloha']:.1f}%, Q+ {e['qplus']:.1f}%, FASA {e['fasa']:.1f}%")
    assert report(6, ok, "; ".join(parts))


def _unbounded_count(scheme, rate):
    cfg = ScenarioConfig(PoissonSpec(rate, 100_000), scheme, max_slots=100_000,
                         seed=ACCEPTANCE_SEED, record_backlog_trace=True)
    runs = run_replications(cfg, 20)
    return sum(stability_verdict(r, rate).verdict == UNBOUNDED for r in runs)


def test_c7_stability():
    qplus = _unbounded_count("qplus", 0.37)
    stable = {(s, lam): 20 - _unbounded_count(s, lam) for s in ("fasa", "pb-aloha") for lam in (0.34, 0.36)}
    ok = qplus >= 18 and all(v >= 18 for v in stable.values())
    detail = f"Q+ unbounded at 0.37 in {qplus}/20; bounded: " + ", ".join(
        f"{s}@{lam} {v}/20" for (s, lam), v in stable.items())
    assert report(7, ok, detail)


def test_c8_property_suite(tmp_path):
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    outcomes = (IDLE, SUCCESS, COLLISION)
    fasa0 = FasaParams(2.0, 0.0)
    fixed = KellyParams(-1.0, 0.0, 1.0 / (E - 2.0))
    updates = [(fasa_update, FasaParams(2, 1)), (kelly_update, fixed),
               (pb_aloha_update, PbAlohaParams()), (qplus_update, QPlusParams())]
    floor_ok = reset_ok = equiv_ok = True
    for _ in range(1000):
        seq = [outcomes[i] for i in rng.integers(0, 3, rng.integers(1, 200))]
        a = b = EstimatorState()
        for o in seq:
            a, b = fasa_update(a, fasa0, o), kelly_update(b, fixed, o)
            equiv_ok &= abs(a.estimate - b.estimate) <= 1e-12 * max(1.0, b.estimate)
        for upd, params in updates:
            s = EstimatorState()
            for o in seq:
                s = upd(s, params, o)
                floor_ok &= s.estimate >= 1.0
                if o is SUCCESS:
                    reset_ok &= s.idle_run == 0 and s.collision_run == 0

    conserve_ok = True
    for scheme in ("ideal", "fasa", "pb-aloha", "qplus"):
        for traffic, max_slots in ((BurstSpec(300), None), (PoissonSpec(0.42, 20_000), 20_000)):
            res = run_scenario(ScenarioConfig(traffic, scheme, max_slots=max_slots, seed=ACCEPTANCE_SEED))
            conserve_ok &= res.n_activated == res.n_succeeded + res.residual_backlog

    def tree(root):
        return {p.name: p.read_bytes() for p in sorted(root.iterdir())}

    cli_runs = [
        ["simulate", "-N", "300", "--scheme", "fasa", "--reps", "5"],
        ["sweep", "--n-list", "100,200", "--reps", "3"],
        ["stability", "--lambda-list", "0.3,0.37", "--horizon", "10000", "--n-seeds", "2"],
        ["drift", "--step", "0.05"],
    ]
    determ_ok = True
    for i, argv in enumerate(cli_runs):
        seed = ["--seed", str(ACCEPTANCE_SEED)]
        for k in range(2):
            cli_main(argv + seed + ["--out", str(tmp_path / f"{i}_{k}")])
        determ_ok &= tree(tmp_path / f"{i}_0") == tree(tmp_path / f"{i}_1")
    # a separate interpreter must produce the same bytes
    subprocess.run([sys.executable, "-m", "fasalab", *cli_runs[0], "--seed", str(ACCEPTANCE_SEED),
                    "--out", str(tmp_path / "proc")], check=True, capture_output=True)
    determ_ok &= tree(tmp_path / "proc") == tree(tmp_path / "0_0")

    checks = {"floor": floor_ok, "run reset": reset_ok, "eta=0 == fixed step": equiv_ok,
              "conservation": conserve_ok, "CLI determinism": determ_ok}
    ok = all(checks.values())
    assert report(8, ok, ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items()))


def test_c9_traffic_fidelity():
    from scipy import integrate, stats
    from fasalab.traffic import beta_activation_pdf

    spec = BurstSpec(100_000, 50, 3, 4)
    times = burst_activation_times(spec, RngStream(ACCEPTANCE_SEED, "gof"))
    edges = np.linspace(0, 50, 21)
    observed, _ = np.histogram(times, edges)
    probs = np.array([integrate.quad(beta_activation_pdf, a, b, args=(spec,))[0] for a, b in zip(edges[:-1], edges[1:])])
    p_chi = stats.chisquare(observed, probs * len(times)).pvalue

    uni = BurstSpec(100_000, 50, 1, 1)
    p_ks = stats.kstest(burst_activation_times(uni, RngStream(ACCEPTANCE_SEED, "ks")), stats.uniform(0, 50).cdf).pvalue
    ok = p_chi > 0.01 and p_ks > 0.01
    assert report(9, ok, f"beta(3,4) chi-square p = {p_chi:.3f}; Beta(1,1) KS p = {p_ks:.3f} (need > 0.01)")
