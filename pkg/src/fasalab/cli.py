"""Command-line entry point: ``fasalab {drift,simulate,sweep,stability}``.

Every command writes plain CSV plus one ``summary.json`` (or report) into
``--out``. Parameters may also come from a flat JSON object passed with
``--config``; explicit flags win over file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import drift as drift_mod
from . import metrics
from .engine import ScenarioConfig, replication_seed, run_paired, run_replications
from .estimators import SCHEMES, FasaParams, KellyParams, scheme_params
from .traffic import BurstSpec, PoissonSpec

SCHEME_FLAGS = {
    "kelly": ("a0", "a1", "ac"),
    "pb-aloha": ("lambda_hat",),
    "qplus": ("zeta0", "zetac"),
    "fasa": ("nu", "eta"),
    "ideal": (),
}

DEFAULTS = {
    "seed": 1,
    "out": "out",
    "reps": 100,
    "workers": 1,
    # traffic
    "alpha": 3.0,
    "beta": 4.0,
    "span": 50,
    "max_slots": None,
    # drift
    "min": 0.05,
    "max": 10.0,
    "step": 0.01,
    "nu_list": [1.0, 2.0, 3.0],
    "baseline": True,
    # simulate
    "n_devices": 500,
    "scheme": "fasa",
    # sweep
    "n_list": [100, 500, 1000, 1500, 2000, 2500, 3000],
    "schemes": ["pb-aloha", "qplus", "fasa"],
    # stability
    "lambda_list": [0.30, 0.34, 0.36, 0.37],
    "horizon": 100_000,
    "n_seeds": 20,
}


class UsageError(Exception):
    pass


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(x) for x in str(text).split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot parse {text!r} as a list of {kind.__name__}")
    return parse


def _add_common(p):
    p.add_argument("--config", help="flat JSON object of option values; flags override it")
    p.add_argument("--seed", type=int, default=None, help="base seed (unsigned 64-bit)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--reps", type=int, default=None, help="replications per configuration")
    p.add_argument("--workers", type=int, default=None, help="worker processes for replications")


def _add_scheme_params(p):
    g = p.add_argument_group("scheme parameters")
    g.add_argument("--nu", type=float, default=None)
    g.add_argument("--eta", type=float, default=None)
    g.add_argument("--lambda-hat", dest="lambda_hat", type=float, default=None)
    g.add_argument("--zeta0", type=float, default=None)
    g.add_argument("--zetac", type=float, default=None)
    g.add_argument("--a0", type=float, default=None)
    g.add_argument("--a1", type=float, default=None)
    g.add_argument("--ac", type=float, default=None)


def _add_traffic(p):
    p.add_argument("--alpha", type=float, default=None, help="beta shape alpha (default 3)")
    p.add_argument("--beta", type=float, default=None, help="beta shape beta (default 4)")
    p.add_argument("--span", type=int, default=None, help="activation span T in slots (default 50)")
    p.add_argument("--max-slots", dest="max_slots", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fasalab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("drift", help="drift curves and monotonicity report")
    _add_common(p)
    p.add_argument("--min", type=float, default=None)
    p.add_argument("--max", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--nu-list", dest="nu_list", type=_csv_list(float), default=None,
                   help="comma-separated FASA exponents (default 1,2,3)")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--no-baseline", dest="baseline", action="store_const", const=False, default=None,
                   help="omit the fixed-step (-1, 0, 1/(e-2)) curve")

    p = sub.add_parser("simulate", help="single-burst replications of one scheme")
    _add_common(p)
    p.add_argument("-N", "--n-devices", dest="n_devices", type=int, default=None)
    p.add_argument("--scheme", default=None, help=f"one of {', '.join(SCHEMES)}")
    _add_scheme_params(p)
    _add_traffic(p)

    p = sub.add_parser("sweep", help="mean delay and divergence against the ideal genie over N")
    _add_common(p)
    p.add_argument("--n-list", dest="n_list", type=_csv_list(int), default=None)
    p.add_argument("--schemes", type=_csv_list(str), default=None)
    _add_scheme_params(p)
    _add_traffic(p)

    p = sub.add_parser("stability", help="bounded/unbounded backlog under Poisson arrivals")
    _add_common(p)
    p.add_argument("--lambda-list", dest="lambda_list", type=_csv_list(float), default=None)
    p.add_argument("--schemes", type=_csv_list(str), default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--n-seeds", dest="n_seeds", type=int, default=None)
    _add_scheme_params(p)
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(data, dict):
            raise UsageError("config file must hold a flat JSON object")
        opts.update({k.replace("-", "_"): v for k, v in data.items()})
    for key, value in vars(args).items():
        if value is not None and key != "config":
            opts[key] = value
    return opts


def _params_for(name: str, opts: dict) -> dict:
    return {k: float(opts[k]) for k in SCHEME_FLAGS.get(name, ()) if opts.get(k) is not None}


def _check_scheme(name):
    if name not in SCHEMES:
        raise UsageError(f"unknown scheme {name!r}; valid schemes: {', '.join(SCHEMES)}")


def _burst(opts, n):
    return BurstSpec(int(n), int(opts["span"]), float(opts["alpha"]), float(opts["beta"]))


def _prepare_out(opts) -> Path:
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _check_seed(opts):
    seed = int(opts["seed"])
    if not 0 <= seed < 2**64:
        raise UsageError(f"--seed must be an unsigned 64-bit integer, got {seed}")
    if int(opts["reps"]) < 1:
        raise UsageError("--reps must be >= 1")
    return seed


# --- commands -----------------------------------------------------------------


def cmd_drift(opts) -> int:
    lo, hi, step = float(opts["min"]), float(opts["max"]), float(opts["step"])
    if not (0 < lo < hi) or not step > 0:
        raise UsageError(f"drift grid needs 0 < --min < --max and --step > 0 (got {lo}, {hi}, {step})")
    eta = float(opts.get("eta") or 1.0)
    grid = drift_mod.rho_grid(lo, hi, step)
    out = _prepare_out(opts)

    files = []
    for nu in opts["nu_list"]:
        pts = drift_mod.drift_curve(grid, FasaParams(nu=float(nu), eta=eta))
        path = out / f"drift_fasa_nu{float(nu):g}.csv"
        drift_mod.write_drift_csv(path, [(pt, "fasa", nu, eta) for pt in pts])
        files.append(path.name)
    if opts["baseline"]:
        pts = drift_mod.drift_curve(grid, KellyParams())
        path = out / "drift_fixed_step.csv"
        drift_mod.write_drift_csv(path, [(pt, "fixed-step", None, None) for pt in pts])
        files.append(path.name)

    reports = []
    if lo <= 0.05 and hi >= 10.0:
        reports = [drift_mod.verify_proposition1(float(nu), eta, grid) for nu in opts["nu_list"]]
        lines = [line for r in reports for line in r.lines()]
    else:
        lines = ["grid does not span [0.05, 10]; monotonicity checks skipped"]
    (out / "proposition1.txt").write_text("\n".join(lines) + "\n")
    _write_json(out / "summary.json", {
        "command": "drift", "grid": {"min": lo, "max": hi, "step": step, "points": len(grid)},
        "eta": eta, "files": files,
        "checks_passed": all(r.passed for r in reports) if reports else None,
    })
    print("\n".join(lines))
    return 0


def cmd_simulate(opts) -> int:
    name = opts["scheme"]
    _check_scheme(name)
    n = int(opts["n_devices"])
    if n < 1:
        raise UsageError("-N must be >= 1")
    seed = _check_seed(opts)
    params = _params_for(name, opts)
    try:
        config = ScenarioConfig(_burst(opts, n), name, params, opts["max_slots"], seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    results = run_replications(config, int(opts["reps"]), workers=int(opts["workers"]))

    out = _prepare_out(opts)
    _write_pooled_delays(out / "delays.csv", results)
    cdf = metrics.delay_cdf(results)
    cdf.to_csv(out / "cdf.csv")
    summary = {
        "command": "simulate", "scheme": name, "params": params, "seed": seed,
        "n_devices": n, "reps": len(results),
        "traffic": dataclasses.asdict(config.traffic),
        "mean_delay": metrics.mean_delay(results),
        "percentiles": {f"{q:g}": metrics.percentile_delay(cdf, q) for q in (0.1, 0.5, 0.9)},
        "mean_slots_elapsed": float(np.mean([r.slots_elapsed for r in results])),
        "terminated": {t: sum(r.terminated == t for r in results) for t in sorted({r.terminated for r in results})},
        "replication_seeds": [r.seed for r in results],
    }
    _write_json(out / "summary.json", summary)
    print(f"{name}: N={n} reps={len(results)} mean delay {summary['mean_delay']:.2f} "
          f"slots, 10% delay {summary['percentiles']['0.1']:g} slots")
    return 0


def _write_pooled_delays(path, results):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replication", "device_id", "activation_slot", "success_slot", "delay_slots"])
        for rep, r in enumerate(results):
            for d, a, s in zip(r.device_ids.tolist(), r.activation_slots.tolist(), r.success_slots.tolist()):
                w.writerow([rep, d, a, s, s - a])


def cmd_sweep(opts) -> int:
    schemes = list(opts["schemes"])
    for s in schemes:
        _check_scheme(s)
    n_list = [int(n) for n in opts["n_list"]]
    if not n_list or min(n_list) < 1:
        raise UsageError("--n-list needs at least one N >= 1")
    seed = _check_seed(opts)
    reps = int(opts["reps"])
    wanted = {"ideal": {}}
    for s in schemes:
        wanted[s] = _params_for(s, opts)
    for s, p in wanted.items():
        try:
            scheme_params(s, p)
        except ValueError as exc:
            raise UsageError(str(exc))

    out = _prepare_out(opts)
    reports = []
    for n in n_list:
        res = run_paired(_burst(opts, n), wanted, reps, seed,
                         max_slots=opts["max_slots"], workers=int(opts["workers"]))
        for s in wanted:
            rep = metrics.divergence(res[s], res["ideal"], scheme=s)
            reports.append(dataclasses.replace(rep, n_devices=n))
            print(f"N={n:5d} {s:9s} D={rep.mean_delay:9.2f} e(D)={rep.divergence_pct:6.2f}%")
    metrics.write_divergence_csv(out / "divergence.csv", reports)
    _write_json(out / "summary.json", {
        "command": "sweep", "n_list": n_list, "schemes": list(wanted), "reps": reps, "seed": seed,
        "params": wanted,
    })
    return 0


def cmd_stability(opts) -> int:
    schemes = list(opts["schemes"])
    for s in schemes:
        _check_scheme(s)
    rates = [float(x) for x in opts["lambda_list"]]
    if any(r < 0 for r in rates):
        raise UsageError("arrival rates must be >= 0")
    horizon = int(opts["horizon"])
    if horizon < 10_000:
        raise UsageError("--horizon must be >= 10000")
    n_seeds = int(opts["n_seeds"])
    if n_seeds < 1:
        raise UsageError("--n-seeds must be >= 1")
    seed = _check_seed(opts)

    out = _prepare_out(opts)
    verdicts = []
    counts = {}
    for rate in rates:
        for s in schemes:
            cfg = ScenarioConfig(PoissonSpec(rate, horizon), s, _params_for(s, opts),
                                 max_slots=horizon, seed=seed, record_backlog_trace=True)
            runs = run_replications(cfg, n_seeds, workers=int(opts["workers"]))
            vs = [metrics.stability_verdict(r, rate) for r in runs]
            verdicts.extend(vs)
            k = sum(v.verdict == metrics.UNBOUNDED for v in vs)
            counts[f"{s}@{rate:g}"] = {"unbounded": k, "bounded": len(vs) - k}
            print(f"lambda={rate:g} {s:9s} unbounded in {k}/{len(vs)} runs")
    metrics.write_stability_csv(out / "stability.csv", verdicts)
    _write_json(out / "summary.json", {
        "command": "stability", "lambda_list": rates, "schemes": schemes, "horizon": horizon,
        "n_seeds": n_seeds, "seed": seed, "verdicts": counts,
        "replication_seeds": [replication_seed(seed, r) for r in range(n_seeds)],
        "rule": {"backlog_threshold": metrics.BACKLOG_THRESHOLD, "slope_threshold": metrics.SLOPE_THRESHOLD},
    })
    return 0


COMMANDS = {"drift": cmd_drift, "simulate": cmd_simulate, "sweep": cmd_sweep, "stability": cmd_stability}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fasalab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fasalab {args.command}: cannot write output: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
