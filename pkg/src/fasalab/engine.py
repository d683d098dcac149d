"""Slot-by-slot slotted-ALOHA simulation with deferred first transmission.

Per slot ``t``:

1. devices activating in ``t`` join the backlog;
2. the controller supplies ``p_t`` (the genie is told ``N_t``);
3. the number of transmitters is ``Binomial(N_t, p_t)``;
4. 0/1/2+ transmitters give idle/success/collision;
5. on success a uniformly chosen backlogged device leaves;
6. the controller observes the outcome.

Only the outcome class of the transmitter count matters, so step 3 draws the
class directly from the three binomial cell probabilities with one uniform.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import COLLISION, IDLE, SUCCESS, RngStream, derive_seed
from .estimators import make_controller, scheme_params
from .traffic import ArrivalSchedule, BurstSpec, PoissonSpec, generate

DRAINED = "drained"
HORIZON_REACHED = "horizon_reached"

BURST_MAX_SLOTS = 100_000
STABILITY_MAX_SLOTS = 1_000_000

_BLOCK = 8192


@dataclass(frozen=True)
class ScenarioConfig:
    traffic: BurstSpec | PoissonSpec
    scheme: str = "fasa"
    params: dict = field(default_factory=dict)
    max_slots: int | None = None
    seed: int = 0
    record_backlog_trace: bool = False

    def __post_init__(self):
        scheme_params(self.scheme, self.params)  # validates name and parameters
        if self.max_slots is None:
            default = BURST_MAX_SLOTS if isinstance(self.traffic, BurstSpec) else STABILITY_MAX_SLOTS
            object.__setattr__(self, "max_slots", max(default, self.traffic.horizon))
        if self.max_slots < self.traffic.horizon:
            raise ValueError(
                f"max_slots={self.max_slots} is shorter than the traffic horizon {self.traffic.horizon}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def with_(self, **changes) -> "ScenarioConfig":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kw.update(changes)
        return ScenarioConfig(**kw)


@dataclass(frozen=True)
class DelayRecord:
    device_id: int
    activation_slot: int
    success_slot: int
    delay_slots: int


@dataclass(eq=False)
class RunResult:
    """Outcome of one simulated run.

    Delays are kept columnar (one array per field, in order of success);
    :attr:`delays` materialises :class:`DelayRecord` objects on demand.
    """

    device_ids: np.ndarray
    activation_slots: np.ndarray
    success_slots: np.ndarray
    terminated: str
    slots_elapsed: int
    n_activated: int
    scheme: str = ""
    params: dict = field(default_factory=dict)
    seed: int = 0
    trace: np.ndarray | None = None  # rows of (slot, backlog, estimate)
    n_success_slots: int = 0

    @property
    def delay_slots(self) -> np.ndarray:
        return self.success_slots - self.activation_slots

    @property
    def delays(self) -> list[DelayRecord]:
        return [
            DelayRecord(int(d), int(a), int(s), int(s - a))
            for d, a, s in zip(self.device_ids, self.activation_slots, self.success_slots)
        ]

    @property
    def n_succeeded(self) -> int:
        return len(self.success_slots)

    @property
    def residual_backlog(self) -> int:
        return self.n_activated - self.n_succeeded

    @property
    def backlog_trace(self):
        return None if self.trace is None else [
            (int(s), int(n), float(e)) for s, n, e in self.trace
        ]

    def summary(self) -> dict:
        d = self.delay_slots
        return {
            "scheme": self.scheme,
            "params": {k: self.params[k] for k in sorted(self.params)},
            "seed": self.seed,
            "slots_elapsed": self.slots_elapsed,
            "terminated": self.terminated,
            "n_activated": self.n_activated,
            "n_succeeded": self.n_succeeded,
            "mean_delay": float(d.mean()) if d.size else None,
        }

    def write(self, out_dir, *, delays: bool = True, trace: bool = True) -> None:
        """Write ``summary.json`` plus ``delays.csv`` / ``trace.csv`` companions."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        if delays:
            write_delays_csv(out / "delays.csv", [self])
        if trace and self.trace is not None:
            with open(out / "trace.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["slot", "backlog", "estimate"])
                for s, n, e in self.trace:
                    w.writerow([int(s), int(n), repr(float(e))])

    def fingerprint(self) -> bytes:
        """Byte serialization used for determinism checks."""
        parts = [
            json.dumps(self.summary(), sort_keys=True).encode(),
            self.device_ids.tobytes(),
            self.activation_slots.tobytes(),
            self.success_slots.tobytes(),
        ]
        if self.trace is not None:
            parts.append(self.trace.tobytes())
        return b"".join(parts)


def write_delays_csv(path, results) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["device_id", "activation_slot", "success_slot", "delay_slots"])
        for r in results:
            for d, a, s in zip(r.device_ids.tolist(), r.activation_slots.tolist(), r.success_slots.tolist()):
                w.writerow([d, a, s, s - a])


def traffic_rng(seed: int) -> RngStream:
    return RngStream(seed, "traffic")


def channel_rng(seed: int) -> RngStream:
    return RngStream(seed, "channel")


def run_scenario(config: ScenarioConfig, schedule: ArrivalSchedule | None = None) -> RunResult:
    """Simulate one run; ``schedule`` overrides the traffic generated from the seed."""
    if schedule is None:
        schedule = generate(config.traffic, traffic_rng(config.seed))
    controller = make_controller(config.scheme, config.params)
    gen = channel_rng(config.seed).generator
    return _simulate(schedule.activation_slots, controller, gen, config)


def _simulate(activation, controller, gen, config) -> RunResult:
    activation = np.asarray(activation, dtype=np.int64)
    n_total = len(activation)
    act_list = activation.tolist()
    max_slots = int(config.max_slots)
    genie = controller.privileged
    want_trace = config.record_backlog_trace

    backlog: list[int] = []  # device ids
    out_ids: list[int] = []
    out_succ: list[int] = []
    trace_slot: list[int] = []
    trace_n: list[int] = []
    trace_est: list[float] = []

    log1p = math.log1p
    exp = math.exp
    uniforms = gen.random(_BLOCK).tolist()
    ui = 0
    nxt = 0  # next device to activate
    n_success_slots = 0
    p = 1.0 if genie else controller.transmit_probability
    t = 0
    terminated = HORIZON_REACHED
    while t < max_slots:
        while nxt < n_total and act_list[nxt] == t:
            backlog.append(nxt)
            nxt += 1
        n = len(backlog)
        if genie:
            p = controller.probability_for(n)
        if want_trace:
            trace_slot.append(t)
            trace_n.append(n)
            trace_est.append(controller.estimate)

        if ui >= _BLOCK - 1:
            uniforms = gen.random(_BLOCK).tolist()
            ui = 0
        if n == 0:
            outcome = IDLE
        else:
            u = uniforms[ui]
            ui += 1
            if p >= 1.0:
                outcome = SUCCESS if n == 1 else COLLISION
            else:
                # P(k=0) = (1-p)^n, P(k=1) = n p (1-p)^(n-1)
                p_idle = exp(n * log1p(-p))
                if u < p_idle:
                    outcome = IDLE
                elif u < p_idle + n * p * p_idle / (1.0 - p):
                    outcome = SUCCESS
                else:
                    outcome = COLLISION
        if outcome is SUCCESS:
            j = int(uniforms[ui] * n)
            ui += 1
            dev = backlog[j]
            backlog[j] = backlog[-1]
            backlog.pop()
            out_ids.append(dev)
            out_succ.append(t)
            n_success_slots += 1
        p = controller.observe(outcome)
        t += 1
        if not backlog and nxt >= n_total:
            terminated = DRAINED
            break

    ids = np.asarray(out_ids, dtype=np.int64)
    trace = None
    if want_trace:
        trace = np.rec.fromarrays(
            [np.asarray(trace_slot, dtype=np.int64), np.asarray(trace_n, dtype=np.int64),
             np.asarray(trace_est, dtype=float)],
            names="slot,backlog,estimate",
        )
    return RunResult(
        device_ids=ids,
        activation_slots=activation[ids] if ids.size else np.zeros(0, dtype=np.int64),
        success_slots=np.asarray(out_succ, dtype=np.int64),
        terminated=terminated,
        slots_elapsed=t,
        n_activated=nxt,
        scheme=config.scheme,
        params=dict(config.params),
        seed=int(config.seed),
        trace=trace,
        n_success_slots=n_success_slots,
    )


def replication_seed(base_seed: int, rep: int) -> int:
    """Replication 0 reuses the base seed; later ones are hashed from it."""
    return int(base_seed) if rep == 0 else derive_seed(base_seed, "replication", rep)


def _run_one(config):
    return run_scenario(config)


def _map(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
    return [fn(x) for x in items]


def run_replications(config: ScenarioConfig, n_reps: int, *, workers: int = 1) -> list[RunResult]:
    """``n_reps`` independent runs with seeds derived from ``config.seed``."""
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    configs = [config.with_(seed=replication_seed(config.seed, r)) for r in range(n_reps)]
    return _map(_run_one, configs, workers)


def run_paired(
    traffic,
    schemes: dict[str, dict],
    n_reps: int,
    seed: int,
    *,
    max_slots: int | None = None,
    record_backlog_trace: bool = False,
    workers: int = 1,
) -> dict[str, list[RunResult]]:
    """Common-random-numbers comparison of several schemes.

    Replication ``r`` of every scheme sees the same activation schedule and
    the same channel uniform stream, so differences between schemes are not
    diluted by traffic noise.
    """
    results = {}
    for name, params in schemes.items():
        base = ScenarioConfig(
            traffic=traffic, scheme=name, params=dict(params), max_slots=max_slots,
            seed=seed, record_backlog_trace=record_backlog_trace,
        )
        results[name] = run_replications(base, n_reps, workers=workers)
    return results
