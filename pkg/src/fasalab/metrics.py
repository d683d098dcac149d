"""Figures of merit computed from simulation results."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import RunResult

BOUNDED = "bounded"
UNBOUNDED = "unbounded"

BACKLOG_THRESHOLD = 1000
SLOPE_THRESHOLD = 0.01


@dataclass(frozen=True)
class DelayCdf:
    grid: np.ndarray  # distinct delay values, ascending
    cum_fraction: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["delay_slots", "cum_fraction"])
            for d, f in zip(self.grid.tolist(), self.cum_fraction.tolist()):
                w.writerow([d, repr(f)])


@dataclass(frozen=True)
class DivergenceReport:
    scheme: str
    mean_delay: float
    ideal_mean_delay: float
    divergence_pct: float
    n_reps: int
    std_error: float
    n_devices: int | None = None


@dataclass(frozen=True)
class StabilityVerdict:
    rate: float
    verdict: str
    final_backlog: int
    backlog_slope: float
    scheme: str = ""
    seed: int | None = None


def _pooled_delays(results: Sequence[RunResult]) -> np.ndarray:
    arrays = [r.delay_slots for r in results]
    if not arrays:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(arrays)


def delay_cdf(results: Sequence[RunResult]) -> DelayCdf:
    """Empirical access-delay CDF pooled over all runs."""
    d = _pooled_delays(results)
    if d.size == 0:
        raise ValueError("no delay records to build a CDF from")
    grid, counts = np.unique(d, return_counts=True)
    return DelayCdf(grid, np.cumsum(counts) / d.size)


def percentile_delay(cdf: DelayCdf, fraction: float) -> float:
    """Smallest delay at which at least ``fraction`` of devices have succeeded."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    # tolerate float noise in cumsum/size
    idx = int(np.searchsorted(cdf.cum_fraction, fraction - 1e-12, side="left"))
    return float(cdf.grid[min(idx, len(cdf.grid) - 1)])


def mean_delay(results: Sequence[RunResult]) -> float:
    d = _pooled_delays(results)
    if d.size == 0:
        raise ValueError("no delay records")
    return float(d.mean())


def divergence(
    scheme_results: Sequence[RunResult],
    ideal_results: Sequence[RunResult],
    scheme: str | None = None,
) -> DivergenceReport:
    """Percent excess of mean delay over the ideal benchmark.

    The standard error comes from per-replication mean delays. When the two
    lists have equal length they are treated as seed-paired and the error is
    that of the paired differences, propagated to the percentage.
    """
    if not scheme_results or not ideal_results:
        raise ValueError("both result lists must be nonempty")
    D = mean_delay(scheme_results)
    D_star = mean_delay(ideal_results)
    pct = (D - D_star) / D_star * 100.0

    per_rep = np.array([r.delay_slots.mean() for r in scheme_results if r.n_succeeded])
    per_rep_ideal = np.array([r.delay_slots.mean() for r in ideal_results if r.n_succeeded])
    if len(per_rep) == len(per_rep_ideal) and len(per_rep) > 1:
        se = float(np.std(per_rep - per_rep_ideal, ddof=1) / math.sqrt(len(per_rep))) / D_star * 100.0
    elif len(per_rep) > 1:
        se = float(np.std(per_rep, ddof=1) / math.sqrt(len(per_rep))) / D_star * 100.0
    else:
        se = float("nan")
    name = scheme if scheme is not None else (scheme_results[0].scheme or "")
    return DivergenceReport(
        scheme=name,
        mean_delay=D,
        ideal_mean_delay=D_star,
        divergence_pct=pct,
        n_reps=len(scheme_results),
        std_error=se,
    )


def backlog_slope(result: RunResult) -> float:
    """Least-squares slope of the backlog over the second half of the trace."""
    tr = result.trace
    half = tr[len(tr) // 2 :]
    if len(half) < 2:
        return 0.0
    x = half.slot.astype(float)
    y = half.backlog.astype(float)
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def stability_verdict(
    result: RunResult,
    rate: float,
    *,
    backlog_threshold: float = BACKLOG_THRESHOLD,
    slope_threshold: float = SLOPE_THRESHOLD,
) -> StabilityVerdict:
    """Unbounded iff the final backlog exceeds the threshold and is still rising."""
    if result.trace is None:
        raise ValueError("stability verdict needs a run recorded with a backlog trace")
    final = int(result.residual_backlog)
    slope = backlog_slope(result)
    unbounded = final > backlog_threshold and slope > slope_threshold
    return StabilityVerdict(
        rate=rate,
        verdict=UNBOUNDED if unbounded else BOUNDED,
        final_backlog=final,
        backlog_slope=slope,
        scheme=result.scheme,
        seed=result.seed,
    )


def write_divergence_csv(path, reports: Sequence[DivergenceReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "n_devices", "mean_delay", "ideal_delay", "divergence_pct", "std_error"])
        for r in reports:
            w.writerow([
                r.scheme, "" if r.n_devices is None else r.n_devices,
                repr(r.mean_delay), repr(r.ideal_mean_delay), repr(r.divergence_pct), repr(r.std_error),
            ])


def write_stability_csv(path, verdicts: Sequence[StabilityVerdict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "lambda", "verdict", "final_backlog", "slope"])
        for v in verdicts:
            w.writerow([v.scheme, repr(v.rate), v.verdict, v.final_backlog, repr(v.backlog_slope)])
