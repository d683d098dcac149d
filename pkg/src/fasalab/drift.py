"""Analytic drift of backlog estimators.

Everything here is a pure function of the offered load ``rho = N / N_hat``.
The central quantity is the power moment of a geometric run length,

    M(nu, q) = sum_{k>=1} k**nu * q**(k-1) * (1 - q),

which sets the normalizers of the run-length-accelerated (FASA) estimator
and its expected one-slot drift.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

E = math.e
COLLISION_STEP = 1.0 / (E - 2.0)

# Outcome probabilities at the throughput-optimal load rho = 1.
Q0_STAR = math.exp(-1.0)
QC_STAR = 1.0 - 2.0 * math.exp(-1.0)

SERIES_RTOL = 1e-12
SERIES_MAX_TERMS = 1_000_000
Q_MAX = 1.0 - 1e-6


@dataclass(frozen=True)
class OutcomeProbabilities:
    q0: float
    q1: float
    qc: float


@dataclass(frozen=True)
class DriftPoint:
    rho: float
    delta: float


def _check_rho(rho):
    if not (rho > 0 and math.isfinite(rho)):
        raise ValueError(f"offered load must be positive and finite, got {rho}")


def outcome_probabilities(rho: float) -> OutcomeProbabilities:
    """Idle/success/collision probabilities of a Poisson(rho) transmitter count."""
    _check_rho(rho)
    q0 = math.exp(-rho)
    q1 = rho * q0
    # -expm1 keeps qc accurate for tiny rho where 1 - q0 - q1 cancels
    qc = -math.expm1(-rho) - q1
    return OutcomeProbabilities(q0, q1, qc)


def _check_q(q):
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if q > Q_MAX:
        raise ValueError(f"q = {q} is too close to 1 for the series evaluation")


def geometric_power_moment(nu: float, q: float, *, max_terms: int = SERIES_MAX_TERMS) -> float:
    """``E[K**nu]`` for ``K ~ Geometric(1 - q)`` on {1, 2, ...}, by series summation.

    Terms are evaluated in log space in chunks. Summation stops once the
    geometric tail bound past the (unimodal) peak drops below
    ``SERIES_RTOL`` times the partial sum.

    Raises ArithmeticError if ``max_terms`` is exhausted first.
    """
    if nu < 0:
        raise ValueError(f"nu must be >= 0, got {nu}")
    _check_q(q)
    log_q = math.log(q)
    log_p = math.log1p(-q)
    total = 0.0
    start = 1
    chunk = 1024
    while start <= max_terms:
        stop = min(start + chunk, max_terms + 1)
        k = np.arange(start, stop, dtype=float)
        total += float(np.sum(np.exp(nu * np.log(k) + (k - 1.0) * log_q + log_p)))
        last = stop - 1
        ratio = q * ((last + 1.0) / last) ** nu
        if ratio < 1.0:
            last_term = math.exp(nu * math.log(last) + (last - 1.0) * log_q + log_p)
            tail = last_term * ratio / (1.0 - ratio)
            if tail <= SERIES_RTOL * total:
                return total
        start = stop
        chunk *= 2
    raise ArithmeticError(f"M({nu}, {q}) did not converge within {max_terms} terms")


def moment_closed_form(nu: int, q: float) -> float:
    """Closed forms of M(nu, q) for nu in {0, 1, 2, 3}."""
    _check_q(q)
    if nu == 0:
        return 1.0
    if nu == 1:
        return 1.0 / (1.0 - q)
    if nu == 2:
        return (1.0 + q) / (1.0 - q) ** 2
    if nu == 3:
        return (1.0 + 4.0 * q + q * q) / (1.0 - q) ** 3
    raise ValueError(f"no closed form for nu = {nu}")


@lru_cache(maxsize=256)
def _normalizer_moments(nu: float) -> tuple[float, float]:
    return geometric_power_moment(nu, Q0_STAR), geometric_power_moment(nu, QC_STAR)


def normalizers(nu: float, eta: float) -> tuple[float, float]:
    """Idle and collision step scales ``(h0, hc)`` that put zero drift at rho = 1."""
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    m0, mc = _normalizer_moments(float(nu))
    return eta / (Q0_STAR * m0), eta / (QC_STAR * mc)


def kelly_drift(rho: float, params) -> float:
    """Asymptotic drift of a fixed-step additive estimator.

    ``params`` is anything with ``a0``, ``a1`` and ``ac`` attributes
    (e.g. :class:`fasalab.estimators.KellyParams`) or an ``(a0, a1, ac)`` tuple.
    """
    a0, a1, ac = _kelly_steps(params)
    q = outcome_probabilities(rho)
    return (a0 - ac) * q.q0 + (a1 - ac) * q.q1 + ac


def _kelly_steps(params):
    if hasattr(params, "a0"):
        return params.a0, params.a1, params.ac
    a0, a1, ac = params
    return a0, a1, ac


def baseline_drift(rho: float) -> float:
    """Drift of the fixed-step scheme with steps (-1, 0, 1/(e-2)).

    The collision weight is ``1 - (1 + rho) e^-rho``; writing it as
    ``1 - 2 e^-rho`` is only correct at rho = 1.
    """
    _check_rho(rho)
    q0 = math.exp(-rho)
    return -q0 + (1.0 - (1.0 + rho) * q0) / (E - 2.0)


def idle_component(rho: float, nu: float, eta: float) -> float:
    """Magnitude of the idle contribution, ``q0 * (1 + h0 * M(nu, q0))``."""
    h0, _ = normalizers(nu, eta)
    q0 = outcome_probabilities(rho).q0
    return q0 * (1.0 + h0 * geometric_power_moment(nu, q0))


def collision_component(rho: float, nu: float, eta: float) -> float:
    """Collision contribution, ``qc * (1/(e-2) + hc * M(nu, qc))``."""
    _, hc = normalizers(nu, eta)
    qc = outcome_probabilities(rho).qc
    return qc * (COLLISION_STEP + hc * geometric_power_moment(nu, qc))


def fasa_drift(rho: float, nu: float, eta: float) -> float:
    """Approximate one-slot drift of the FASA estimate at offered load ``rho``."""
    return collision_component(rho, nu, eta) - idle_component(rho, nu, eta)


def fasa_drift_nu2_closed_form(rho: float, eta: float) -> float:
    """Closed-form FASA drift for nu = 2 (independent of the series path)."""
    _check_rho(rho)
    er = math.exp(rho)
    idle = -((E - 1.0) ** 2) * (er + 1.0) / ((E + 1.0) * math.expm1(rho) ** 2)
    coll = (
        2.0 * (er - rho - 1.0) * (2.0 * er - rho - 1.0)
        / ((E - 2.0) * (E - 1.0) * (rho + 1.0) ** 2)
    )
    return baseline_drift(rho) + eta * (idle + coll)


def drift_curve(rho_grid: Sequence[float], scheme) -> list[DriftPoint]:
    """Evaluate a drift function over a grid.

    ``scheme`` is either a FASA parameter object (``nu``/``eta`` attributes)
    or fixed-step parameters (``a0``/``a1``/``ac`` or a 3-tuple).
    """
    grid = list(rho_grid)
    if not grid:
        raise ValueError("rho grid is empty")
    if hasattr(scheme, "nu"):
        fn = lambda r: fasa_drift(r, scheme.nu, scheme.eta)  # noqa: E731
    else:
        fn = lambda r: kelly_drift(r, scheme)  # noqa: E731
    return [DriftPoint(float(r), float(fn(r))) for r in grid]


def rho_grid(rho_min: float, rho_max: float, step: float) -> np.ndarray:
    """Inclusive, evenly spaced grid rounded to 12 decimals so that 1.0 lands exactly."""
    if not (0 < rho_min < rho_max):
        raise ValueError(f"need 0 < min < max, got {rho_min}, {rho_max}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    n = int(math.floor((rho_max - rho_min) / step + 1e-9)) + 1
    return np.round(rho_min + step * np.arange(n), 12)


def write_drift_csv(path, rows: Iterable[tuple[DriftPoint, str, object, object]]) -> None:
    """Write ``rho,delta,scheme,nu,eta`` rows; ``nu``/``eta`` may be empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rho", "delta", "scheme", "nu", "eta"])
        for point, name, nu, eta in rows:
            writer.writerow([
                repr(point.rho),
                repr(point.delta),
                name,
                "" if nu is None else repr(float(nu)),
                "" if eta is None else repr(float(eta)),
            ])


# --- numerical checks of the monotonicity argument --------------------------


@dataclass
class Proposition1Report:
    nu: float
    eta: float
    passed: bool
    checks: dict = field(default_factory=dict)
    first_violation: dict | None = None

    def lines(self) -> list[str]:
        out = [f"nu={self.nu} eta={self.eta}: {'PASS' if self.passed else 'FAIL'}"]
        for name, ok in self.checks.items():
            out.append(f"  {name}: {'pass' if ok else 'FAIL'}")
        if self.first_violation:
            out.append(f"  first violation: {self.first_violation}")
        return out


EQUILIBRIUM_TOL = 1e-9


def verify_proposition1(
    nu: float,
    eta: float,
    rho_grid: Sequence[float],
    q_grid: Sequence[float] | None = None,
) -> Proposition1Report:
    """Check monotonicity and sign structure of the FASA drift on a grid.

    Checks that the drift is strictly increasing, negative below rho = 1 and
    positive above it; that the idle component is strictly decreasing and the
    collision component strictly increasing with common value
    ``exp(-1) + eta`` at rho = 1; and that M(nu, q) increases in q.
    """
    rho = np.asarray(rho_grid, dtype=float)
    if rho.size < 2 or np.any(np.diff(rho) <= 0):
        raise ValueError("rho grid must be strictly increasing")
    if rho[0] > 0.05 or rho[-1] < 10.0:
        raise ValueError("rho grid must span at least [0.05, 10]")
    if q_grid is None:
        q_grid = np.round(np.arange(0.01, 0.95 + 1e-9, 0.01), 12)
    q_grid = np.asarray(q_grid, dtype=float)

    g0 = np.array([idle_component(r, nu, eta) for r in rho])
    gc = np.array([collision_component(r, nu, eta) for r in rho])
    delta = gc - g0

    report = Proposition1Report(nu=nu, eta=eta, passed=True)

    def record(name, ok, where=None):
        report.checks[name] = bool(ok)
        if not ok:
            report.passed = False
            if report.first_violation is None:
                report.first_violation = {"check": name, **(where or {})}

    def first_bad(mask, xs, label="rho"):
        idx = int(np.argmax(mask))
        return {label: float(xs[idx])}

    bad = np.diff(delta) <= 0
    record("drift strictly increasing", not bad.any(), first_bad(bad, rho[1:]) if bad.any() else None)

    at_one = np.abs(rho - 1.0) < 1e-12
    bad = ((rho < 1.0) & ~at_one & (delta >= 0)) | ((rho > 1.0) & ~at_one & (delta <= 0))
    bad |= at_one & (np.abs(delta) > EQUILIBRIUM_TOL)
    record("drift sign about rho=1", not bad.any(), first_bad(bad, rho) if bad.any() else None)

    bad = np.diff(g0) >= 0
    record("idle component decreasing", not bad.any(), first_bad(bad, rho[1:]) if bad.any() else None)
    bad = np.diff(gc) <= 0
    record("collision component increasing", not bad.any(), first_bad(bad, rho[1:]) if bad.any() else None)

    target = math.exp(-1.0) + eta
    g0_1 = idle_component(1.0, nu, eta)
    gc_1 = collision_component(1.0, nu, eta)
    ok = abs(g0_1 - target) <= EQUILIBRIUM_TOL and abs(gc_1 - target) <= EQUILIBRIUM_TOL
    record("components meet at exp(-1)+eta", ok, {"rho": 1.0, "g0": g0_1, "gc": gc_1})

    m = np.array([geometric_power_moment(nu, q) for q in q_grid])
    bad = np.diff(m) <= 0
    record("M(nu, q) increasing in q", not bad.any(), first_bad(bad, q_grid[1:], "q") if bad.any() else None)
    return report
