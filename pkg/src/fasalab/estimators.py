"""Transmission-probability controllers for slotted ALOHA.

Each estimator keeps a real-valued backlog estimate ``N_hat`` and broadcasts
``p = 1 / max(1, N_hat)``. The pure ``*_update`` functions map an
:class:`EstimatorState` and one slot outcome to the next state; the
controller classes wrap the same arithmetic with mutable float fields so the
simulation loop stays cheap.

The ideal genie is not an estimator: it is told the true backlog.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .core import (
    COLLISION,
    IDLE,
    SUCCESS,
    ControllerDecision,
    EstimatorState,
    SlotOutcome,
    probability_from_estimate,
)
from .drift import COLLISION_STEP, normalizers

PB_LAMBDA_HAT = math.exp(-1.0)
QPLUS_ZETA0 = 2.0**0.25
QPLUS_ZETAC = 2.0**0.35


# --- parameters -------------------------------------------------------------


@dataclass(frozen=True)
class KellyParams:
    a0: float = -1.0
    a1: float = 0.0
    ac: float = COLLISION_STEP

    def __post_init__(self):
        if not self.a0 < 0 < self.ac:
            warnings.warn(
                f"Kelly steps a0={self.a0}, ac={self.ac} do not satisfy a0 < 0 < ac; "
                "the estimate will not track the backlog",
                stacklevel=3,
            )


@dataclass(frozen=True)
class FasaParams:
    """Speed exponent ``nu``, speed scale ``eta`` and the derived normalizers.

    ``h0``/``hc`` are computed from ``nu`` and ``eta`` when omitted and
    verified against :func:`fasalab.drift.normalizers` when given.
    """

    nu: float = 2.0
    eta: float = 1.0
    h0: float = field(default=None)
    hc: float = field(default=None)

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        if self.eta == 0:
            # steps collapse to the fixed (-1, 0, 1/(e-2)) scheme
            h0 = hc = 0.0
        else:
            h0, hc = normalizers(self.nu, self.eta)
        for name, expected in (("h0", h0), ("hc", hc)):
            given = getattr(self, name)
            if given is None:
                object.__setattr__(self, name, expected)
            elif not math.isclose(given, expected, rel_tol=1e-9, abs_tol=1e-15):
                raise ValueError(f"{name}={given} inconsistent with nu, eta (expected {expected})")


@dataclass(frozen=True)
class QPlusParams:
    zeta0: float = QPLUS_ZETA0
    zetac: float = QPLUS_ZETAC

    def __post_init__(self):
        if not (self.zeta0 > 1 and self.zetac > 1):
            raise ValueError(f"zeta0 and zetac must exceed 1, got {self.zeta0}, {self.zetac}")


@dataclass(frozen=True)
class PbAlohaParams:
    lambda_hat: float = PB_LAMBDA_HAT

    def __post_init__(self):
        if not self.lambda_hat >= 0:
            raise ValueError(f"lambda_hat must be >= 0, got {self.lambda_hat}")


# --- scalar steps shared by the pure functions and the controllers ----------


def _fasa_step(est, k0, kc, outcome, nu, h0, hc):
    if outcome is IDLE:
        k0, kc = k0 + 1, 0
        est = max(1.0, est - 1.0 - h0 * k0**nu)
    elif outcome is COLLISION:
        k0, kc = 0, kc + 1
        est = est + COLLISION_STEP + hc * kc**nu
    else:
        k0 = kc = 0
    return est, k0, kc


def _kelly_step(est, outcome, a0, a1, ac):
    if outcome is IDLE:
        return max(1.0, est + a0)
    if outcome is SUCCESS:
        return max(1.0, est + a1)
    return max(1.0, est + ac)


def _pb_step(est, outcome, lam):
    if outcome is COLLISION:
        est = est + COLLISION_STEP + lam
    else:
        est = max(lam, est - 1.0) + lam
    return max(1.0, est)


def _qplus_step(est, outcome, zeta0, zetac):
    if outcome is IDLE:
        return max(1.0, est / zeta0)
    if outcome is COLLISION:
        return max(1.0, est * zetac)
    return est


# --- pure state updates -----------------------------------------------------


def fasa_update(state: EstimatorState, params: FasaParams, outcome: SlotOutcome) -> EstimatorState:
    """One FASA step.

    ``state`` carries the run counters as of the previous slot; the current
    outcome is counted into its run before the step size is computed, so the
    first idle slot after a non-idle one uses a run length of 1.
    """
    est, k0, kc = _fasa_step(
        state.estimate, state.idle_run, state.collision_run, outcome,
        params.nu, params.h0, params.hc,
    )
    return EstimatorState(est, k0, kc)


def kelly_update(state: EstimatorState, params: KellyParams, outcome: SlotOutcome) -> EstimatorState:
    k0, kc = state.advance_runs(outcome)
    est = _kelly_step(state.estimate, outcome, params.a0, params.a1, params.ac)
    return EstimatorState(est, k0, kc)


def pb_aloha_update(state: EstimatorState, params: PbAlohaParams, outcome: SlotOutcome) -> EstimatorState:
    k0, kc = state.advance_runs(outcome)
    return EstimatorState(_pb_step(state.estimate, outcome, params.lambda_hat), k0, kc)


def qplus_update(state: EstimatorState, params: QPlusParams, outcome: SlotOutcome) -> EstimatorState:
    k0, kc = state.advance_runs(outcome)
    return EstimatorState(_qplus_step(state.estimate, outcome, params.zeta0, params.zetac), k0, kc)


# --- controllers --------------------------------------------------------------


class Estimator:
    """Observation-driven controller: push one outcome, read the next probability."""

    name = "estimator"
    privileged = False

    def __init__(self, initial_estimate: float = 1.0):
        if not initial_estimate >= 1:
            raise ValueError(f"initial estimate must be >= 1, got {initial_estimate}")
        self.estimate = float(initial_estimate)
        self.idle_run = 0
        self.collision_run = 0

    @property
    def transmit_probability(self) -> float:
        return 1.0 / self.estimate if self.estimate > 1.0 else 1.0

    def decision(self) -> ControllerDecision:
        return ControllerDecision(self.transmit_probability)

    @property
    def state(self) -> EstimatorState:
        return EstimatorState(self.estimate, self.idle_run, self.collision_run)

    def _advance_runs(self, outcome):
        if outcome is IDLE:
            self.idle_run += 1
            self.collision_run = 0
        elif outcome is COLLISION:
            self.collision_run += 1
            self.idle_run = 0
        else:
            self.idle_run = self.collision_run = 0

    def observe(self, outcome: SlotOutcome) -> float:
        """Update on this slot's outcome and return the next transmit probability."""
        raise NotImplementedError


class FasaEstimator(Estimator):
    name = "fasa"

    def __init__(self, params: FasaParams | None = None, initial_estimate: float = 1.0):
        super().__init__(initial_estimate)
        self.params = params or FasaParams()
        self._nu, self._h0, self._hc = self.params.nu, self.params.h0, self.params.hc

    def observe(self, outcome):
        self.estimate, self.idle_run, self.collision_run = _fasa_step(
            self.estimate, self.idle_run, self.collision_run, outcome,
            self._nu, self._h0, self._hc,
        )
        return self.transmit_probability


class KellyEstimator(Estimator):
    name = "kelly"

    def __init__(self, params: KellyParams | None = None, initial_estimate: float = 1.0):
        super().__init__(initial_estimate)
        self.params = params or KellyParams()

    def observe(self, outcome):
        self._advance_runs(outcome)
        p = self.params
        self.estimate = _kelly_step(self.estimate, outcome, p.a0, p.a1, p.ac)
        return self.transmit_probability


class PbAlohaEstimator(Estimator):
    name = "pb-aloha"

    def __init__(self, params: PbAlohaParams | None = None, initial_estimate: float = 1.0):
        super().__init__(initial_estimate)
        self.params = params or PbAlohaParams()

    def observe(self, outcome):
        self._advance_runs(outcome)
        self.estimate = _pb_step(self.estimate, outcome, self.params.lambda_hat)
        return self.transmit_probability


class QPlusEstimator(Estimator):
    name = "qplus"

    def __init__(self, params: QPlusParams | None = None, initial_estimate: float = 1.0):
        super().__init__(initial_estimate)
        self.params = params or QPlusParams()

    def observe(self, outcome):
        self._advance_runs(outcome)
        self.estimate = _qplus_step(self.estimate, outcome, self.params.zeta0, self.params.zetac)
        return self.transmit_probability


class IdealController:
    """Genie that knows the true backlog and sets ``p = 1/max(1, N)``."""

    name = "ideal"
    privileged = True

    def __init__(self):
        self.estimate = 1.0

    def probability_for(self, backlog: int) -> float:
        self.estimate = float(max(1, backlog))
        return 1.0 / self.estimate

    def observe(self, outcome):
        return 1.0 / self.estimate


# --- name registry ------------------------------------------------------------

_REGISTRY = {
    "ideal": (IdealController, None),
    "kelly": (KellyEstimator, KellyParams),
    "pb-aloha": (PbAlohaEstimator, PbAlohaParams),
    "qplus": (QPlusEstimator, QPlusParams),
    "fasa": (FasaEstimator, FasaParams),
}

SCHEMES = tuple(_REGISTRY)


def scheme_params(name: str, params: dict | None = None):
    """Build the parameter object for a named scheme from a flat mapping."""
    if name not in _REGISTRY:
        raise ValueError(f"unknown scheme {name!r}; valid schemes: {', '.join(SCHEMES)}")
    params = dict(params or {})
    params.pop("initial_estimate", None)
    cls = _REGISTRY[name][1]
    if cls is None:
        if params:
            raise ValueError(f"scheme 'ideal' takes no parameters, got {sorted(params)}")
        return None
    try:
        return cls(**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name!r}: {exc}") from None


def make_controller(name: str, params: dict | None = None):
    """Instantiate a fresh controller by scheme name with a flat parameter map."""
    obj = scheme_params(name, params)
    ctrl_cls = _REGISTRY[name][0]
    if ctrl_cls is IdealController:
        return IdealController()
    initial = float((params or {}).get("initial_estimate", 1.0))
    return ctrl_cls(obj, initial_estimate=initial)


__all__ = [
    "FasaEstimator", "FasaParams", "IdealController", "KellyEstimator", "KellyParams",
    "PbAlohaEstimator", "PbAlohaParams", "QPlusEstimator", "QPlusParams", "SCHEMES",
    "fasa_update", "kelly_update", "make_controller", "pb_aloha_update",
    "probability_from_estimate", "qplus_update", "scheme_params",
]
