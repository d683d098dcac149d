"""Device activation schedules: a beta-shaped burst or per-slot Poisson arrivals."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import RngStream


@dataclass(frozen=True)
class BurstSpec:
    """``n_devices`` activations spread over ``span_slots`` with a Beta(alpha, beta) shape."""

    n_devices: int
    span_slots: int = 50
    alpha: float = 3.0
    beta: float = 4.0

    def __post_init__(self):
        if self.n_devices < 1:
            raise ValueError(f"n_devices must be >= 1, got {self.n_devices}")
        if self.span_slots < 1:
            raise ValueError(f"span_slots must be >= 1, got {self.span_slots}")
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")

    @property
    def horizon(self) -> int:
        return self.span_slots


@dataclass(frozen=True)
class PoissonSpec:
    rate: float
    horizon: int

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")


@dataclass(frozen=True, eq=False)
class ArrivalSchedule:
    """Sorted activation slot of every device; device ids are array positions."""

    activation_slots: np.ndarray

    def __len__(self):
        return len(self.activation_slots)

    def __eq__(self, other):
        return isinstance(other, ArrivalSchedule) and np.array_equal(
            self.activation_slots, other.activation_slots
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["device_id", "activation_slot"])
            w.writerows(enumerate(self.activation_slots.tolist()))


def burst_activation_times(spec: BurstSpec, rng: RngStream) -> np.ndarray:
    """Continuous activation times on [0, T), unsorted, one per device."""
    x = rng.generator.beta(spec.alpha, spec.beta, size=spec.n_devices)
    return x * spec.span_slots


def generate_burst(spec: BurstSpec, rng: RngStream) -> ArrivalSchedule:
    times = burst_activation_times(spec, rng)
    # beta draws can round to exactly 1.0 in float64
    slots = np.minimum(np.floor(times).astype(np.int64), spec.span_slots - 1)
    slots.sort()
    return ArrivalSchedule(slots)


def generate_poisson(spec: PoissonSpec, rng: RngStream) -> ArrivalSchedule:
    counts = rng.generator.poisson(spec.rate, size=spec.horizon)
    slots = np.repeat(np.arange(spec.horizon, dtype=np.int64), counts)
    return ArrivalSchedule(slots)


def generate(spec, rng: RngStream) -> ArrivalSchedule:
    if isinstance(spec, BurstSpec):
        return generate_burst(spec, rng)
    if isinstance(spec, PoissonSpec):
        return generate_poisson(spec, rng)
    raise TypeError(f"unsupported traffic spec {type(spec).__name__}")


def beta_activation_pdf(x, spec: BurstSpec):
    """Density of a continuous activation time on [0, T]."""
    from scipy.special import beta as beta_fn

    x = np.asarray(x, dtype=float)
    T, a, b = spec.span_slots, spec.alpha, spec.beta
    inside = (x >= 0) & (x <= T)
    xc = np.clip(x, 0, T)
    val = xc ** (a - 1) * (T - xc) ** (b - 1) / (T ** (a + b - 1) * beta_fn(a, b))
    return np.where(inside, val, 0.0)
