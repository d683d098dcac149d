"""Shared domain types and the deterministic randomness contract."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass

import numpy as np


class SlotOutcome(enum.Enum):
    """Channel feedback for one slot."""

    IDLE = "idle"
    SUCCESS = "success"
    COLLISION = "collision"

    @classmethod
    def from_count(cls, k: int) -> "SlotOutcome":
        if k < 0:
            raise ValueError(f"transmitter count must be >= 0, got {k}")
        if k == 0:
            return cls.IDLE
        if k == 1:
            return cls.SUCCESS
        return cls.COLLISION


IDLE = SlotOutcome.IDLE
SUCCESS = SlotOutcome.SUCCESS
COLLISION = SlotOutcome.COLLISION


@dataclass(frozen=True)
class EstimatorState:
    """Backlog estimate plus the current idle/collision run lengths."""

    estimate: float = 1.0
    idle_run: int = 0
    collision_run: int = 0

    def __post_init__(self):
        if not self.estimate >= 1.0:
            raise ValueError(f"estimate must be >= 1, got {self.estimate}")
        if self.idle_run < 0 or self.collision_run < 0:
            raise ValueError("run counters must be nonnegative")
        if self.idle_run > 0 and self.collision_run > 0:
            raise ValueError("idle_run and collision_run cannot both be positive")

    def advance_runs(self, outcome: SlotOutcome) -> tuple[int, int]:
        """Run counters after counting ``outcome`` as part of the current run."""
        if outcome is IDLE:
            return self.idle_run + 1, 0
        if outcome is COLLISION:
            return 0, self.collision_run + 1
        return 0, 0


@dataclass(frozen=True)
class ControllerDecision:
    transmit_probability: float

    def __post_init__(self):
        if not 0.0 < self.transmit_probability <= 1.0:
            raise ValueError(
                f"transmit probability must lie in (0, 1], got {self.transmit_probability}"
            )


def probability_from_estimate(estimate: float) -> float:
    """p = 1/max(1, estimate)."""
    return 1.0 / max(1.0, estimate)


def _label_words(label: str) -> list[int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


class RngStream:
    """A named, reproducible random stream.

    The same ``(seed, label)`` pair always yields the same variates: the label
    is hashed with SHA-256 and mixed with the seed through a numpy
    ``SeedSequence`` feeding a PCG64 generator.
    """

    def __init__(self, seed: int, label: str = ""):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.label = label
        words = [seed & 0xFFFFFFFF, seed >> 32, *_label_words(label)]
        self.generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))

    def child(self, label: str) -> "RngStream":
        """Independent stream derived from this one's seed and a sub-label."""
        return RngStream(self.seed, f"{self.label}/{label}")

    def __repr__(self):
        return f"RngStream(seed={self.seed}, label={self.label!r})"


def derive_seed(base_seed: int, *parts) -> int:
    """Deterministic 64-bit seed from a base seed and any printable parts."""
    text = "|".join([str(int(base_seed)), *map(str, parts)])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")
