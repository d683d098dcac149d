"""Slotted-ALOHA backlog estimation: FASA and baseline controllers, drift analysis, simulation."""

from .core import COLLISION, IDLE, SUCCESS, EstimatorState, RngStream, SlotOutcome
from .engine import DelayRecord, RunResult, ScenarioConfig, run_paired, run_replications, run_scenario
from .estimators import (
    FasaParams,
    KellyParams,
    PbAlohaParams,
    QPlusParams,
    SCHEMES,
    make_controller,
)
from .traffic import BurstSpec, PoissonSpec

__version__ = "0.1.0"

__all__ = [
    "COLLISION", "IDLE", "SUCCESS", "BurstSpec", "DelayRecord", "EstimatorState", "FasaParams",
    "KellyParams", "PbAlohaParams", "PoissonSpec", "QPlusParams", "RngStream", "RunResult",
    "SCHEMES", "ScenarioConfig", "SlotOutcome", "make_controller", "run_paired",
    "run_replications", "run_scenario",
]
