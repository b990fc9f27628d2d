"""Deterministic cycle-level simulator of a heterogeneous MPSoC shared-memory
subsystem with per-DMA self-monitoring and priority-adaptive arbitration."""

from .config import ScenarioConfig, load_config, parse_config
from .controller import POLICIES
from .engine import SimulationReport, World, run

__all__ = [
    "POLICIES",
    "ScenarioConfig",
    "SimulationReport",
    "World",
    "load_config",
    "parse_config",
    "run",
]

__version__ = "0.1.0"
