"""Trust-enabled P2P botnet simulator with BCS-based sensor detection."""

from .engine import ChurnParams, CommandSchedule, NoiseParams, SimConfig, Simulation, run
from .sensor import SensorStrategy
from .trust import Model, TrustParams

__all__ = [
    "ChurnParams",
    "CommandSchedule",
    "Model",
    "NoiseParams",
    "SensorStrategy",
    "SimConfig",
    "Simulation",
    "TrustParams",
    "run",
]

__version__ = "0.1.0"
