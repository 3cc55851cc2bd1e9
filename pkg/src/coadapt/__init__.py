"""Concurrent adaptation of force, impedance and reference trajectory
for a robot in contact with an unknown periodic environment."""
from .controller import AdaptiveController, GainSet, GateConfig, InitialReference
from .dynamics import PointMass, TwoLinkArm
from .environment import EnvironmentProfile, Periodic
from .errors import CoadaptError, ConfigError
from .scenario import load_bundled, parse_scenario
from .simulation import ScenarioConfig, Trace, run_scenario

__all__ = [
    "AdaptiveController", "CoadaptError", "ConfigError", "EnvironmentProfile", "GainSet", "GateConfig",
    "InitialReference", "Periodic", "PointMass", "ScenarioConfig", "Trace", "TwoLinkArm",
    "load_bundled", "parse_scenario", "run_scenario",
]
__version__ = "0.1.0"
