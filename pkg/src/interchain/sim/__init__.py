from .engine import InsufficientCorruption, Simulation, honest_relayer_step, inject_equivocation, run
from .scenario import (
    Censor,
    ChainSpec,
    ClientSpec,
    Corrupt,
    Delay,
    Equivocate,
    NetworkModel,
    Scenario,
    ScenarioError,
    StallChain,
    TxInput,
    Withhold,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .trace import Trace

__all__ = [
    "Censor",
    "ChainSpec",
    "ClientSpec",
    "Corrupt",
    "Delay",
    "Equivocate",
    "InsufficientCorruption",
    "NetworkModel",
    "Scenario",
    "ScenarioError",
    "Simulation",
    "StallChain",
    "Trace",
    "TxInput",
    "Withhold",
    "honest_relayer_step",
    "inject_equivocation",
    "load_scenario",
    "run",
    "scenario_from_dict",
    "scenario_to_dict",
]
