"""Reliability and profit analysis of a degrading unit whose repairperson
takes repeated vacations.

The package models a single unit subject to internal wear and external
shocks, watched over by a repairperson who leaves on phase-type vacations
and acts on what they find when they return. Two policies are covered:
plain corrective repair, and an extension where a unit found in its worst
operational condition is pulled in for preventive maintenance.

Typical flow: describe the system with :class:`SystemSpec` (or load a JSON
config), assemble it into labelled transition matrices, then feed those to
the analysis, economics, optimization or simulation layers.
"""

from .analysis import (StationaryResult, TransientSweep, availability,
                       event_intensity, mean_counts, occupancy, reliability,
                       reliability_model, stationary, sweep,
                       transient_distribution, write_measures_csv)
from .config import ConfigBundle, ConfigError, load_config, parse_config, save_config
from .economics import (average_net_reward, expected_net_reward, net_reward_vector,
                        profit_curve, stationary_net_reward, total_net_reward)
from .matstoch import expm_generator, expm_integral, kron, kron_sum, stationary_vector
from .mmap import (EVENT_FAMILIES, MmapModel, assemble, initial_distribution,
                   shock_stationary)
from .model import (DegradationModel, EconomicSpec, FixedCosts, MacroStateLayout,
                    ShockModel, SystemSpec, build_layout)
from .optimize import (OptimizationResult, coxian2, evaluate_gamma,
                       optimize_vacation, write_trace_csv)
from .phase_type import PhaseType, exponential_ph
from .simulate import SimulationEstimates, simulate, write_estimates_csv

__version__ = "1.0.0"

__all__ = [
    "ConfigBundle", "ConfigError", "DegradationModel", "EVENT_FAMILIES",
    "EconomicSpec", "FixedCosts", "MacroStateLayout", "MmapModel",
    "OptimizationResult", "PhaseType", "ShockModel", "SimulationEstimates",
    "StationaryResult", "SystemSpec", "TransientSweep", "assemble",
    "availability", "average_net_reward", "build_layout", "coxian2",
    "evaluate_gamma", "event_intensity", "expected_net_reward",
    "expm_generator", "expm_integral", "exponential_ph", "initial_distribution",
    "kron", "kron_sum", "load_config", "mean_counts", "net_reward_vector",
    "occupancy", "optimize_vacation", "parse_config", "profit_curve",
    "reliability", "reliability_model", "save_config", "shock_stationary",
    "simulate", "stationary", "stationary_net_reward", "stationary_vector",
    "sweep", "total_net_reward", "transient_distribution",
    "write_estimates_csv", "write_measures_csv", "write_trace_csv",
]
