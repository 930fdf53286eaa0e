"""Monte Carlo simulator for evolutionary prisoner's dilemma dynamics on
growing scale-free networks."""

from .dynamics import DynamicsConfig, PopulationState
from .errors import (CoopnetError, InvalidConfigError, InvalidInputError,
                     NonStationaryError, SamplingExhaustedError, StructuralError)
from .game import COOPERATOR, DEFECTOR, GameConfig
from .netgen import Graph, GrowthConfig, degree_distribution, grow_network, new_clique
from .experiments import (FixationCurve, StabilityConfig, SweepRecord,
                          fixation_probability, run_to_stationarity, sweep_k,
                          sweep_r_growing, sweep_r_static)

__all__ = [
    "COOPERATOR", "DEFECTOR", "CoopnetError", "DynamicsConfig", "FixationCurve",
    "GameConfig", "Graph", "GrowthConfig", "InvalidConfigError", "InvalidInputError",
    "NonStationaryError", "PopulationState", "SamplingExhaustedError",
    "StabilityConfig", "StructuralError", "SweepRecord", "degree_distribution",
    "fixation_probability", "grow_network", "new_clique", "run_to_stationarity",
    "sweep_k", "sweep_r_growing", "sweep_r_static",
]
