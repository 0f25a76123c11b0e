"""Projective-simulation agents with wildcard generalization."""

from .agent import Agent, AgentConfig
from .clips import Clip, ClipNetwork, CreationReport, matches, wildcard_from_pair
from .environments import (
    DriverEnvironment,
    EnvironmentSpec,
    NeverendingColorEnvironment,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    measure_learning_time,
    run_experiment,
)
from .rng import Xoshiro256StarStar, substream_state

__all__ = [
    "Agent",
    "AgentConfig",
    "Clip",
    "ClipNetwork",
    "CreationReport",
    "DriverEnvironment",
    "EnvironmentSpec",
    "ExperimentConfig",
    "ExperimentResult",
    "NeverendingColorEnvironment",
    "Xoshiro256StarStar",
    "matches",
    "measure_learning_time",
    "run_experiment",
    "substream_state",
    "wildcard_from_pair",
]
