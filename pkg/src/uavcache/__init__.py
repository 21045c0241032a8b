"""Coded-caching map transmission over an aerial relay network.

A discrete-time simulator of sensing drones uploading map segments to a
ground vehicle through erasure-coded fragments cached on relay drones, with
analytic Rician-fading link reliability, a recovery-area objective, and a
Q-learning optimizer for joint scheduling, bandwidth, and coding decisions.
"""

from .calibrate import resolve
from .channel import LinkStats, QuadratureSpec, link_stats, rate_cdf, rician_power_cdf, stp, stp_monte_carlo
from .coding import (
    CodingPlan,
    effective_recovery_area,
    file_recovery_probability,
    file_recovery_probability_bruteforce,
    grid_recovery_probability,
)
from .config import ConfigError, DqnConfig, PsoConfig, ScenarioConfig, default_config, load_config
from .env import Action, ActionSpace, CachingEnv, SlotMetrics, full_action_space
from .world import GridMap, MapFile, NodeState, build_grid, sensing_footprint

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionSpace",
    "CachingEnv",
    "CodingPlan",
    "ConfigError",
    "DqnConfig",
    "GridMap",
    "LinkStats",
    "MapFile",
    "NodeState",
    "PsoConfig",
    "QuadratureSpec",
    "ScenarioConfig",
    "SlotMetrics",
    "build_grid",
    "default_config",
    "effective_recovery_area",
    "file_recovery_probability",
    "file_recovery_probability_bruteforce",
    "full_action_space",
    "grid_recovery_probability",
    "link_stats",
    "load_config",
    "rate_cdf",
    "resolve",
    "rician_power_cdf",
    "sensing_footprint",
    "stp",
    "stp_monte_carlo",
]
