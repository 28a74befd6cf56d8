"""Obstacle-aware UAV positioning lab.

Simulates a venue with box buildings and ground users, computes
LoS-dependent link quality and traffic feasibility, exposes an episodic
RL environment with a weighted LoS/throughput reward, ships a reference
DQN agent, and evaluates positions against baselines with CCDF/CDF
metrics. Hot kernels run through a compiled extension when built, with a
pure-Python fallback selected at import time.
"""

from ._kernels import BACKEND
from .env import UavEnv, compute_reward
from .geometry import ActionZone, Building, Position3, VenueSpec

__version__ = "0.1.0"

__all__ = [
    "ActionZone",
    "BACKEND",
    "Building",
    "Position3",
    "UavEnv",
    "VenueSpec",
    "compute_reward",
    "__version__",
]
