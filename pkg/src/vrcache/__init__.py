"""Lambda-return caching for replay-based Q-learning.

``VirtualCache`` stores replay indices; ``PhysicalCache`` stores copies of
the state-action pairs. Both are built by :func:`vrcache.cache.build`.
"""

from .agent import RunReport, run
from .cache import PhysicalCache, VirtualCache, build
from .hyperparameters import Hyperparameters
from .memmodel import ATARI_LAYOUT, MemoryLayout, cache_bytes, per_experience_bytes, reduction_ratio
from .replay_memory import Experience, ReplayMemory
from .returns import DiscountParams, Trajectory, lambda_return_block, lambda_return_direct, n_step_return

__all__ = [
    "ATARI_LAYOUT",
    "DiscountParams",
    "Experience",
    "Hyperparameters",
    "MemoryLayout",
    "PhysicalCache",
    "ReplayMemory",
    "RunReport",
    "Trajectory",
    "VirtualCache",
    "build",
    "cache_bytes",
    "lambda_return_block",
    "lambda_return_direct",
    "n_step_return",
    "per_experience_bytes",
    "reduction_ratio",
    "run",
]
