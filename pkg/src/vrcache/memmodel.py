"""Analytical byte model of cache entries for the two storage backends.

The physical cache holds a copy of the state and action next to each return;
the virtual cache holds only a replay index and the return. Megabytes are
``2**20`` bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import NamedTuple

from .errors import ConfigurationError

MB = 2**20

PHYSICAL = "physical"
VIRTUAL = "virtual"
BACKENDS = (VIRTUAL, PHYSICAL)


@dataclass(frozen=True)
class MemoryLayout:
    """Bytes per field. Defaults describe four stacked 84x84 uint8 frames."""

    state_bytes: int = 84 * 84 * 4
    action_bytes: int = 1
    return_bytes: int = 4
    index_bytes: int = 4

    def __post_init__(self) -> None:
        for name in ("state_bytes", "action_bytes", "return_bytes", "index_bytes"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")


ATARI_LAYOUT = MemoryLayout()


class CacheSize(NamedTuple):
    bytes: int
    megabytes: float  # rounded the way it is reported


def check_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise ConfigurationError(f"backend must be one of {BACKENDS}, got {backend!r}")
    return backend


def per_experience_bytes(layout: MemoryLayout, backend: str) -> int:
    if check_backend(backend) == PHYSICAL:
        return layout.state_bytes + layout.action_bytes + layout.return_bytes
    return layout.index_bytes + layout.return_bytes


def round_megabytes(nbytes: int) -> float:
    """Whole megabytes above 1 MB, two decimals below (half-up)."""
    exact = Decimal(nbytes) / Decimal(MB)
    quantum = Decimal(1) if exact >= 1 else Decimal("0.01")
    return float(exact.quantize(quantum, rounding=ROUND_HALF_UP))


def format_megabytes(mb: float) -> str:
    return f"{mb:.0f} MB" if mb >= 1 else f"{mb:.2f} MB"


def cache_bytes(S: int, layout: MemoryLayout, backend: str) -> CacheSize:
    if S < 1:
        raise ConfigurationError(f"cache size must be positive, got {S}")
    nbytes = S * per_experience_bytes(layout, backend)
    return CacheSize(nbytes, round_megabytes(nbytes))


def copy_bytes(S: int, layout: MemoryLayout, backend: str) -> int:
    """State and action bytes a build duplicates out of replay memory."""
    if check_backend(backend) == PHYSICAL:
        return S * (layout.state_bytes + layout.action_bytes)
    return 0


def reduction_ratio(layout: MemoryLayout) -> tuple[float, float]:
    """Virtual size as a percentage of physical size, and the complement."""
    ratio = 100.0 * per_experience_bytes(layout, VIRTUAL) / per_experience_bytes(layout, PHYSICAL)
    return ratio, 100.0 - ratio
