"""Circular replay memory addressed by absolute (monotone) indices.

Every push is assigned ``write_count`` at the time of the push. The slot is
``index % capacity``; an index is resolvable while it is among the newest
``capacity`` pushes. Stale and future indices raise distinct errors so that a
cache holding indices can never silently alias a newer experience.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigurationError, FrozenMemoryError, IndexRangeError, StalenessError

# Largest memory a 4-byte cache index can address.
MAX_CAPACITY = 2**32


@dataclass(frozen=True)
class Experience:
    """One transition ``(s_t, a_t, r_t)`` plus the episode-boundary flag.

    ``terminal`` marks that the successor state ends the episode, so no value
    may be bootstrapped from it.
    """

    state: np.ndarray
    action: int
    reward: float
    terminal: bool

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Experience):
            return NotImplemented
        return (
            self.action == other.action
            and self.reward == other.reward
            and self.terminal == other.terminal
            and np.array_equal(self.state, other.state)
        )

    __hash__ = None  # type: ignore[assignment]


class ReplayMemory:
    """Fixed-capacity FIFO store; the single physical home of state data.

    States are rows of a preallocated ``uint8`` matrix, actions are ``uint8``
    (fewer than 256 actions), rewards ``float64`` and terminals ``bool``.
    """

    def __init__(self, capacity: int, state_bytes: int, action_count: int = 256):
        if capacity < 1 or capacity > MAX_CAPACITY:
            raise ConfigurationError(f"capacity must be in [1, 2**32], got {capacity}")
        if state_bytes < 1:
            raise ConfigurationError(f"state_bytes must be positive, got {state_bytes}")
        if not 1 <= action_count <= 256:
            raise ConfigurationError(f"action_count must be in [1, 256], got {action_count}")
        self.capacity = int(capacity)
        self.state_bytes = int(state_bytes)
        self.action_count = int(action_count)
        self._states = np.zeros((self.capacity, self.state_bytes), dtype=np.uint8)
        self._actions = np.zeros(self.capacity, dtype=np.uint8)
        self._rewards = np.zeros(self.capacity, dtype=np.float64)
        self._terminals = np.zeros(self.capacity, dtype=bool)
        self.write_count = 0
        self._freeze_depth = 0

    def __len__(self) -> int:
        return min(self.write_count, self.capacity)

    @property
    def oldest(self) -> int:
        """Smallest resolvable index (equals ``write_count`` when empty)."""
        return max(0, self.write_count - self.capacity)

    @property
    def newest(self) -> int:
        """Largest resolvable index; -1 when nothing has been pushed."""
        return self.write_count - 1

    @property
    def frozen(self) -> bool:
        return self._freeze_depth > 0

    @contextmanager
    def freeze(self) -> Iterator["ReplayMemory"]:
        """Forbid pushes for the duration of the block (re-entrant)."""
        self._freeze_depth += 1
        count = self.write_count
        try:
            yield self
        finally:
            self._freeze_depth -= 1
        assert self.write_count == count, "replay memory mutated while frozen"

    def push(self, e: Experience) -> int:
        if self._freeze_depth:
            raise FrozenMemoryError("push while replay memory is frozen")
        state = np.asarray(e.state, dtype=np.uint8)
        if state.shape != (self.state_bytes,):
            raise ConfigurationError(
                f"state must be {self.state_bytes} bytes, got shape {state.shape}"
            )
        if not 0 <= int(e.action) < self.action_count:
            raise ConfigurationError(f"action {e.action} outside [0, {self.action_count})")
        index = self.write_count
        slot = index % self.capacity
        self._states[slot] = state
        self._actions[slot] = e.action
        self._rewards[slot] = e.reward
        self._terminals[slot] = e.terminal
        self.write_count += 1
        return index

    def is_resolvable(self, i: int) -> bool:
        return self.oldest <= i < self.write_count

    def _check(self, i: int) -> int:
        if i < 0 or i >= self.write_count:
            raise IndexRangeError(f"index {i} not written yet (write_count={self.write_count})")
        if i < self.oldest:
            raise StalenessError(f"index {i} evicted (oldest resolvable is {self.oldest})")
        return i % self.capacity

    def _check_many(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size:
            lo, hi = int(indices.min()), int(indices.max())
            if lo < 0 or hi >= self.write_count:
                bad = lo if lo < 0 else hi
                raise IndexRangeError(f"index {bad} not written yet (write_count={self.write_count})")
            if lo < self.oldest:
                raise StalenessError(f"index {lo} evicted (oldest resolvable is {self.oldest})")
        return indices % self.capacity

    def get(self, i: int) -> Experience:
        """Return the experience at ``i``; ``state`` is a read-only view, not a copy."""
        slot = self._check(i)
        state = self._states[slot]
        state.flags.writeable = False
        return Experience(
            state=state,
            action=int(self._actions[slot]),
            reward=float(self._rewards[slot]),
            terminal=bool(self._terminals[slot]),
        )

    def next_state(self, i: int) -> np.ndarray:
        """State stored at ``i + 1``. Meaningless (but returned) if ``i`` is terminal."""
        self._check(i)
        return self.get(i + 1).state

    # Vectorised accessors used by the cache. Each returns fresh arrays
    # gathered by fancy indexing; callers account for the bytes they keep.

    def states(self, indices: np.ndarray) -> np.ndarray:
        return self._states[self._check_many(indices)]

    def actions(self, indices: np.ndarray) -> np.ndarray:
        return self._actions[self._check_many(indices)]

    def rewards(self, indices: np.ndarray) -> np.ndarray:
        return self._rewards[self._check_many(indices)]

    def terminals(self, indices: np.ndarray) -> np.ndarray:
        return self._terminals[self._check_many(indices)]

    def state_window(self, start: int, stop: int) -> np.ndarray:
        """States ``start..stop-1`` as a read-only view when the slots are contiguous.

        A range that wraps around the ring is gathered into a new array.
        """
        if stop <= start:
            raise IndexRangeError(f"empty window [{start}, {stop})")
        self._check(start)
        self._check(stop - 1)
        lo = start % self.capacity
        if lo + (stop - start) <= self.capacity:
            view = self._states[lo : lo + (stop - start)]
            view.flags.writeable = False
            return view
        return self._states[np.arange(start, stop) % self.capacity]

    def copy_states_into(self, indices: np.ndarray, out: np.ndarray) -> int:
        """Copy states at ``indices`` into ``out``; returns the bytes written."""
        slots = self._check_many(indices)
        np.take(self._states, slots, axis=0, out=out, mode="clip")  # indices already checked; "raise" would buffer
        return int(out.nbytes)
