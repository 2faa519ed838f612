"""Lambda-return caches over a frozen replay memory.

One builder samples blocks, computes their lambda-returns and hands each
block to a storage backend:

* ``PhysicalCache`` copies the state and action of every cached experience
  (the DQN(lambda) layout);
* ``VirtualCache`` stores a 4-byte offset into the replay memory and
  dereferences it when a minibatch is drawn.

Both backends consume the same random numbers in the same order, so for a
given seed they emit identical ``(state, action, return)`` minibatches.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, CapacityError
from .memmodel import PHYSICAL, VIRTUAL, check_backend
from .replay_memory import ReplayMemory
from .returns import DiscountParams, Trajectory, lambda_return_block
from .value_fn import Minibatch, QFunction

ACTION_BYTES = 1
RETURN_DTYPE = np.float32


@dataclass
class BuildStats:
    blocks: int = 0  # blocks that contributed entries
    draws: int = 0  # block starts drawn, including rejected ones
    q_evals: int = 0  # greedy-value evaluations
    copy_bytes: int = 0  # state + action bytes duplicated into the cache
    seconds: float = 0.0


class Cache:
    """``S`` cached lambda-returns plus whatever each backend needs to recover ``(s, a)``."""

    backend: str

    def __init__(self, memory: ReplayMemory, size: int):
        self.size = size
        self.state_bytes = memory.state_bytes
        self._returns = np.empty(size, dtype=RETURN_DTYPE)
        self.stats = BuildStats()
        self.sample_bytes = 0  # transient minibatch materialisation

    @property
    def returns(self) -> np.ndarray:
        view = self._returns.view()
        view.flags.writeable = False
        return view

    @property
    def copy_bytes(self) -> int:
        return self.stats.copy_bytes

    @property
    def nbytes(self) -> int:
        """Bytes held by the per-entry arrays."""
        raise NotImplementedError

    def _insert(self, pos: int, indices: np.ndarray, returns: np.ndarray) -> None:
        raise NotImplementedError

    def _fetch(self, rows: np.ndarray, memory: ReplayMemory) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sample_minibatch(
        self, memory: ReplayMemory, n: int, rng: np.random.Generator
    ) -> Minibatch:
        """Draw ``n`` entries uniformly with replacement."""
        if n < 1:
            raise ArgumentError(f"minibatch size must be positive, got {n}")
        rows = rng.integers(0, self.size, size=n)
        states, actions = self._fetch(rows, memory)
        self.sample_bytes += states.nbytes + n * ACTION_BYTES
        return Minibatch(states, actions.astype(np.int64), self._returns[rows].astype(np.float64))


class VirtualCache(Cache):
    backend = VIRTUAL

    def __init__(self, memory: ReplayMemory, size: int):
        super().__init__(memory, size)
        self._memory = memory
        # Offsets from the oldest index at build time fit in 4 bytes because
        # the replay capacity is capped at 2**32.
        self._base = memory.oldest
        self._offsets = np.empty(size, dtype=np.uint32)

    @property
    def indices(self) -> np.ndarray:
        return self._base + self._offsets.astype(np.int64)

    @property
    def nbytes(self) -> int:
        return self._offsets.nbytes + self._returns.nbytes

    def _insert(self, pos, indices, returns):
        m = len(indices)
        self._offsets[pos : pos + m] = indices - self._base
        self._returns[pos : pos + m] = returns

    def _fetch(self, rows, memory):
        if memory is not self._memory:
            raise ArgumentError("virtual cache must be sampled against the memory it was built over")
        indices = self._base + self._offsets[rows].astype(np.int64)
        return memory.states(indices), memory.actions(indices)


class PhysicalCache(Cache):
    backend = PHYSICAL

    def __init__(self, memory: ReplayMemory, size: int):
        super().__init__(memory, size)
        self._states = np.empty((size, memory.state_bytes), dtype=np.uint8)
        self._actions = np.empty(size, dtype=np.uint8)
        self._memory = memory

    @property
    def states(self) -> np.ndarray:
        view = self._states.view()
        view.flags.writeable = False
        return view

    @property
    def actions(self) -> np.ndarray:
        return self._actions.copy()

    @property
    def nbytes(self) -> int:
        return self._states.nbytes + self._actions.nbytes + self._returns.nbytes

    def _insert(self, pos, indices, returns):
        m = len(indices)
        copied = self._memory.copy_states_into(indices, self._states[pos : pos + m])
        self._actions[pos : pos + m] = self._memory.actions(indices)
        self.stats.copy_bytes += copied + m * ACTION_BYTES
        self._returns[pos : pos + m] = returns

    def _fetch(self, rows, memory):
        return self._states[rows], self._actions[rows]


BACKEND_TYPES = {VIRTUAL: VirtualCache, PHYSICAL: PhysicalCache}


def eligible_starts(memory: ReplayMemory, block_size: int) -> tuple[int, int]:
    """Inclusive range of block starts whose ``B + 2`` entries are all resolvable."""
    return memory.oldest, memory.newest - (block_size + 1)


def build(
    memory: ReplayMemory,
    qfn: QFunction,
    hp,
    rng: np.random.Generator,
    backend: str,
    trace: list | None = None,
) -> Cache:
    """Fill a cache of exactly ``hp.cache_size`` distinct entries.

    Each draw picks a start ``k`` uniformly from the eligible range. A start
    that is already cached is redrawn. Otherwise the block runs forward from
    ``k`` for at most ``B + 1`` positions, stopping early at the first
    position that is already cached or once the cache would be full; the
    state just past the block seeds the recursion. Every position of a block
    is therefore new, and ``q_evals == S + blocks``.

    ``trace``, if given, receives one ``(indices, returns)`` pair per block.
    """
    check_backend(backend)
    S, B = int(hp.cache_size), int(hp.block_size)
    params = DiscountParams(hp.gamma, hp.lam)
    lo, hi = eligible_starts(memory, B)
    n_starts = hi - lo + 1
    if len(memory) < B + 2 or S > n_starts:
        raise CapacityError(
            f"cache size S={S} needs S <= resolvable entries - (B + 1) = "
            f"{len(memory)} - {B + 1} = {max(n_starts, 0)} distinct block starts"
        )

    started = time.perf_counter()
    with memory.freeze():
        cache = BACKEND_TYPES[backend](memory, S)
        stats = cache.stats
        taken = np.zeros(memory.newest - lo, dtype=bool)
        filled = 0
        while filled < S:
            k = int(rng.integers(lo, hi + 1))
            stats.draws += 1
            if taken[k - lo]:
                continue
            limit = min(B + 1, S - filled)
            hits = np.flatnonzero(taken[k - lo : k - lo + limit])
            m = int(hits[0]) if hits.size else limit
            end = k + m  # state just past the block

            indices = np.arange(k, end, dtype=np.int64)
            rewards = memory.rewards(indices)
            terminals = memory.terminals(indices)
            # One evaluation for the seed plus one per cached return.
            seed = float(qfn.greedy_values(memory.state_window(end, end + 1))[0])
            values = qfn.greedy_values(memory.state_window(k + 1, end + 1))
            stats.q_evals += 1 + m
            if terminals[-1]:
                seed = 0.0

            block = Trajectory(rewards, values, terminals)
            lam_returns = np.asarray(lambda_return_block(block, params, seed=seed))
            cache._insert(filled, indices, lam_returns)
            taken[k - lo : end - lo] = True
            filled += m
            stats.blocks += 1
            if trace is not None:
                trace.append((indices, lam_returns.astype(RETURN_DTYPE)))
    stats.seconds = time.perf_counter() - started
    return cache
