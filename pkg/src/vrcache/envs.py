"""Small deterministic MDPs with wide, byte-encoded observations.

An observation is ``observation_bytes`` long: a little-endian ``uint32``
state id followed by padding that is a pure function of the id. Padding lets
tests scale the per-state footprint (e.g. to 28224 bytes) without changing
the underlying MDP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ConfigurationError
from .value_fn import ID_BYTES, decode_state_ids

ATARI_OBS_BYTES = 84 * 84 * 4
PADDING_SEED = 0x5EED


@dataclass(frozen=True)
class MDPSpec:
    """Deterministic transition and reward tables plus observation width.

    ``terminal[s, a]`` marks transitions that end the episode.
    """

    name: str
    next_state: np.ndarray  # (state_count, action_count) int
    reward: np.ndarray  # (state_count, action_count) float
    terminal: np.ndarray  # (state_count, action_count) bool
    start: int
    horizon: int
    observation_bytes: int

    @property
    def state_count(self) -> int:
        return self.next_state.shape[0]

    @property
    def action_count(self) -> int:
        return self.next_state.shape[1]


def encode_state(state_id: int, observation_bytes: int) -> np.ndarray:
    if observation_bytes < ID_BYTES:
        raise ConfigurationError(f"observation_bytes must be at least {ID_BYTES}")
    obs = np.empty(observation_bytes, dtype=np.uint8)
    obs[:ID_BYTES] = np.frombuffer(int(state_id).to_bytes(ID_BYTES, "little"), dtype=np.uint8)
    pad = np.random.default_rng([PADDING_SEED, int(state_id)])
    obs[ID_BYTES:] = pad.integers(0, 256, size=observation_bytes - ID_BYTES, dtype=np.uint8)
    return obs


def decode_state(obs: np.ndarray) -> int:
    return int(decode_state_ids(obs)[0])


class Env:
    """Episode driver over an :class:`MDPSpec`.

    A horizon timeout ends the episode with reward 0 and a terminal flag.
    """

    def __init__(self, spec: MDPSpec):
        self.spec = spec
        self._obs = [encode_state(s, spec.observation_bytes) for s in range(spec.state_count)]
        for o in self._obs:
            o.flags.writeable = False
        self._state = spec.start
        self._t = 0

    @property
    def action_count(self) -> int:
        return self.spec.action_count

    @property
    def state_count(self) -> int:
        return self.spec.state_count

    @property
    def observation_bytes(self) -> int:
        return self.spec.observation_bytes

    def observation(self, state_id: int) -> np.ndarray:
        return self._obs[state_id]

    def reset(self, seed: int | None = None) -> np.ndarray:
        # Start states are fixed; the seed is accepted for interface symmetry.
        self._state = self.spec.start
        self._t = 0
        return self._obs[self._state]

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if not 0 <= action < self.spec.action_count:
            raise ArgumentError(f"action {action} outside [0, {self.spec.action_count})")
        s = self._state
        nxt = int(self.spec.next_state[s, action])
        reward = float(self.spec.reward[s, action])
        terminal = bool(self.spec.terminal[s, action])
        self._t += 1
        if not terminal and self._t >= self.spec.horizon:
            terminal, reward = True, 0.0
        self._state = nxt
        return self._obs[nxt], reward, terminal


STAY, ADVANCE = 0, 1


def chain(length: int = 10, horizon: int = 100, observation_bytes: int = 64) -> Env:
    """States ``0..length-1``; ``advance`` moves right, ``stay`` self-loops.

    Advancing into the last state pays 1 and ends the episode.
    """
    if length < 2:
        raise ConfigurationError("chain needs at least two states")
    nxt = np.empty((length, 2), dtype=np.int64)
    rew = np.zeros((length, 2))
    term = np.zeros((length, 2), dtype=bool)
    for s in range(length):
        nxt[s, STAY] = s
        nxt[s, ADVANCE] = min(s + 1, length - 1)
    rew[length - 2, ADVANCE] = 1.0
    term[length - 2, ADVANCE] = True
    return Env(MDPSpec("chain", nxt, rew, term, 0, horizon, observation_bytes))


UP, DOWN, LEFT, RIGHT = range(4)


def gridworld(size: int = 5, horizon: int = 100, observation_bytes: int = 64) -> Env:
    """``size x size`` grid from the top-left corner; entering the opposite corner pays 1."""
    n = size * size
    nxt = np.empty((n, 4), dtype=np.int64)
    rew = np.zeros((n, 4))
    term = np.zeros((n, 4), dtype=bool)
    goal = n - 1
    moves = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1)}
    for s in range(n):
        r, c = divmod(s, size)
        for a, (dr, dc) in moves.items():
            rr = min(max(r + dr, 0), size - 1)
            cc = min(max(c + dc, 0), size - 1)
            nxt[s, a] = rr * size + cc
            if nxt[s, a] == goal and s != goal:
                rew[s, a] = 1.0
                term[s, a] = True
    return Env(MDPSpec("gridworld", nxt, rew, term, 0, horizon, observation_bytes))


def synthetic(
    state_count: int = 32,
    action_count: int = 4,
    horizon: int = 50,
    observation_bytes: int = ATARI_OBS_BYTES,
    seed: int = 0,
) -> Env:
    """Random deterministic MDP for memory and copy benchmarks."""
    rng = np.random.default_rng(seed)
    nxt = rng.integers(0, state_count, size=(state_count, action_count))
    rew = rng.uniform(-1.0, 1.0, size=(state_count, action_count)).round(3)
    term = rng.random((state_count, action_count)) < 0.05
    return Env(MDPSpec("synthetic", nxt, rew, term, 0, horizon, observation_bytes))


ENVS = {"chain": chain, "gridworld": gridworld, "synthetic": synthetic}


def make_env(name: str, observation_bytes: int | None = None) -> Env:
    try:
        factory = ENVS[name]
    except KeyError:
        raise ConfigurationError(f"unknown env {name!r}; choose from {sorted(ENVS)}") from None
    if observation_bytes is None:
        return factory()
    return factory(observation_bytes=observation_bytes)


def value_iteration(spec: MDPSpec, gamma: float, tol: float = 1e-12, max_iter: int = 100_000):
    """Optimal ``(V, Q)`` ignoring the horizon timeout."""
    S, A = spec.next_state.shape
    V = np.zeros(S)
    for _ in range(max_iter):
        Q = spec.reward + gamma * np.where(spec.terminal, 0.0, V[spec.next_state])
        V_new = Q.max(axis=1)
        if np.max(np.abs(V_new - V)) < tol:
            V = V_new
            break
        V = V_new
    Q = spec.reward + gamma * np.where(spec.terminal, 0.0, V[spec.next_state])
    return V, Q
