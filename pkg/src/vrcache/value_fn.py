"""Action-value estimators: tabular and linear.

Both take observations as ``uint8`` rows (one row per state) and expose the
greedy value ``max_a Q(s, a)`` used for bootstrapping. ``sgd_step`` follows the
gradient of the batch-mean squared error against constant targets.
"""

from __future__ import annotations

import hashlib
from typing import Callable, NamedTuple

import numpy as np

from .errors import ArgumentError, NumericError

ID_BYTES = 4


class Minibatch(NamedTuple):
    states: np.ndarray  # (n, state_bytes) uint8
    actions: np.ndarray  # (n,) integer
    returns: np.ndarray  # (n,) float

    @classmethod
    def from_items(cls, items) -> "Minibatch":
        items = list(items)
        if not items:
            raise ArgumentError("empty batch")
        states = np.stack([np.asarray(s, dtype=np.uint8) for s, _, _ in items])
        actions = np.array([a for _, a, _ in items], dtype=np.int64)
        returns = np.array([g for _, _, g in items], dtype=np.float64)
        return cls(states, actions, returns)


def decode_state_ids(states: np.ndarray) -> np.ndarray:
    """Little-endian ``uint32`` state id held in the first four bytes of each row."""
    states = np.asarray(states, dtype=np.uint8)
    if states.ndim == 1:
        states = states[None, :]
    if states.shape[1] < ID_BYTES:
        raise ArgumentError(f"observation shorter than {ID_BYTES} id bytes")
    prefix = np.ascontiguousarray(states[:, :ID_BYTES])
    return prefix.view("<u4").reshape(-1).astype(np.int64)


def _as_batch(batch) -> Minibatch:
    if isinstance(batch, Minibatch):
        if len(batch.actions) == 0:
            raise ArgumentError("empty batch")
        return batch
    return Minibatch.from_items(batch)


class QFunction:
    """Shared behaviour; subclasses implement ``q_values_batch`` and ``gradient``."""

    action_count: int

    def q_values_batch(self, states: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, batch) -> np.ndarray:
        raise NotImplementedError

    @property
    def theta(self) -> np.ndarray:
        raise NotImplementedError

    def q_values(self, s: np.ndarray) -> np.ndarray:
        return self.q_values_batch(np.asarray(s)[None, :])[0]

    def greedy_value(self, s: np.ndarray) -> float:
        return float(self.q_values(s).max())

    def greedy_values(self, states: np.ndarray) -> np.ndarray:
        return self.q_values_batch(states).max(axis=1)

    def loss(self, batch) -> float:
        """Batch mean of ``(target - Q(s, a))**2``."""
        batch = _as_batch(batch)
        q = self.q_values_batch(batch.states)[np.arange(len(batch.actions)), batch.actions]
        return float(np.mean((np.asarray(batch.returns, dtype=np.float64) - q) ** 2))

    def sgd_step(self, batch, alpha: float) -> "QFunction":
        """One in-place gradient step on the mean squared error; returns ``self``."""
        if not alpha > 0:
            raise ArgumentError(f"alpha must be positive, got {alpha}")
        batch = _as_batch(batch)
        if not np.all(np.isfinite(batch.returns)):
            raise NumericError("non-finite target in batch")
        grad = self.gradient(batch)
        theta = self.theta
        with np.errstate(over="ignore", invalid="ignore"):
            theta -= alpha * grad
        if not np.all(np.isfinite(theta)):
            raise NumericError("parameters became non-finite")
        return self

    def digest(self) -> str:
        """Order-stable SHA-256 of the parameters."""
        theta = np.ascontiguousarray(self.theta, dtype=np.float64)
        h = hashlib.sha256()
        h.update(str(theta.shape).encode())
        h.update(theta.tobytes())
        return h.hexdigest()


class TabularQ(QFunction):
    """Table of action values indexed by the state id embedded in the observation."""

    def __init__(self, state_count: int, action_count: int):
        if state_count < 1 or action_count < 1:
            raise ArgumentError("state_count and action_count must be positive")
        self.state_count = state_count
        self.action_count = action_count
        self.table = np.zeros((state_count, action_count), dtype=np.float64)

    @property
    def theta(self) -> np.ndarray:
        return self.table

    def _ids(self, states: np.ndarray) -> np.ndarray:
        ids = decode_state_ids(states)
        if ids.size and (ids.min() < 0 or ids.max() >= self.state_count):
            raise ArgumentError(f"state id outside [0, {self.state_count})")
        return ids

    def q_values_batch(self, states: np.ndarray) -> np.ndarray:
        return self.table[self._ids(states)]

    def set(self, state_id: int, action: int, value: float) -> None:
        self.table[state_id, action] = value

    def gradient(self, batch) -> np.ndarray:
        batch = _as_batch(batch)
        ids = self._ids(batch.states)
        actions = np.asarray(batch.actions, dtype=np.int64)
        td = np.asarray(batch.returns, dtype=np.float64) - self.table[ids, actions]
        grad = np.zeros_like(self.table)
        np.add.at(grad, (ids, actions), -2.0 * td / len(actions))
        return grad


def byte_features(n_features: int) -> Callable[[np.ndarray], np.ndarray]:
    """Scale the first ``n_features`` observation bytes into ``[0, 1]``."""

    def features(states: np.ndarray) -> np.ndarray:
        states = np.asarray(states)
        if states.shape[1] < n_features:
            raise ArgumentError(f"observation shorter than {n_features} feature bytes")
        return states[:, :n_features].astype(np.float64) / 255.0

    return features


class LinearQ(QFunction):
    """``Q(s, a) = theta[a] . phi(s)`` for a fixed feature map ``phi``."""

    def __init__(
        self,
        n_features: int,
        action_count: int,
        features: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        if n_features < 1 or action_count < 1:
            raise ArgumentError("n_features and action_count must be positive")
        self.n_features = n_features
        self.action_count = action_count
        self.features = features or byte_features(n_features)
        self.weights = np.zeros((action_count, n_features), dtype=np.float64)

    @property
    def theta(self) -> np.ndarray:
        return self.weights

    def _phi(self, states: np.ndarray) -> np.ndarray:
        phi = np.asarray(self.features(np.atleast_2d(states)), dtype=np.float64)
        if phi.ndim != 2 or phi.shape[1] != self.n_features:
            raise ArgumentError(f"feature map must return (n, {self.n_features})")
        return phi

    def q_values_batch(self, states: np.ndarray) -> np.ndarray:
        return self._phi(states) @ self.weights.T

    def gradient(self, batch) -> np.ndarray:
        batch = _as_batch(batch)
        phi = self._phi(batch.states)
        actions = np.asarray(batch.actions, dtype=np.int64)
        q = np.einsum("ij,ij->i", phi, self.weights[actions])
        td = np.asarray(batch.returns, dtype=np.float64) - q
        grad = np.zeros_like(self.weights)
        np.add.at(grad, actions, (-2.0 * td / len(actions))[:, None] * phi)
        return grad
