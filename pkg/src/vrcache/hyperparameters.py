"""Run hyperparameters. Defaults for the replay/cache fields follow the DQN(lambda) setup."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import ConfigurationError


@dataclass(frozen=True)
class Hyperparameters:
    minibatch_size: int = 32
    replay_capacity: int = 1_000_000
    refresh_period: int = 10_000  # C
    train_frequency: int = 4  # F
    gamma: float = 0.99
    prepopulation: int = 50_000  # K
    cache_size: int = 80_000  # S
    block_size: int = 100  # B
    lam: float = 0.8
    learning_rate: float = 0.5
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    epsilon_anneal_steps: int = 1_000_000
    total_steps: int = 5_000_000

    def __post_init__(self) -> None:
        problems = []
        if self.minibatch_size < 1:
            problems.append("minibatch_size >= 1")
        if self.refresh_period < 1 or self.train_frequency < 1:
            problems.append("C >= 1 and F >= 1")
        elif self.refresh_period % self.train_frequency:
            problems.append(f"C mod F == 0 (C={self.refresh_period}, F={self.train_frequency})")
        if not 0.0 <= self.gamma <= 1.0:
            problems.append("0 <= gamma <= 1")
        if not 0.0 <= self.lam <= 1.0:
            problems.append("0 <= lambda <= 1")
        if self.cache_size < 1:
            problems.append("S >= 1")
        if self.block_size < 0:
            problems.append("B >= 0")
        if self.prepopulation < self.block_size + 2:
            problems.append(f"K >= B + 2 (K={self.prepopulation}, B={self.block_size})")
        if self.replay_capacity < self.prepopulation:
            problems.append(
                f"replay_capacity >= K (capacity={self.replay_capacity}, K={self.prepopulation})"
            )
        if not self.learning_rate > 0:
            problems.append("learning_rate > 0")
        for name in ("epsilon_start", "epsilon_end"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                problems.append(f"0 <= {name} <= 1")
        if self.epsilon_anneal_steps < 0 or self.total_steps < 0:
            problems.append("epsilon_anneal_steps >= 0 and total_steps >= 0")
        if problems:
            raise ConfigurationError("invalid hyperparameters: " + "; ".join(problems))

    @property
    def updates_per_burst(self) -> int:
        return self.refresh_period // self.train_frequency

    def epsilon(self, t: int) -> float:
        """Linearly annealed exploration rate at main-loop step ``t`` (1-based)."""
        if self.epsilon_anneal_steps == 0:
            return self.epsilon_end
        frac = min(max(t - 1, 0) / self.epsilon_anneal_steps, 1.0)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]
