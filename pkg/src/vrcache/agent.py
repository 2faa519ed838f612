"""Burst-trained Q(lambda) agent driving either cache backend.

The loop prepopulates the replay memory with random-action experiences,
then every ``C`` steps (at ``t = 1, C + 1, 2C + 1, ...``) freezes the memory,
builds a fresh cache with the current parameters and performs ``C / F``
minibatch updates. Acting resumes only after the burst, so no cached index
can be evicted while the cache is alive.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cache as cache_mod
from .envs import Env
from .hyperparameters import Hyperparameters
from .memmodel import check_backend
from .replay_memory import Experience, ReplayMemory
from .value_fn import QFunction, TabularQ

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    steps: int
    ret: float


@dataclass(frozen=True)
class BurstRecord:
    burst: int
    t: int
    build_seconds: float
    copy_bytes: int
    q_evals: int
    blocks: int
    draws: int
    updates: int
    theta_digest: str


@dataclass
class RunReport:
    backend: str
    seed: int
    prepopulated: int = 0
    steps: int = 0
    episodes: list[EpisodeRecord] = field(default_factory=list)
    bursts: list[BurstRecord] = field(default_factory=list)
    wall_seconds: float = 0.0
    final_digest: str = ""
    action_digest: str = ""

    @property
    def episode_returns(self) -> list[float]:
        return [e.ret for e in self.episodes]


class Streams:
    """Independent generators derived from one root seed.

    The layout is fixed, so both backends see the same random numbers for
    acting, block sampling, minibatch sampling and environment resets.
    """

    def __init__(self, seed: int):
        policy, blocks, minibatch, env = np.random.SeedSequence(seed).spawn(4)
        self.policy = np.random.default_rng(policy)
        self.blocks = np.random.default_rng(blocks)
        self.minibatch = np.random.default_rng(minibatch)
        self.env = np.random.default_rng(env)


def epsilon_greedy_action(
    qfn: QFunction, s: np.ndarray, epsilon: float, rng: np.random.Generator
) -> int:
    # Exactly one uniform draw per call, plus one integer draw when exploring.
    if rng.random() < epsilon:
        return int(rng.integers(qfn.action_count))
    return int(np.argmax(qfn.q_values(s)))  # first maximum, i.e. lowest index


def train_burst(
    memory: ReplayMemory,
    qfn: QFunction,
    hp: Hyperparameters,
    streams: Streams,
    backend: str,
) -> cache_mod.BuildStats:
    """Build one cache and run ``C / F`` minibatch updates on it."""
    with memory.freeze():
        cache = cache_mod.build(memory, qfn, hp, streams.blocks, backend)
        for _ in range(hp.updates_per_burst):
            batch = cache.sample_minibatch(memory, hp.minibatch_size, streams.minibatch)
            qfn.sgd_step(batch, hp.learning_rate)
    return cache.stats


def run(
    env: Env,
    hp: Hyperparameters,
    backend: str,
    seed: int,
    qfn: QFunction | None = None,
    on_burst: Callable[[int, QFunction], None] | None = None,
) -> RunReport:
    check_backend(backend)
    started = time.perf_counter()
    streams = Streams(seed)
    memory = ReplayMemory(hp.replay_capacity, env.observation_bytes, env.action_count)
    if qfn is None:
        qfn = TabularQ(env.state_count, env.action_count)
    report = RunReport(backend=backend, seed=seed)
    actions_hash = hashlib.sha256()

    state = env.reset(int(streams.env.integers(2**31)))
    ep_return, ep_steps = 0.0, 0

    def act_and_store(action: int, record: bool) -> None:
        nonlocal state, ep_return, ep_steps
        nxt, reward, terminal = env.step(action)
        memory.push(Experience(state, action, reward, terminal))
        actions_hash.update(bytes((action,)))
        ep_return += reward
        ep_steps += 1
        if terminal:
            if record:
                report.episodes.append(EpisodeRecord(len(report.episodes), ep_steps, ep_return))
            ep_return, ep_steps = 0.0, 0
            state = env.reset(int(streams.env.integers(2**31)))
        else:
            state = nxt

    for _ in range(hp.prepopulation):
        act_and_store(int(streams.policy.integers(env.action_count)), record=False)
    report.prepopulated = hp.prepopulation

    C = hp.refresh_period
    for t in range(1, hp.total_steps + 1):
        if (t - 1) % C == 0:
            stats = train_burst(memory, qfn, hp, streams, backend)
            burst = len(report.bursts)
            report.bursts.append(
                BurstRecord(
                    burst=burst,
                    t=t,
                    build_seconds=stats.seconds,
                    copy_bytes=stats.copy_bytes,
                    q_evals=stats.q_evals,
                    blocks=stats.blocks,
                    draws=stats.draws,
                    updates=hp.updates_per_burst,
                    theta_digest=qfn.digest(),
                )
            )
            log.debug("burst %d at t=%d: %d blocks, %d q-evals", burst, t, stats.blocks, stats.q_evals)
            if on_burst is not None:
                on_burst(burst, qfn)
        action = epsilon_greedy_action(qfn, state, hp.epsilon(t), streams.policy)
        act_and_store(action, record=True)
        report.steps = t

    report.final_digest = qfn.digest()
    report.action_digest = actions_hash.hexdigest()
    report.wall_seconds = time.perf_counter() - started
    return report
