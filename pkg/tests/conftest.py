import numpy as np
import pytest

from vrcache.envs import synthetic
from vrcache.replay_memory import Experience, ReplayMemory
from vrcache.value_fn import TabularQ


def fill(env, memory, n, rng):
    state = env.reset()
    for _ in range(n):
        a = int(rng.integers(env.action_count))
        nxt, r, term = env.step(a)
        memory.push(Experience(state, a, r, term))
        state = env.reset() if term else nxt


@pytest.fixture
def filler():
    return fill


@pytest.fixture
def make_memory():
    """``(memory, qfn)`` over a synthetic MDP with a random (non-zero) Q table."""

    def make(n, obs_bytes=16, capacity=None, seed=0):
        env = synthetic(state_count=12, observation_bytes=obs_bytes, horizon=30, seed=seed)
        rng = np.random.default_rng(seed)
        memory = ReplayMemory(capacity or n, obs_bytes, env.action_count)
        fill(env, memory, n, rng)
        qfn = TabularQ(env.state_count, env.action_count)
        qfn.table[:] = rng.normal(size=qfn.table.shape)
        return memory, qfn

    return make


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    state = {}

    def record(label: str, detail: str = ""):
        state["label"], state["detail"] = label, detail

    yield record
    if "label" in state:
        rep = getattr(request.node, "rep_call", None)
        ok = rep is not None and rep.passed
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {state['label']}  {state['detail']}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
