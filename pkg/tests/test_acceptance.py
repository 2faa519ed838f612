"""Exit criteria. Each test records one PASS/FAIL line in the terminal summary."""

import time

import numpy as np
import pytest

from vrcache import harness
from vrcache.agent import run
from vrcache.cache import build
from vrcache.cli import main
from vrcache.envs import ADVANCE, chain, value_iteration
from vrcache.hyperparameters import Hyperparameters
from vrcache.memmodel import ATARI_LAYOUT, PHYSICAL, VIRTUAL, MemoryLayout, cache_bytes, per_experience_bytes, reduction_ratio
from vrcache.returns import DiscountParams, Trajectory, lambda_return_block, lambda_return_direct, n_step_return
from vrcache.value_fn import TabularQ


def test_1_memory_table_exact(capsys, tmp_path, verdict):
    verdict("1 memory table", "28229 B / 8 B, 2154 MB / 0.61 MB, 0.028%, >99.9%")
    started = time.perf_counter()
    out = tmp_path / "mem.csv"
    assert main(["memcalc", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    elapsed = time.perf_counter() - started

    assert per_experience_bytes(ATARI_LAYOUT, PHYSICAL) == 28229
    assert per_experience_bytes(ATARI_LAYOUT, VIRTUAL) == 8
    assert cache_bytes(80_000, ATARI_LAYOUT, PHYSICAL).megabytes == 2154
    assert cache_bytes(80_000, ATARI_LAYOUT, VIRTUAL).megabytes == 0.61
    ratio, reduction = reduction_ratio(ATARI_LAYOUT)
    assert f"{ratio:.3f}" == "0.028" and reduction > 99.9
    for needle in ("28229 B", "8 B", "2154 MB", "0.61 MB", "0.028%"):
        assert needle in text
    rows = {r[0]: r[1:] for r in harness.memcalc_rows(ATARI_LAYOUT, 80_000)}
    assert float(rows["reduction_percent"][1]) > 99.9
    assert elapsed < 1.0


def random_trajectory(rng):
    n = int(rng.integers(1, 13))
    terminals = rng.random(n) < 0.2
    return (
        Trajectory(rng.uniform(-5, 5, n), rng.uniform(-5, 5, n), terminals),
        DiscountParams(float(rng.random()), float(rng.random())),
    )


def test_2_return_oracle(verdict):
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        traj, p = random_trajectory(rng)
        out = lambda_return_block(traj, p)
        for i in range(len(traj)):
            worst = max(worst, abs(out[i] - lambda_return_direct(traj.suffix(i), p)))

        # endpoint collapses, bit-exact
        p0, p1 = DiscountParams(p.gamma, 0.0), DiscountParams(p.gamma, 1.0)
        assert lambda_return_direct(traj, p0) == n_step_return(traj, 1, p.gamma)
        assert lambda_return_direct(traj, p1) == n_step_return(traj, len(traj), p.gamma)
        assert lambda_return_block(traj, p0) == [n_step_return(traj.suffix(i), 1, p.gamma) for i in range(len(traj))]

        # convex combination on a terminal-free interior
        interior = Trajectory(traj.rewards, traj.bootstrap_values,
                              [False] * (len(traj) - 1) + [traj.terminal_mask[-1]])
        g = [n_step_return(interior, n, p.gamma) for n in range(1, len(interior) + 1)]
        lam_ret = lambda_return_direct(interior, p)
        assert min(g) - 1e-12 <= lam_ret <= max(g) + 1e-12
    elapsed = time.perf_counter() - started
    verdict("2 return oracle", f"max |recursive - direct| = {worst:.2e} over 1000 trajectories, {elapsed:.2f}s")
    assert worst <= 1e-9
    assert elapsed < 5.0


EQUIV_HP = Hyperparameters(prepopulation=500, replay_capacity=2000, refresh_period=500, train_frequency=4,
                           cache_size=400, block_size=20, total_steps=20_000, gamma=0.99, lam=0.8,
                           epsilon_start=1.0, epsilon_end=0.05, epsilon_anneal_steps=10_000)


def test_3_pure_refactor_equivalence(verdict):
    started = time.perf_counter()
    results = []
    for seed in (0, 1, 2):
        config = harness.RunConfig(hp=EQUIV_HP, env="chain", seed=seed)
        c = harness.compare(config)
        results.append(c)
        assert c.verdict == "EQUIVALENT", c.divergence
        assert [b.theta_digest for b in c.virtual.bursts] == [b.theta_digest for b in c.physical.bursts]
        assert c.virtual.episode_returns == c.physical.episode_returns
        assert len(c.virtual.bursts) == 40
    elapsed = time.perf_counter() - started
    verdict("3 pure-refactor equivalence",
            f"3 seeds x 40 bursts EQUIVALENT, {sum(len(c.virtual.episodes) for c in results)} episodes, {elapsed:.1f}s")
    assert elapsed < 120


@pytest.mark.parametrize("width", [64, 28224])
def test_4_copy_elimination(width, verdict, make_memory):
    S = 400
    layout = MemoryLayout(width, 1, 4, 4)
    hp = Hyperparameters(prepopulation=500, replay_capacity=2000, refresh_period=100, train_frequency=4,
                         cache_size=S, block_size=20, total_steps=1000, epsilon_anneal_steps=1000)
    builds = 0
    for backend, expected in ((VIRTUAL, 0), (PHYSICAL, S * (width + 1))):
        report = run(chain(observation_bytes=width), hp, backend, seed=4)
        assert all(b.copy_bytes == expected for b in report.bursts)
        builds += len(report.bursts)
    memory, qfn = make_memory(1000, obs_bytes=width)
    for backend in (VIRTUAL, PHYSICAL):
        c = build(memory, qfn, hp, np.random.default_rng(0), backend)
        assert c.copy_bytes == (0 if backend == VIRTUAL else S * (layout.state_bytes + layout.action_bytes))
        builds += 1
    verdict(f"4 copy elimination [{width} B]", f"{builds} builds: virtual 0 B, physical S x {width + 1} B")


def test_5_build_time_direction(verdict):
    rows = harness.bench([28224], S=8000, B=100, repeats=5)
    by = {r["backend"]: r for r in rows}
    v, p = by[VIRTUAL]["median_build_ms"], by[PHYSICAL]["median_build_ms"]
    verdict("5 build time direction", f"median virtual {v:.1f} ms <= physical {p:.1f} ms at 28224 B")
    assert v <= p


def test_6_learning_sanity(verdict):
    started = time.perf_counter()
    V, Q = value_iteration(chain().spec, 0.99)
    optimal = Q[:9].argmax(axis=1)
    assert np.all(optimal == ADVANCE)
    hp = Hyperparameters(**{**EQUIV_HP.as_dict(), "total_steps": 50 * EQUIV_HP.refresh_period})
    reached, value_error = {}, {}
    for backend in (VIRTUAL, PHYSICAL):
        first = []
        qfn = TabularQ(10, 2)

        def check(burst, qfn, first=first):
            if not first and np.array_equal(qfn.table[:9].argmax(axis=1), optimal):
                first.append(burst + 1)

        run(chain(), hp, backend, seed=0, qfn=qfn, on_burst=check)
        reached[backend] = first[0] if first else None
        value_error[backend] = float(np.abs(qfn.table[:9].max(axis=1) - V[:9]).max())
        assert np.array_equal(qfn.table[:9].argmax(axis=1), optimal)
    elapsed = time.perf_counter() - started
    verdict("6 learning sanity", f"optimal greedy policy after bursts {reached}, final max|V - V*| "
            f"{max(value_error.values()):.3f}, {elapsed:.1f}s")
    assert all(b is not None and b <= 50 for b in reached.values())
    assert elapsed < 60


def test_7_q_evaluation_economy(verdict, make_memory):
    report = run(chain(), EQUIV_HP, VIRTUAL, seed=0)
    assert all(b.q_evals == EQUIV_HP.cache_size + b.blocks for b in report.bursts)
    memory, qfn = make_memory(100_000, obs_bytes=4)
    hp = Hyperparameters(cache_size=80_000, block_size=100, prepopulation=102)
    c = build(memory, qfn, hp, np.random.default_rng(7), PHYSICAL)
    assert c.stats.q_evals == 80_000 + c.stats.blocks
    verdict("7 q-evaluation economy",
            f"{len(report.bursts)} bursts + S=80000 build: evals == S + blocks ({c.stats.blocks} blocks)")
