"""Run configuration, CSV reports, backend comparison and the build benchmark."""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import agent, cache as cache_mod
from .envs import make_env, synthetic
from .errors import ConfigurationError
from .hyperparameters import Hyperparameters
from .memmodel import BACKENDS, PHYSICAL, VIRTUAL, MemoryLayout, cache_bytes, format_megabytes, per_experience_bytes, reduction_ratio
from .replay_memory import Experience, ReplayMemory
from .value_fn import TabularQ


@dataclass(frozen=True)
class RunConfig:
    hp: Hyperparameters = Hyperparameters()
    env: str = "chain"
    obs_bytes: int = 64
    backend: str = VIRTUAL
    seed: int = 0
    out: str = ""

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ConfigurationError(f"backend must be one of {BACKENDS}")
        if self.obs_bytes < 4:
            raise ConfigurationError("obs_bytes must be at least 4")

    def make_env(self):
        return make_env(self.env, self.obs_bytes)


_RUN_KEYS = [f.name for f in fields(RunConfig) if f.name != "hp"]


def _coerce(kind: type, raw: str):
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def config_to_text(config: RunConfig) -> str:
    lines = [f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in asdict(config.hp).items()]
    lines += [f"{k}={getattr(config, k)}" for k in _RUN_KEYS]
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment. Values are typed by field."""
    hp_types = {f.name: type(f.default) for f in fields(Hyperparameters)}
    run_types = {f.name: type(f.default) for f in fields(RunConfig) if f.name != "hp"}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ConfigurationError(f"line {lineno}: expected key=value")
        kind = hp_types.get(key) or run_types.get(key)
        if kind is None:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(kind, raw)
        except ValueError:
            raise ConfigurationError(f"line {lineno}: bad value for {key}: {raw!r}") from None
    return values


def make_config(values: dict, base: RunConfig | None = None) -> RunConfig:
    """Apply flat ``values`` (hyperparameter and run keys mixed) on top of ``base``."""
    base = base or RunConfig()
    hp_names = set(Hyperparameters.field_names())
    hp_over = {k: v for k, v in values.items() if k in hp_names}
    run_over = {k: v for k, v in values.items() if k not in hp_names}
    return replace(base, hp=replace(base.hp, **hp_over), **run_over)


def write_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(config_to_text(config))


def read_config(path: str | Path) -> RunConfig:
    return make_config(parse_config_text(Path(path).read_text()))


# ---------------------------------------------------------------- reports

EPISODE_HEADER = ["episode", "steps", "return"]
BURST_HEADER = ["burst", "t", "build_ms", "copy_bytes", "q_evals", "blocks", "draws", "theta_digest"]
WALL_COLUMNS = {"build_ms", "wall_seconds"}


def report_csv(report: agent.RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["# summary"])
    w.writerow(["backend", "seed", "prepopulated", "steps", "episodes", "bursts",
                "final_digest", "action_digest", "wall_seconds"])
    w.writerow([report.backend, report.seed, report.prepopulated, report.steps,
                len(report.episodes), len(report.bursts), report.final_digest,
                report.action_digest, f"{report.wall_seconds:.6f}"])
    w.writerow([])
    w.writerow(["# episodes"])
    w.writerow(EPISODE_HEADER)
    for e in report.episodes:
        w.writerow([e.episode, e.steps, repr(e.ret)])
    w.writerow([])
    w.writerow(["# bursts"])
    w.writerow(BURST_HEADER)
    for b in report.bursts:
        w.writerow([b.burst, b.t, f"{b.build_seconds * 1e3:.3f}", b.copy_bytes, b.q_evals,
                    b.blocks, b.draws, b.theta_digest])
    return buf.getvalue()


def parse_report_csv(text: str) -> dict[str, list[dict[str, str]]]:
    """Split a report back into ``{section: rows}``."""
    sections: dict[str, list[dict[str, str]]] = {}
    for chunk in text.strip().split("\n\n"):
        lines = chunk.splitlines()
        name = lines[0].lstrip("# ").strip()
        sections[name] = list(csv.DictReader(lines[1:]))
    return sections


def run_config(config: RunConfig) -> agent.RunReport:
    return agent.run(config.make_env(), config.hp, config.backend, config.seed)


# ---------------------------------------------------------------- compare

@dataclass
class Comparison:
    equivalent: bool
    divergence: str  # empty when equivalent
    virtual: agent.RunReport
    physical: agent.RunReport

    @property
    def verdict(self) -> str:
        return "EQUIVALENT" if self.equivalent else "DIVERGED"


def first_divergence(a: agent.RunReport, b: agent.RunReport) -> str:
    for x, y in zip(a.bursts, b.bursts):
        for name in ("theta_digest", "q_evals", "blocks", "draws"):
            if getattr(x, name) != getattr(y, name):
                return f"burst {x.burst}: {name} differs ({getattr(x, name)} vs {getattr(y, name)})"
    if len(a.bursts) != len(b.bursts):
        return f"burst count differs ({len(a.bursts)} vs {len(b.bursts)})"
    for x, y in zip(a.episodes, b.episodes):
        if (x.steps, x.ret) != (y.steps, y.ret):
            return f"episode {x.episode}: return/steps differ ({x.ret}/{x.steps} vs {y.ret}/{y.steps})"
    if len(a.episodes) != len(b.episodes):
        return f"episode count differs ({len(a.episodes)} vs {len(b.episodes)})"
    if a.action_digest != b.action_digest:
        return "action sequence differs"
    if a.final_digest != b.final_digest:
        return "final theta digest differs"
    return ""


def compare(config: RunConfig, physical_seed: int | None = None) -> Comparison:
    """Run both backends from the same seed. ``physical_seed`` exists for negative controls."""
    v = agent.run(config.make_env(), config.hp, VIRTUAL, config.seed)
    p_seed = config.seed if physical_seed is None else physical_seed
    p = agent.run(config.make_env(), config.hp, PHYSICAL, p_seed)
    divergence = first_divergence(v, p)
    return Comparison(not divergence, divergence, v, p)


def comparison_text(c: Comparison) -> str:
    def total(r, name):
        return sum(getattr(b, name) for b in r.bursts)

    v_build, p_build = total(c.virtual, "build_seconds"), total(c.physical, "build_seconds")
    v_copy, p_copy = total(c.virtual, "copy_bytes"), total(c.physical, "copy_bytes")
    lines = [
        f"verdict: {c.verdict}",
        f"{'':<22}{'virtual':>16}{'physical':>16}",
        f"{'bursts':<22}{len(c.virtual.bursts):>16}{len(c.physical.bursts):>16}",
        f"{'episodes':<22}{len(c.virtual.episodes):>16}{len(c.physical.episodes):>16}",
        f"{'build seconds':<22}{v_build:>16.4f}{p_build:>16.4f}",
        f"{'copy bytes':<22}{v_copy:>16}{p_copy:>16}",
        f"{'final digest':<22}{c.virtual.final_digest[:12]:>16}{c.physical.final_digest[:12]:>16}",
        f"build time ratio (virtual/physical): {v_build / p_build if p_build else float('nan'):.4f}",
        f"copy byte ratio (virtual/physical): {v_copy / p_copy if p_copy else float('nan'):.4f}",
    ]
    if c.divergence:
        lines.append(f"first divergence: {c.divergence}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- memcalc

def memcalc_rows(layout: MemoryLayout, S: int) -> list[list[str]]:
    rows = [["row", "physical", "virtual"]]
    rows.append(["per_experience_bytes"] + [str(per_experience_bytes(layout, b)) for b in (PHYSICAL, VIRTUAL)])
    sizes = [cache_bytes(S, layout, b) for b in (PHYSICAL, VIRTUAL)]
    rows.append(["cache_bytes"] + [str(s.bytes) for s in sizes])
    rows.append(["cache_megabytes"] + [f"{s.megabytes:g}" for s in sizes])
    ratio, reduction = reduction_ratio(layout)
    rows.append(["virtual_over_physical_percent", "", f"{ratio:.3f}"])
    rows.append(["reduction_percent", "", f"{reduction:.3f}"])
    return rows


def memcalc_table(layout: MemoryLayout, S: int) -> str:
    phys = cache_bytes(S, layout, PHYSICAL)
    virt = cache_bytes(S, layout, VIRTUAL)
    ratio, reduction = reduction_ratio(layout)
    lines = [
        f"cache size S = {S}; 1 MB = 2^20 B",
        f"{'':<16}{'physical':>14}{'virtual':>14}",
        f"{'Per Experience':<16}{per_experience_bytes(layout, PHYSICAL):>12} B"
        f"{per_experience_bytes(layout, VIRTUAL):>12} B",
        f"{'Cache':<16}{format_megabytes(phys.megabytes):>14}{format_megabytes(virt.megabytes):>14}",
        f"virtual / physical: {ratio:.3f}%",
        f"reduction: {reduction:.3f}%",
    ]
    return "\n".join(lines) + "\n"


def rows_to_csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------- bench

BENCH_HEADER = ["obs_bytes", "backend", "median_build_ms", "min_build_ms", "copy_bytes", "cache_nbytes", "q_evals"]


def filled_memory(obs_bytes: int, entries: int, seed: int = 0) -> tuple[ReplayMemory, TabularQ]:
    env = synthetic(observation_bytes=obs_bytes, seed=seed)
    rng = np.random.default_rng(seed)
    memory = ReplayMemory(entries, obs_bytes, env.action_count)
    state = env.reset()
    for _ in range(entries):
        a = int(rng.integers(env.action_count))
        nxt, r, term = env.step(a)
        memory.push(Experience(state, a, r, term))
        state = env.reset() if term else nxt
    return memory, TabularQ(env.state_count, env.action_count)


def bench(sizes, S: int = 8000, B: int = 100, repeats: int = 5, entries: int | None = None, seed: int = 0):
    """Median cache build time per backend for each observation width.

    Backends alternate within each repeat and reuse the same block seed, so
    they do identical work apart from the copies.
    """
    if entries is None:
        entries = S + S // 4 + B + 1
    hp = Hyperparameters(cache_size=S, block_size=B, prepopulation=B + 2, replay_capacity=entries)
    rows = []
    for size in sizes:
        memory, qfn = filled_memory(size, entries, seed)
        times: dict[str, list[float]] = {VIRTUAL: [], PHYSICAL: []}
        counters: dict[str, tuple[int, int, int]] = {}
        for rep in range(repeats):
            order = (VIRTUAL, PHYSICAL) if rep % 2 == 0 else (PHYSICAL, VIRTUAL)
            for backend in order:
                built = cache_mod.build(memory, qfn, hp, np.random.default_rng([seed, rep]), backend)
                times[backend].append(built.stats.seconds)
                counters[backend] = (built.copy_bytes, built.nbytes, built.stats.q_evals)
                del built
        for backend in (VIRTUAL, PHYSICAL):
            copied, nbytes, q_evals = counters[backend]
            rows.append({
                "obs_bytes": size,
                "backend": backend,
                "median_build_ms": statistics.median(times[backend]) * 1e3,
                "min_build_ms": min(times[backend]) * 1e3,
                "copy_bytes": copied,
                "cache_nbytes": nbytes,
                "q_evals": q_evals,
            })
        del memory
    return rows


def bench_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_HEADER, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**r, "median_build_ms": f"{r['median_build_ms']:.3f}", "min_build_ms": f"{r['min_build_ms']:.3f}"})
    return buf.getvalue()
