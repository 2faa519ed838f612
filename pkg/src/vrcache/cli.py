"""Command line entry point: ``memcalc``, ``run``, ``compare`` and ``bench``.

Exit codes: 0 success or equivalent, 1 usage error, 2 runtime error,
3 divergence between backends.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .errors import ConfigurationError, VRCacheError
from .memmodel import BACKENDS, MemoryLayout

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_DIVERGED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw}")
    return value


def _size_list(raw: str) -> list[int]:
    try:
        sizes = [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from None
    if not sizes or min(sizes) < 4:
        raise argparse.ArgumentTypeError("sizes must be integers >= 4")
    return sizes


# flag -> config key; every flag defaults to None so only given flags override
RUN_FLAGS = [
    ("--seed", "seed", int),
    ("--env", "env", str),
    ("--obs-bytes", "obs_bytes", int),
    ("--lambda", "lam", float),
    ("--gamma", "gamma", float),
    ("--S", "cache_size", int),
    ("--B", "block_size", int),
    ("--C", "refresh_period", int),
    ("--F", "train_frequency", int),
    ("--K", "prepopulation", int),
    ("--capacity", "replay_capacity", int),
    ("--batch", "minibatch_size", int),
    ("--alpha", "learning_rate", float),
    ("--eps-start", "epsilon_start", float),
    ("--eps-end", "epsilon_end", float),
    ("--eps-anneal", "epsilon_anneal_steps", int),
    ("--total-steps", "total_steps", int),
    ("--out", "out", str),
]


def _add_run_flags(p: argparse.ArgumentParser, backend: bool = True) -> None:
    p.add_argument("--config", type=Path, help="key=value file; flags override it")
    for flag, dest, kind in RUN_FLAGS:
        kwargs = {"choices": ["chain", "gridworld", "synthetic"]} if dest == "env" else {}
        p.add_argument(flag, dest=dest, type=kind, default=None, **kwargs)
    if backend:
        p.add_argument("--backend", choices=BACKENDS, default=None)


def _config_from_args(args) -> harness.RunConfig:
    values = harness.parse_config_text(args.config.read_text()) if args.config else {}
    for _, dest, _ in RUN_FLAGS:
        v = getattr(args, dest, None)
        if v is not None:
            values[dest] = v
    if getattr(args, "backend", None) is not None:
        values["backend"] = args.backend
    return harness.make_config(values)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vrcache", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("memcalc", help="per-experience and total cache memory for both backends")
    m.add_argument("--state-bytes", type=_positive_int, default=84 * 84 * 4)
    m.add_argument("--action-bytes", type=_positive_int, default=1)
    m.add_argument("--return-bytes", type=_positive_int, default=4)
    m.add_argument("--index-bytes", type=_positive_int, default=4)
    m.add_argument("--S", dest="cache_size", type=_positive_int, default=80_000)
    m.add_argument("--out", type=Path, help="also write the rows as CSV")

    r = sub.add_parser("run", help="train one agent and write a CSV report")
    _add_run_flags(r)

    c = sub.add_parser("compare", help="run both backends from one seed and check equivalence")
    _add_run_flags(c, backend=False)
    c.add_argument("--mismatch-seed", action="store_true",
                   help="negative control: run the physical backend with seed + 1")

    b = sub.add_parser("bench", help="median cache build time per backend")
    b.add_argument("--sizes", type=_size_list, default=[64, 84 * 84 * 4])
    b.add_argument("--S", dest="cache_size", type=_positive_int, default=8000)
    b.add_argument("--B", dest="block_size", type=int, default=100)
    b.add_argument("--repeats", type=_positive_int, default=5)
    b.add_argument("--entries", type=_positive_int, default=None,
                   help="replay entries to fill (default 1.25 S + B + 1)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", type=Path)
    return parser


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_memcalc(args) -> int:
    layout = MemoryLayout(args.state_bytes, args.action_bytes, args.return_bytes, args.index_bytes)
    sys.stdout.write(harness.memcalc_table(layout, args.cache_size))
    if args.out:
        args.out.write_text(harness.rows_to_csv(harness.memcalc_rows(layout, args.cache_size)))
    return EXIT_OK


def cmd_run(args) -> int:
    config = _config_from_args(args)
    report = harness.run_config(config)
    _emit(harness.report_csv(report), config.out)
    print(
        f"{report.backend}: {report.steps} steps, {len(report.episodes)} episodes, "
        f"{len(report.bursts)} bursts, {report.wall_seconds:.2f}s",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _config_from_args(args)
    physical_seed = config.seed + 1 if args.mismatch_seed else None
    result = harness.compare(config, physical_seed=physical_seed)
    _emit(harness.comparison_text(result), config.out)
    return EXIT_OK if result.equivalent else EXIT_DIVERGED


def cmd_bench(args) -> int:
    if args.block_size < 0:
        raise ConfigurationError("--B must be non-negative")
    rows = harness.bench(args.sizes, args.cache_size, args.block_size, args.repeats, args.entries, args.seed)
    _emit(harness.bench_csv(rows), args.out)
    return EXIT_OK


COMMANDS = {"memcalc": cmd_memcalc, "run": cmd_run, "compare": cmd_compare, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"vrcache: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VRCacheError, OSError) as exc:
        print(f"vrcache: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
