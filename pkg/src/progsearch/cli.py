"""Operator entry point.

Subcommands:
    run      execute a search experiment and write its artifacts
    replay   re-run an experiment from a recorded cassette
    report   summarize run directories (tables, ranks, curves)
    oracle   maze baselines and verification
    sweep    vehicle rotation-speed sweep

Exit codes: 0 completion (even when no program succeeded; the log is the
result), 2 configuration error, 3 provider auth failure.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

from . import maze, report
from .config import SearchConfig, parse_config_file, providers_from_pairs
from .errors import (
    AuthError,
    ConfigError,
    CorruptLogError,
    EmptySweepError,
    HarnessError,
    ProviderUnavailable,
    UnknownTaskError,
)
from .logio import atomic_write_text, read_jsonl, write_jsonl
from .providers import make_provider, write_cassette
from .sandbox import SandboxConfig
from .search import run_experiment, sweep_omega
from .tasks import TASK_NAMES, make_task


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="progsearch")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a search experiment")
    _add_search_flags(run_p)
    run_p.add_argument("--out", required=True, help="output directory")

    replay_p = sub.add_parser("replay", help="re-run from a recorded cassette")
    replay_p.add_argument("--from", dest="source_dir", required=True)
    replay_p.add_argument("--out", required=True)

    report_p = sub.add_parser("report", help="summarize run directories")
    report_p.add_argument("--runs", nargs="+", required=True)
    report_p.add_argument("--out", required=True)

    oracle_p = sub.add_parser("oracle", help="maze baselines and verification")
    oracle_sub = oracle_p.add_subparsers(dest="oracle_command", required=True)
    ea_p = oracle_sub.add_parser("maze-ea", help="evolutionary maze baseline")
    ea_p.add_argument("--size", type=int, default=20)
    ea_p.add_argument("--evals", type=int, default=50_000)
    ea_p.add_argument("--seed", type=int, default=1)
    ea_p.add_argument("--out", default=None)
    verify_p = oracle_sub.add_parser("maze-verify",
                                     help="exhaustive scorer cross-check")
    verify_p.add_argument("--size", type=int, default=4)

    sweep_p = sub.add_parser("sweep", help="vehicle omega sweep")
    _add_search_flags(sweep_p)
    sweep_p.add_argument("--omegas", required=True,
                         help="comma-separated rotation speeds")
    sweep_p.add_argument("--out", required=True)
    return parser


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--task", required=True, help=f"one of {', '.join(TASK_NAMES)}")
    p.add_argument("--provider", required=True,
                   help="scripted:<cassette>, replay:<cassette>, or configured name")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--max-repairs", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--episodes", type=int, default=None,
                   help="evaluation episodes per fitness call (task default otherwise)")
    p.add_argument("--step-limit", type=int, default=None)
    p.add_argument("--target-fitness", type=float, default=None)
    p.add_argument("--omega", type=float, default=50.0, help="vehicle rotation speed")
    p.add_argument("--maze-size", type=int, default=20)
    p.add_argument("--parallel-trials", type=int, default=1)
    p.add_argument("--trace-limit", type=int, default=200)
    p.add_argument("--config", default=None, help="key-value config file")
    p.add_argument("--runner", default=None,
                   help="runner command line (default: built-in stub runner)")
    p.add_argument("--load-timeout-ms", type=int, default=10_000)
    p.add_argument("--call-timeout-ms", type=int, default=2_000)


def _search_config(args) -> SearchConfig:
    config = SearchConfig(
        trials=args.trials,
        iterations=args.iterations,
        max_repairs=args.max_repairs,
        seed=args.seed,
        target_fitness=args.target_fitness,
        eval_episodes=args.episodes,
        step_limit=args.step_limit,
        trace_limit=args.trace_limit,
        parallel_trials=args.parallel_trials,
    )
    config.validate()
    return config


def _sandbox_config(args) -> SandboxConfig:
    kw = {"load_timeout_ms": args.load_timeout_ms,
          "call_timeout_ms": args.call_timeout_ms}
    if args.runner:
        kw["runner_command"] = shlex.split(args.runner)
    return SandboxConfig(**kw)


def _provider(args):
    provider_configs = {}
    if args.config:
        provider_configs = providers_from_pairs(parse_config_file(args.config))
    return make_provider(args.provider, provider_configs)


def _make_task(args):
    return make_task(args.task, omega=args.omega, episodes=args.episodes,
                     step_limit=args.step_limit, maze_width=args.maze_size,
                     maze_height=args.maze_size)


def _write_run_dir(out: Path, args, config: SearchConfig, outcome, provider) -> None:
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "task": outcome.task_name,
        "provider": outcome.provider_name,
        "model": getattr(provider, "model_id", outcome.provider_name),
        "trials": config.trials,
        "iterations": config.iterations,
        "max_repairs": config.max_repairs,
        "seed": config.seed,
        "episodes": config.eval_episodes,
        "step_limit": config.step_limit,
        "omega": args.omega if args.task == "vehicle" else None,
        "maze_size": args.maze_size if args.task == "maze" else None,
        "trace_limit": config.trace_limit,
    }
    atomic_write_text(out / "meta.json", json.dumps(meta, indent=2) + "\n")
    write_jsonl(out / "log.jsonl", [r.to_dict() for r in outcome.records])
    write_cassette(out / "cassette.jsonl", outcome.exchanges)
    summary = report.summarize_run([r.to_dict() for r in outcome.records])
    atomic_write_text(out / "summary.md",
                      report.summary_markdown(summary, title=f"{outcome.task_name} run"))
    curves = report.reward_curves([r.to_dict() for r in outcome.records],
                                  trials=config.trials)
    atomic_write_text(out / "curves.csv", report.curves_to_csv(curves))
    if outcome.recommendation is not None:
        atomic_write_text(out / "best_program.py", outcome.recommendation.source)


def cmd_run(args) -> int:
    config = _search_config(args)
    task = _make_task(args)
    provider = _provider(args)
    outcome = run_experiment(task, config, provider, _sandbox_config(args))
    _write_run_dir(Path(args.out), args, config, outcome, provider)
    best = outcome.best_fitness
    print(f"run complete: best fitness {best:g} "
          f"({'no recommendation' if outcome.recommendation is None else 'recommendation written'})")
    return 0


def cmd_replay(args) -> int:
    source = Path(args.source_dir)
    meta_path = source / "meta.json"
    cassette_path = source / "cassette.jsonl"
    if not meta_path.exists() or not cassette_path.exists():
        raise ConfigError(f"{source} is not a run directory (need meta.json and cassette.jsonl)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    ns = argparse.Namespace(
        task=meta["task"], provider=f"replay:{cassette_path}",
        trials=meta["trials"], iterations=meta["iterations"],
        max_repairs=meta["max_repairs"], seed=meta["seed"],
        episodes=meta.get("episodes"), step_limit=meta.get("step_limit"),
        target_fitness=None, omega=meta.get("omega") or 50.0,
        maze_size=meta.get("maze_size") or 20, parallel_trials=1,
        trace_limit=meta.get("trace_limit", 200), config=None,
        runner=getattr(args, "runner", None),
        load_timeout_ms=10_000, call_timeout_ms=2_000, out=args.out,
    )
    return cmd_run(ns)


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    domain_results: dict[str, dict[str, float]] = {}
    wrote = 0
    for run_dir in args.runs:
        run_path = Path(run_dir)
        log_path = run_path / "log.jsonl"
        if not log_path.exists():
            print(f"error: no log.jsonl in {run_path}", file=sys.stderr)
            return 2
        records = read_jsonl(log_path)
        meta = {}
        meta_path = run_path / "meta.json"
        if meta_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        name = run_path.name
        summary = report.summarize_run(records)
        atomic_write_text(out / f"summary_{name}.md",
                          report.summary_markdown(summary, title=name))
        curves = report.reward_curves(records)
        atomic_write_text(out / f"curves_{name}.csv", report.curves_to_csv(curves))
        task_name = meta.get("task", "unknown")
        model = meta.get("model", name)
        domain_results.setdefault(task_name, {})[model] = summary.best_fitness
        wrote += 1
    table = report.aggregate_ranks(domain_results)
    atomic_write_text(out / "ranks.md", report.rank_markdown(table))
    print(f"report written for {wrote} run(s) to {out}")
    return 0


def cmd_oracle(args) -> int:
    if args.oracle_command == "maze-ea":
        if args.size < 2:
            raise ConfigError("--size must be >= 2")
        if args.evals < 1:
            raise ConfigError("--evals must be >= 1")
        grid, score = maze.ea_baseline(args.size, args.size, args.evals, args.seed)
        print(f"score {score}")
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            atomic_write_text(out / "maze.txt", maze.maze_to_text(grid))
            atomic_write_text(out / "maze.pgm", maze.maze_to_pgm(grid))
        return 0
    if args.oracle_command == "maze-verify":
        if args.size < 2 or args.size * args.size > 20:
            raise ConfigError("--size must be 2..4 for exhaustive verification")
        mismatches = maze.verify_exhaustive(args.size, args.size)
        print(f"{mismatches} mismatches")
        return 0 if mismatches == 0 else 1
    raise ConfigError(f"unknown oracle {args.oracle_command!r}")


def cmd_sweep(args) -> int:
    config = _search_config(args)
    if args.task != "vehicle":
        raise ConfigError("sweep only applies to the vehicle task")
    try:
        omegas = [float(w) for w in args.omegas.split(",") if w.strip()]
    except ValueError as e:
        raise ConfigError(f"bad --omegas: {e}") from None
    provider = _provider(args)
    table = sweep_omega(omegas, config, provider, _sandbox_config(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "sweep.csv", table.to_csv())
    print(table.to_csv().strip())
    return 0


_CONFIG_DEFAULT_KEYS = {
    "trials": int, "iterations": int, "max_repairs": int, "seed": int,
    "episodes": int, "step_limit": int, "parallel_trials": int,
    "trace_limit": int, "target_fitness": float, "omega": float,
}


def _apply_config_defaults(parser: argparse.ArgumentParser, argv) -> None:
    """search.<key> entries in the config file become parser defaults, so
    explicit flags always win."""
    if argv is None:
        argv = sys.argv[1:]
    if "--config" not in argv:
        return
    path = argv[argv.index("--config") + 1]
    defaults = {}
    for key, value in parse_config_file(path).items():
        if key.startswith("search."):
            name = key.split(".", 1)[1].replace("-", "_")
            if name not in _CONFIG_DEFAULT_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            defaults[name] = _CONFIG_DEFAULT_KEYS[name](value)
    for sub_action in parser._subparsers._group_actions:
        for sub in sub_action.choices.values():
            sub.set_defaults(**defaults)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        _apply_config_defaults(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    except (ConfigError, FileNotFoundError, IndexError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    handlers = {
        "run": cmd_run,
        "replay": cmd_replay,
        "report": cmd_report,
        "oracle": cmd_oracle,
        "sweep": cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except AuthError as e:
        print(f"auth error: {e}", file=sys.stderr)
        return 3
    except (ConfigError, UnknownTaskError, EmptySweepError, CorruptLogError,
            FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ProviderUnavailable as e:
        print(f"provider unavailable: {e}", file=sys.stderr)
        return 1
    except HarnessError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
