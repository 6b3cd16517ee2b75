"""Acceptance suite: one test per criterion, in order, at stated tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion. Everything here uses the built-in stub runner; the production
runner package is not required.
"""

import json
import random
import sys
import time

import pytest

from conftest import (
    BROKEN_SYNTAX,
    NOOP_POLICY,
    NOOP_VEHICLE_POLICY,
    NUMBER_POLICY,
    OPEN_GRID_GENERATOR,
    RUNTIME_ERROR_POLICY,
    TRACKING_POLICY,
    WALL_P_GENERATOR,
    fenced,
    load,
    make_cassette,
)
from invariants import fuzz_episode
from progsearch import SearchConfig, ScriptedProvider, make_task, maze, vehicle
from progsearch.cli import main as cli_main
from progsearch.prompts import build_task_prompt
from progsearch.report import aggregate_ranks, reward_curves, summarize_run
from progsearch.sandbox import ExecStatus, SandboxConfig, spawn
from progsearch.search import (
    CandidateProgram,
    SearchState,
    query_llm_with_repair,
    run_experiment,
)


def passed(n: int, text: str) -> None:
    print(f"[criterion {n:02d}] PASS: {text}", file=sys.stderr)


class CountingProvider:
    deterministic = True
    name = "counting"

    def __init__(self, responses):
        self.inner = ScriptedProvider(responses, cycle=True)
        self.calls = 0

    def chat(self, prompt):
        self.calls += 1
        return self.inner.chat(prompt)


def test_criterion_01_deterministic_pipeline(tmp_path):
    """`run` with a scripted cassette, seed 42, trials=10, iterations=10,
    maxRepairs=3 produces byte-identical logs twice in under 2 minutes."""
    cassette = tmp_path / "fixture.jsonl"
    pattern = [TRACKING_POLICY, NOOP_POLICY, BROKEN_SYNTAX, TRACKING_POLICY,
               RUNTIME_ERROR_POLICY, NOOP_POLICY, NUMBER_POLICY]
    sources = [pattern[i % len(pattern)] + f"\n# variant {i}\n" for i in range(350)]
    make_cassette(cassette, sources)
    args = ["run", "--task", "breakout", "--provider", f"scripted:{cassette}",
            "--trials", "10", "--iterations", "10", "--max-repairs", "3",
            "--seed", "42", "--episodes", "2", "--step-limit", "80"]
    started = time.monotonic()
    assert cli_main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli_main(args + ["--out", str(tmp_path / "b")]) == 0
    elapsed = time.monotonic() - started
    log_a = (tmp_path / "a" / "log.jsonl").read_bytes()
    log_b = (tmp_path / "b" / "log.jsonl").read_bytes()
    assert log_a == log_b, "run logs differ between identical executions"
    assert (tmp_path / "a" / "cassette.jsonl").read_bytes() == \
        (tmp_path / "b" / "cassette.jsonl").read_bytes()
    assert len(log_a.splitlines()) == 100
    assert elapsed < 120.0, f"two runs took {elapsed:.1f}s"
    passed(1, f"byte-identical 100-record logs, two runs in {elapsed:.1f}s")


def test_criterion_02_repair_call_budget(fast_sandbox_config):
    """Provider-call counts: 1 on immediate success, 3 after two failures,
    3 with a non-executable result on persistent failure."""
    task = make_task("maze", maze_width=8, maze_height=8)
    handle = spawn(fast_sandbox_config)
    try:
        p1 = CountingProvider([fenced(OPEN_GRID_GENERATOR)])
        _, check, repairs, _ = query_llm_with_repair(
            task, build_task_prompt(task), 3, p1, handle)
        assert (p1.calls, repairs, check.ok) == (1, 0, True)

        p2 = CountingProvider([fenced(BROKEN_SYNTAX), fenced(BROKEN_SYNTAX),
                               fenced(OPEN_GRID_GENERATOR)])
        _, check, repairs, _ = query_llm_with_repair(
            task, build_task_prompt(task), 3, p2, handle)
        assert (p2.calls, repairs, check.ok) == (3, 2, True)

        p3 = CountingProvider([fenced(BROKEN_SYNTAX)])
        _, check, repairs, _ = query_llm_with_repair(
            task, build_task_prompt(task), 3, p3, handle)
        assert (p3.calls, repairs, check.ok) == (3, 2, False)
        assert check.status is ExecStatus.SYNTAX_ERROR
    finally:
        handle.shutdown()
    passed(2, "call counts 1 / 3 / 3 match the repair-loop bound")


def test_criterion_03_hill_climb_monotonicity():
    """1000 fuzzed fitness sequences: best-so-far curves are non-decreasing
    and replacement happens only on strict improvement."""
    rng = random.Random(20_250_810)
    for case in range(1000):
        n = rng.randint(1, 40)
        fitnesses = [round(rng.uniform(-2.0, 10.0), 3) for _ in range(n)]
        if rng.random() < 0.3:  # force ties into the sequence
            fitnesses += [fitnesses[0]] * rng.randint(1, 3)
        state = SearchState()
        best_curve = []
        records = []
        prev_best = 0.0
        for i, fitness in enumerate(fitnesses, start=1):
            program = CandidateProgram(f"p{i}", f"id{i}", 0, i, 0,
                                       ExecStatus.EXECUTABLE, fitness=fitness)
            replaced = state.consider(program, fitness, None)
            assert replaced == (fitness > prev_best), "non-strict replacement"
            if replaced:
                assert state.best_program is program
            prev_best = state.best_fitness
            best_curve.append(state.best_fitness)
            records.append({"trial": 0, "iteration": i, "repairs": 0,
                            "program_sha": "x", "exec": "Executable",
                            "fitness": fitness, "tokens_in": 0, "tokens_out": 0,
                            "cost_usd": 0.0, "ms": 0})
        assert all(a <= b for a, b in zip(best_curve, best_curve[1:]))
        curve = [b for _, _, b in reward_curves(records)]
        assert curve == [max(0.0, max(fitnesses[:k + 1])) for k in range(len(fitnesses))]
    passed(3, "1000 fuzzed sequences: curves non-decreasing, strict-only replacement")


def test_criterion_04_maze_oracle_equivalence():
    """score_maze agrees with the exhaustive relaxation oracle on all 2^16
    wall patterns of a 4x4 grid in under 10 s."""
    started = time.monotonic()
    mismatches = maze.verify_exhaustive(4, 4)
    elapsed = time.monotonic() - started
    assert mismatches == 0
    assert elapsed < 10.0, f"exhaustive check took {elapsed:.1f}s"
    passed(4, f"65536 patterns, 0 mismatches, {elapsed:.2f}s")


def test_criterion_05_maze_anchors_and_ea():
    """Open-grid anchors score exactly 18 and 38; the EA reaches >= 38 within
    50k evaluations in < 60 s and >= 45 within 500k evaluations."""
    assert maze.score_maze(maze.open_grid(10, 10)) == 18
    assert maze.score_maze(maze.open_grid(20, 20)) == 38
    started = time.monotonic()
    _, score_50k = maze.ea_baseline(20, 20, evaluations=50_000, seed=1)
    elapsed = time.monotonic() - started
    assert score_50k >= 38
    assert elapsed < 60.0, f"50k-evaluation EA took {elapsed:.1f}s"
    _, score_500k = maze.ea_baseline(20, 20, evaluations=500_000, seed=1)
    assert score_500k >= 45
    passed(5, f"anchors 18/38 exact; EA 50k -> {score_50k} in {elapsed:.1f}s; "
              f"500k -> {score_500k}")


@pytest.mark.parametrize("game", ["breakout", "freeway", "asterix"])
def test_criterion_06_grid_invariants(game):
    """1000 random-policy episodes per game without invariant violations,
    plus the Freeway closed-form check."""
    rng = random.Random(hash(game) & 0xFFFF)
    for seed in range(1000):
        fuzz_episode(game, seed, rng)
    if game == "freeway":
        from progsearch import grid
        s = grid.reset("freeway", 0, cars=False)
        total = 0.0
        for _ in range(250):
            s, r = grid.step(s, "UP")
            total += r
        assert total == 27.0
    passed(6, f"{game}: 1000 episodes clean" +
              (" and car-free always-UP reward = 27" if game == "freeway" else ""))


def test_criterion_07_vehicle_bounds(sandbox):
    """Speed never exceeds a*(1-d)/d + 1e-6 under any policy; the
    start-at-target NO_OP case reports minDistance 0 and success."""
    rng = random.Random(7)
    task = vehicle.VehicleTask(omega=60.0)
    bound = vehicle.speed_bound(task) + 1e-6
    for _ in range(300):
        s = task.start
        for _ in range(101):
            s = vehicle.vehicle_step(s, rng.choice(vehicle.ACTIONS), task)
            assert s.speed <= bound, f"speed {s.speed} exceeds bound"
    load(sandbox, NOOP_VEHICLE_POLICY)
    episode = vehicle.VehicleTask(start=vehicle.ShipState(0, 0, 0, 0, 0),
                                  target=(0.0, 0.0), tolerance=10.0)
    report = vehicle.evaluate_driver(sandbox, omega=60.0, episode_set=[episode])
    assert report.min_distances == [0.0]
    assert report.success is True
    passed(7, f"300 random episodes bounded by {bound:.6f}; NO_OP at target succeeds")


def test_criterion_08_timeout_containment():
    """An infinite-loop candidate is killed within callTimeout + 500 ms,
    classified Timeout, and the next iteration proceeds normally."""
    config = SandboxConfig(call_timeout_ms=500)
    handle = spawn(config)
    try:
        load(handle, "def policy(state):\n    while True:\n        pass\n")
        started = time.monotonic()
        outcome = handle.request_action({"grid": []}, step=0)
        elapsed = time.monotonic() - started
        assert outcome.status is ExecStatus.TIMEOUT
        assert elapsed < 0.5 + 0.5, f"kill took {elapsed:.2f}s"
        # next iteration: a fresh program loads and serves
        assert load(handle, NOOP_POLICY).ok
        after = handle.request_action({"grid": []}, step=0)
        assert after.status is ExecStatus.EXECUTABLE and after.value == "NOOP"
    finally:
        handle.shutdown()
    passed(8, f"killed and classified in {elapsed:.2f}s; next iteration clean")


def test_criterion_09_metrics_fidelity():
    """A hand-constructed 10-trial log reproduces hand-computed S.Iter,
    S.Trl, exec-rate, cost, and rank values exactly."""
    records = []
    # trials 0-5: one positive iteration each (fitness trial+1), one zero.
    # trials 6-7: executable but never positive. trials 8-9: nothing ran.
    for t in range(6):
        records.append({"trial": t, "iteration": 1, "repairs": 1,
                        "program_sha": "a", "exec": "Executable",
                        "fitness": float(t + 1), "tokens_in": 100,
                        "tokens_out": 50, "cost_usd": 0.125, "ms": 0})
        records.append({"trial": t, "iteration": 2, "repairs": 0,
                        "program_sha": "b", "exec": "Executable",
                        "fitness": 0.0, "tokens_in": 100, "tokens_out": 50,
                        "cost_usd": 0.125, "ms": 0})
    for t in (6, 7):
        records.append({"trial": t, "iteration": 1, "repairs": 2,
                        "program_sha": "c", "exec": "Executable",
                        "fitness": 0.0, "tokens_in": 100, "tokens_out": 50,
                        "cost_usd": 0.25, "ms": 0})
    for t in (8, 9):
        records.append({"trial": t, "iteration": 1, "repairs": 2,
                        "program_sha": "d", "exec": "SyntaxError",
                        "fitness": None, "tokens_in": 100, "tokens_out": 50,
                        "cost_usd": 0.25, "ms": 0})
    summary = summarize_run(records)
    # hand computation: 16 records, 6 positive -> 37.5%; 10 trials, 6 with a
    # positive iteration -> 60%; programs = 6*2 + 6*1 + 2*3 + 2*3 = 30, of
    # which 14 records executable -> 14/30; cost = 12*0.125 + 4*0.25 = 2.5
    assert summary.iterations == 16
    assert summary.trials == 10
    assert summary.s_iter == 37.5
    assert summary.s_trl == 60.0
    assert summary.exec_rate == 100.0 * 14 / 30
    assert summary.cost_usd == 2.5
    assert summary.best_fitness == 6.0
    # per-trial bests: 1..6 and four zeros -> mean 2.1
    assert summary.avg_fitness == pytest.approx(2.1)
    table = aggregate_ranks({
        "breakout": {"m1": 10.0, "m2": 7.0, "m3": 7.0},
        "maze": {"m1": 12.0, "m2": 30.0},
        "vehicle": {"m1": 80.0, "m2": 95.0, "m3": 60.0},
    }, lower_is_better={"vehicle"})
    assert table.per_domain["breakout"] == {"m1": 1, "m2": 2, "m3": 2}
    assert table.per_domain["maze"] == {"m1": 2, "m2": 1, "m3": 3}
    assert table.per_domain["vehicle"] == {"m1": 2, "m2": 3, "m3": 1}
    assert table.average == {"m1": pytest.approx(5 / 3),
                             "m2": pytest.approx(2.0),
                             "m3": pytest.approx(2.0)}
    assert table.overall == {"m1": 1, "m2": 2, "m3": 2}
    passed(9, "summary and rank table equal hand computation")


def test_criterion_10_long_run_harness(tmp_path):
    """trials=10, iterations=1000 with a scripted provider completes in under
    10 minutes and emits best-so-far curves."""
    task = make_task("maze", maze_width=10, maze_height=10)
    provider = ScriptedProvider(
        [fenced(WALL_P_GENERATOR), fenced(OPEN_GRID_GENERATOR),
         fenced(BROKEN_SYNTAX), fenced(WALL_P_GENERATOR)],
        cycle=True)
    config = SearchConfig(trials=10, iterations=1000, max_repairs=3, seed=42)
    started = time.monotonic()
    outcome = run_experiment(task, config, provider,
                             SandboxConfig(call_timeout_ms=2000))
    elapsed = time.monotonic() - started
    records = [r.to_dict() for r in outcome.records]
    assert len(records) == 10_000
    rows = reward_curves(records, trials=10)
    assert len(rows) == 10_000
    by_trial = {}
    for t, i, b in rows:
        by_trial.setdefault(t, []).append(b)
    assert len(by_trial) == 10
    for series in by_trial.values():
        assert all(a <= b for a, b in zip(series, series[1:]))
    assert outcome.best_fitness > 0
    assert elapsed < 600.0, f"long run took {elapsed:.1f}s"
    out = tmp_path / "curves.csv"
    from progsearch.report import curves_to_csv
    out.write_text(curves_to_csv(rows))
    assert out.stat().st_size > 0
    passed(10, f"10x1000 iterations in {elapsed:.1f}s; 10000 curve rows emitted")
