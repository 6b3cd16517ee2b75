"""Task registry: what the search loop needs to know about each task.

A task owns its prompt sections, the smoke check behind CanExec, and the
full fitness evaluation. Policies are judged by mean episode reward, maze
generators by mean maze score, and the vehicle task by improvement in mean
minimum distance over the stay-put baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import grid, maze, vehicle
from .errors import UnknownTaskError
from .logio import sha256_hex
from .sandbox import ExecStatus, SandboxHandle


@dataclass
class CanExecCheck:
    ok: bool
    status: ExecStatus
    detail: str = ""


@dataclass
class Evaluation:
    status: ExecStatus
    fitness: float | None
    result: object


def _load(handle: SandboxHandle, source: str, entry: str) -> CanExecCheck:
    outcome = handle.load_program(source, sha256_hex(source), entry=entry)
    if not outcome.ok:
        return CanExecCheck(False, outcome.status, outcome.diagnostic)
    return CanExecCheck(True, ExecStatus.EXECUTABLE)


class GridTask:
    """Policy task over one of the 10x10 grid games."""

    kind = "policy"
    entry = "policy"

    RULES = {
        "breakout": (
            "Mini Breakout. You control a one-cell paddle on the bottom row "
            "(row 9) of a 10x10 grid. A ball moves one cell diagonally per "
            "tick, bouncing off the side walls, the ceiling, the bricks and "
            "the paddle. Destroying a brick scores one point. If the ball "
            "reaches row 9 where the paddle is not, the game ends. Clearing "
            "all bricks respawns them. The previous ball cell is marked "
            "'trail', which tells you the ball's direction of travel."
        ),
        "freeway": (
            "Freeway. You control a chicken in column 4 of a 10x10 grid and "
            "must walk it from row 9 up to row 0 across eight lanes of "
            "wrapping traffic (rows 1-8, one car per lane, fixed per-lane "
            "speed and direction). Reaching row 0 scores one point and "
            "teleports the chicken back to row 9. Touching a car teleports "
            "it back to row 9 without scoring."
        ),
        "asterix": (
            "Asterix. You control a player on a 10x10 grid. Gold and enemies "
            "drift horizontally through rows 1-8, entering at one side and "
            "leaving at the other; new ones appear every few ticks. Moving "
            "onto gold scores one point. Touching an enemy ends the game."
        ),
    }

    OBJECTIVES = {
        "breakout": "Maximize the number of bricks destroyed.",
        "freeway": "Maximize the number of safe crossings.",
        "asterix": "Collect as much gold as possible while staying alive.",
    }

    def __init__(self, game: str, episodes: int = 50, step_limit: int | None = None):
        self.name = game
        self.game = game
        self.default_episodes = episodes
        self.step_limit = step_limit
        self.action_set = grid.GAMES[game].ACTIONS

    def prompt_sections(self) -> list[str]:
        initial = grid.reset(self.game, seed=0)
        return [
            self.RULES[self.game],
            "Objective: " + self.OBJECTIVES[self.game],
            "Possible actions: " + ", ".join(self.action_set) + ".",
            "The state is a dict {\"grid\": rows, \"aux\": {\"tick\": int, "
            "\"score\": float}} where rows is a 10x10 list of token strings "
            "(row 0 first). The initial state looks like this:\n\n"
            + grid.render_text(initial),
            "Write a function with this exact signature:\n\n"
            "```python\ndef policy(state):\n    ...\n```\n\n"
            "It must return one of the action strings above.",
        ]

    def smoke_payload(self) -> dict:
        return grid.state_payload(grid.reset(self.game, seed=0))

    def can_exec(self, handle: SandboxHandle, source: str) -> CanExecCheck:
        check = _load(handle, source, self.entry)
        if not check.ok:
            return check
        outcome = handle.request_action(self.smoke_payload(), step=0)
        if outcome.status is not ExecStatus.EXECUTABLE:
            return CanExecCheck(False, outcome.status, outcome.detail)
        if outcome.value not in self.action_set:
            return CanExecCheck(False, ExecStatus.INVALID_OUTPUT,
                                f"action {outcome.value!r} not in {self.action_set}")
        return CanExecCheck(True, ExecStatus.EXECUTABLE)

    def evaluate(self, handle: SandboxHandle, episodes: int | None,
                 seed_base: int) -> Evaluation:
        report = grid.evaluate_policy(
            self.game, handle,
            episodes=episodes or self.default_episodes,
            seed_base=seed_base, step_limit=self.step_limit,
        )
        if report.non_executable:
            return Evaluation(ExecStatus(report.failure_status), None, report)
        return Evaluation(ExecStatus.EXECUTABLE, report.fitness, report)

    def improve_detail(self, result: grid.FitnessReport, trace_limit: int = 200) -> str:
        if not result.episodes:
            return ""
        first = result.episodes[0]
        trace = " ".join(first.actions[:trace_limit])
        if len(first.actions) > trace_limit:
            trace += " ..."
        return (f"First-episode action trace ({first.steps} steps, reward "
                f"{first.total_reward:g}, ended by {first.end_reason}):\n{trace}\n"
                f"Per-episode rewards: "
                + " ".join(f"{ep.total_reward:g}" for ep in result.episodes))


class VehicleTask:
    """Drive the ship to the target and stop there."""

    kind = "policy"
    entry = "policy"
    action_set = vehicle.ACTIONS

    HINTS = [
        "This is best solved with a search algorithm: try One Step Lookahead, "
        "Monte Carlo Tree Search or Rolling Horizon Evolution over simulated "
        "futures.",
        "Try a heuristic function that values facing towards the target as "
        "well as being close to the target.",
        "Try macro-actions: simply repeating each candidate action a number "
        "of times before scoring it.",
    ]

    HELPERS = (
        "Helper pseudocode you may reimplement inside your function:\n\n"
        "```text\n"
        "class Vector2d:\n"
        "    x, y\n"
        "    add(other), subtract(other), scale(k)\n"
        "    magnitude() -> float\n"
        "    angle_to(other) -> degrees\n"
        "\n"
        "class Vehicle:            # superclass of the ship\n"
        "    position: Vector2d\n"
        "    velocity: Vector2d\n"
        "    heading: degrees      # 0 points along +x, 90 along +y\n"
        "    step(action):\n"
        "        if action == ROTATE_LEFT:  heading -= omega * dt\n"
        "        if action == ROTATE_RIGHT: heading += omega * dt\n"
        "        if action == THRUST:       velocity += accel * unit(heading) * dt\n"
        "        velocity *= (1 - drag)\n"
        "        position += velocity * dt\n"
        "```"
    )

    def __init__(self, omega: float = 50.0, episode_seed: int = vehicle.DEFAULT_EPISODE_SEED):
        self.name = "vehicle"
        self.omega = omega
        self.episode_set = vehicle.default_episode_set(omega, seed=episode_seed)
        self.default_episodes = len(self.episode_set)

    def prompt_sections(self) -> list[str]:
        task = self.episode_set[0]
        return [
            "Ship driving. Pilot a 2D spaceship from its start state to the "
            "target position and bring it to rest there until the episode "
            "ends. Each episode is 101 steps. Physics per step: rotation "
            f"changes heading by omega = {self.omega:g} degrees, thrust adds "
            f"{task.thrust_accel:g} unit/s^2 along the heading, then velocity "
            f"is scaled by (1 - {task.drag:g}) and the position integrates. "
            "Drag is low, so overshooting is the main risk.",
            "Objective: minimize your distance to the target, and ideally "
            "stop within 10 units of it.",
            "Possible actions: " + ", ".join(self.action_set) + ".",
            "The state is a dict {\"ship\": {\"pos\": [x, y], \"vel\": [vx, vy], "
            "\"heading\": degrees}, \"target\": [x, y], \"step\": int, "
            "\"omega\": degrees}.",
            "Hints:\n" + "\n".join("- " + h for h in self.HINTS),
            self.HELPERS,
            "Write a function with this exact signature:\n\n"
            "```python\ndef policy(state):\n    ...\n```\n\n"
            "It must return one of the action strings above.",
        ]

    def smoke_payload(self) -> dict:
        task = self.episode_set[0]
        return vehicle.wire_state(task.start, task, 0)

    def can_exec(self, handle: SandboxHandle, source: str) -> CanExecCheck:
        check = _load(handle, source, self.entry)
        if not check.ok:
            return check
        outcome = handle.request_action(self.smoke_payload(), step=0)
        if outcome.status is not ExecStatus.EXECUTABLE:
            return CanExecCheck(False, outcome.status, outcome.detail)
        if outcome.value not in self.action_set:
            return CanExecCheck(False, ExecStatus.INVALID_OUTPUT,
                                f"action {outcome.value!r} not in {self.action_set}")
        return CanExecCheck(True, ExecStatus.EXECUTABLE)

    def evaluate(self, handle: SandboxHandle, episodes: int | None,
                 seed_base: int) -> Evaluation:
        # the evaluation episode set is fixed by design; seed_base is unused
        report = vehicle.evaluate_driver(handle, self.omega, self.episode_set)
        if report.non_executable:
            return Evaluation(ExecStatus(report.failure_status), None, report)
        return Evaluation(ExecStatus.EXECUTABLE, report.fitness, report)

    def improve_detail(self, result: vehicle.DriveReport, trace_limit: int = 200) -> str:
        lines = [
            "Per-episode minimum distances: "
            + " ".join(f"{d:.2f}" for d in result.min_distances),
            f"Mean minimum distance: {result.d_avg:.2f} "
            f"(doing nothing scores {result.baseline_d_avg:.2f})",
        ]
        if result.episodes:
            first = result.episodes[0]
            trace = " ".join(first.actions[:trace_limit])
            if len(first.actions) > trace_limit:
                trace += " ..."
            lines.append(f"First-episode action trace:\n{trace}")
        return "\n".join(lines)


class MazeTask:
    """Procedural content generation: write a random maze generator."""

    kind = "generator"
    entry = "generate"

    def __init__(self, width: int = 20, height: int = 20, count: int = 5):
        self.name = "maze"
        self.width = width
        self.height = height
        self.default_episodes = count

    def prompt_sections(self) -> list[str]:
        return [
            f"Maze generation. Write a random maze generator for a "
            f"{self.width}x{self.height} grid. Cell value 0 is a corridor and "
            f"1 is a wall. The entrance is the top-left cell (0, 0) and the "
            f"exit is the bottom-right cell ({self.height - 1}, {self.width - 1}); "
            "both must be corridors and connected by a corridor path, or the "
            "maze scores -1.",
            "Objective: the longest shortest path. A maze's score is the "
            "length of the shortest corridor path from entrance to exit "
            "(4-connected, unit steps). Generate mazes that maximize this "
            "score while keeping the exit reachable.",
            "The function receives params = {\"width\": int, \"height\": int, "
            "\"seed\": int}. Use the seed for any randomness so output is "
            "reproducible, and return a height x width nested list of 0/1 "
            "integers.",
            "Write a function with this exact signature:\n\n"
            "```python\ndef generate(params):\n    ...\n```",
        ]

    def smoke_params(self) -> dict:
        return {"width": self.width, "height": self.height, "seed": 0}

    def can_exec(self, handle: SandboxHandle, source: str) -> CanExecCheck:
        check = _load(handle, source, self.entry)
        if not check.ok:
            return check
        outcome = handle.request_artifact(self.smoke_params())
        if outcome.status is not ExecStatus.EXECUTABLE:
            return CanExecCheck(False, outcome.status, outcome.detail)
        grid_rows = outcome.grid
        if len(grid_rows) != self.height or len(grid_rows[0]) != self.width:
            return CanExecCheck(False, ExecStatus.INVALID_OUTPUT,
                                f"expected {self.height}x{self.width} grid, got "
                                f"{len(grid_rows)}x{len(grid_rows[0])}")
        return CanExecCheck(True, ExecStatus.EXECUTABLE)

    def evaluate(self, handle: SandboxHandle, episodes: int | None,
                 seed_base: int) -> Evaluation:
        report = maze.evaluate_generator(
            handle, count=episodes or self.default_episodes,
            width=self.width, height=self.height, seed_base=seed_base,
        )
        if report.non_executable:
            return Evaluation(ExecStatus(report.failure_status), None, report)
        return Evaluation(ExecStatus.EXECUTABLE, report.fitness, report)

    def improve_detail(self, result: maze.GenReport, trace_limit: int = 200) -> str:
        parts = [f"Scores of the {len(result.scores)} generated mazes: "
                 + " ".join(str(s) for s in result.scores)
                 + f" (best {result.d_max}, mean {result.d_avg:g})"]
        for i, g in enumerate(result.grids):
            if g is None:
                parts.append(f"Maze {i} (seed {i}): invalid ({result.failures[i]})")
            else:
                parts.append(f"Maze {i}, score {result.scores[i]}:\n" + maze.maze_to_text(g))
        return "\n".join(parts)


TASK_NAMES = ("breakout", "freeway", "asterix", "vehicle", "maze")


def make_task(name: str, *, omega: float = 50.0, episodes: int | None = None,
              step_limit: int | None = None, maze_width: int = 20,
              maze_height: int = 20):
    """Build a registered task, applying any overrides."""
    if name in grid.GAMES:
        return GridTask(name, episodes=episodes or 50, step_limit=step_limit)
    if name == "vehicle":
        return VehicleTask(omega=omega)
    if name == "maze":
        return MazeTask(width=maze_width, height=maze_height,
                        count=episodes or 5)
    raise UnknownTaskError(name)
