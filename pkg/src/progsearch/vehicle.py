"""Asteroids-style ship control: reach the target and rest there.

The ship lives in an unbounded plane. Per step the policy picks one of
NO_OP / THRUST / ROTATE_LEFT / ROTATE_RIGHT; thrust accelerates along the
heading, rotation turns by the task's omega (degrees per second), then drag
scales the velocity and the position integrates. Low drag makes overshooting
the natural failure mode.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidActionError

ACTIONS = ("NO_OP", "THRUST", "ROTATE_LEFT", "ROTATE_RIGHT")

DEFAULT_EPISODE_SEED = 9021  # fixed so every evaluation sees the same 5 tasks


@dataclass(frozen=True)
class ShipState:
    x: float
    y: float
    vx: float
    vy: float
    heading: float  # degrees, normalized to [0, 360)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass(frozen=True)
class VehicleTask:
    omega: float = 50.0            # rotation speed, degrees per second
    start: ShipState = ShipState(0.0, 0.0, 0.0, 0.0, 0.0)
    target: tuple[float, float] = (100.0, 0.0)
    steps: int = 101
    tolerance: float = 10.0
    thrust_accel: float = 1.0
    drag: float = 0.05             # per-step velocity decay factor
    dt: float = 1.0


def speed_bound(task: VehicleTask) -> float:
    """Supremum of achievable speed: a*(1-d)/d for sustained thrust."""
    return task.thrust_accel * (1.0 - task.drag) / task.drag


def _norm_heading(deg: float) -> float:
    return deg % 360.0


def vehicle_step(state: ShipState, action: str, task: VehicleTask) -> ShipState:
    """One tick: apply the action, then drag, then integrate position."""
    if action not in ACTIONS:
        raise InvalidActionError(f"{action!r} not in {ACTIONS}")
    heading = state.heading
    vx, vy = state.vx, state.vy
    if action == "ROTATE_LEFT":
        heading = _norm_heading(heading - task.omega * task.dt)
    elif action == "ROTATE_RIGHT":
        heading = _norm_heading(heading + task.omega * task.dt)
    elif action == "THRUST":
        rad = math.radians(heading)
        vx += task.thrust_accel * math.cos(rad) * task.dt
        vy += task.thrust_accel * math.sin(rad) * task.dt
    vx *= 1.0 - task.drag
    vy *= 1.0 - task.drag
    return ShipState(state.x + vx * task.dt, state.y + vy * task.dt, vx, vy, heading)


def distance_to_target(state: ShipState, task: VehicleTask) -> float:
    return math.hypot(state.x - task.target[0], state.y - task.target[1])


def default_episode_set(omega: float, count: int = 5,
                        seed: int = DEFAULT_EPISODE_SEED) -> list[VehicleTask]:
    """Fixed evaluation tasks: varied starts and headings, targets 80-200
    units away, zero initial velocity."""
    rng = random.Random(seed)
    episodes = []
    for _ in range(count):
        sx = rng.uniform(-50.0, 50.0)
        sy = rng.uniform(-50.0, 50.0)
        heading = rng.uniform(0.0, 360.0)
        dist = rng.uniform(80.0, 200.0)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        target = (sx + dist * math.cos(angle), sy + dist * math.sin(angle))
        episodes.append(VehicleTask(
            omega=omega,
            start=ShipState(sx, sy, 0.0, 0.0, _norm_heading(heading)),
            target=target,
        ))
    return episodes


@dataclass
class DriveEpisode:
    min_distance: float
    final_distance: float
    final_speed: float
    stopped: bool
    actions: list[str] = field(default_factory=list)
    failure: str | None = None
    failure_detail: str = ""


@dataclass
class DriveReport:
    episodes: list[DriveEpisode]
    min_distances: list[float]
    d_avg: float
    success: bool
    baseline_d_avg: float
    non_executable: bool = False
    failure_status: str | None = None

    @property
    def fitness(self) -> float:
        """Positive iff the policy got closer than doing nothing would.

        Raw distances cannot feed the hill climber directly (its incumbent
        threshold starts at 0), so fitness is the improvement over the
        stay-put baseline.
        """
        return self.baseline_d_avg - self.d_avg


def wire_state(state: ShipState, task: VehicleTask, step_index: int) -> dict:
    return {
        "ship": {"pos": [state.x, state.y], "vel": [state.vx, state.vy],
                 "heading": state.heading},
        "target": [task.target[0], task.target[1]],
        "step": step_index,
        "omega": task.omega,
    }


def evaluate_driver(handle, omega: float,
                    episode_set: list[VehicleTask] | None = None) -> DriveReport:
    """Drive each evaluation task for its full step budget.

    Records the minimum target distance per episode (initial position
    included) and whether the ship "stopped": the final 5 positions all
    within tolerance and final speed below 0.5. Success requires stopping in
    every episode.
    """
    from .sandbox import ExecStatus

    tasks = episode_set if episode_set is not None else default_episode_set(omega)
    episodes: list[DriveEpisode] = []
    non_exec = False
    failure_status = None
    for e, task in enumerate(tasks):
        state = task.start
        min_dist = distance_to_target(state, task)
        tail: list[float] = [min_dist]
        rec = DriveEpisode(min_distance=min_dist, final_distance=min_dist,
                           final_speed=state.speed, stopped=False)
        for step_index in range(task.steps):
            outcome = handle.request_action(wire_state(state, task, step_index),
                                            step=step_index)
            if outcome.status is not ExecStatus.EXECUTABLE:
                rec.failure = outcome.status.value
                rec.failure_detail = outcome.detail
                break
            action = outcome.value
            if action not in ACTIONS:
                rec.failure = ExecStatus.INVALID_OUTPUT.value
                rec.failure_detail = f"action {action!r} not in {ACTIONS}"
                break
            state = vehicle_step(state, action, task)
            rec.actions.append(action)
            dist = distance_to_target(state, task)
            min_dist = min(min_dist, dist)
            tail.append(dist)
        if rec.failure is not None and e == 0 and not rec.actions:
            non_exec = True
            failure_status = rec.failure
        rec.min_distance = min_dist
        rec.final_distance = tail[-1]
        rec.final_speed = state.speed
        rec.stopped = (rec.failure is None
                       and all(d <= task.tolerance for d in tail[-5:])
                       and rec.final_speed < 0.5)
        episodes.append(rec)
    min_distances = [rec.min_distance for rec in episodes]
    baseline = float(np.mean([distance_to_target(t.start, t) for t in tasks]))
    return DriveReport(
        episodes=episodes,
        min_distances=min_distances,
        d_avg=float(np.mean(min_distances)),
        success=all(rec.stopped for rec in episodes),
        baseline_d_avg=baseline,
        non_executable=non_exec,
        failure_status=failure_status,
    )


def noop_min_distances(omega: float,
                       episode_set: list[VehicleTask] | None = None) -> list[float]:
    """Distances a do-nothing policy achieves; the reporting fallback when a
    search produces no incumbent."""
    tasks = episode_set if episode_set is not None else default_episode_set(omega)
    out = []
    for task in tasks:
        state = task.start
        best = distance_to_target(state, task)
        for _ in range(task.steps):
            state = vehicle_step(state, "NO_OP", task)
            best = min(best, distance_to_target(state, task))
        out.append(best)
    return out
