"""10x10 grid-game simulators: mini breakout, freeway, and asterix.

Each game is deterministic given its seed. The state exposed to policies is
the same labeled token grid that appears in prompts: one token per cell,
drawn from a small fixed vocabulary. Dynamics are this project's own
desk-scale variants; the exact rules live in each class's step() docstring
and are part of the contract that tests pin down.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidActionError, SteppedTerminalError, UnknownGameError

GRID_SIZE = 10

EMPTY = "empty"


class BreakoutState:
    """Mini breakout: bounce the ball off the paddle and clear the bricks.

    Actions LEFT/RIGHT/NOOP move the one-cell paddle on row 9. The ball moves
    one cell per axis per tick; side walls flip its horizontal direction, the
    ceiling and bricks and the paddle flip its vertical direction. Removing a
    brick pays +1. A ball reaching row 9 off-paddle ends the episode.
    Clearing all 30 bricks respawns rows 1-3. The previous ball cell renders
    as a "trail" token.
    """

    ACTIONS = ("LEFT", "RIGHT", "NOOP")
    AGENT = "paddle"
    STEP_LIMIT = 1000

    def __init__(self, seed: int):
        self.width = self.height = GRID_SIZE
        self.rng = random.Random(seed)
        self.tick = 0
        self.score = 0.0
        self.terminal = False
        self.paddle_col = 4
        if self.rng.random() < 0.5:
            self.ball = (4, 0)
            self.ball_dir = (1, 1)
        else:
            self.ball = (4, 9)
            self.ball_dir = (1, -1)
        self.trail: tuple[int, int] | None = None
        self.bricks = {(r, c) for r in (1, 2, 3) for c in range(GRID_SIZE)}

    def _advance(self, action: str) -> float:
        if action == "LEFT":
            self.paddle_col = max(0, self.paddle_col - 1)
        elif action == "RIGHT":
            self.paddle_col = min(GRID_SIZE - 1, self.paddle_col + 1)
        reward = 0.0
        r, c = self.ball
        dy, dx = self.ball_dir
        self.trail = (r, c)
        nc = c + dx
        if nc < 0 or nc > GRID_SIZE - 1:
            dx = -dx
            nc = c + dx
        nr = r + dy
        if nr < 0:
            dy = -dy
            nr = r + dy
        if (nr, nc) in self.bricks:
            self.bricks.discard((nr, nc))
            reward += 1.0
            dy = -dy
            nr = r + dy
            if nr < 0:  # squeezed against the ceiling: collapse the double bounce
                dy = 1
                nr = r + 1
        elif nr == GRID_SIZE - 1:
            if nc == self.paddle_col:
                dy = -dy
                nr = r + dy
            else:
                self.terminal = True
        self.ball = (nr, nc)
        self.ball_dir = (dy, dx)
        if not self.bricks:
            self.bricks = {(row, col) for row in (1, 2, 3) for col in range(GRID_SIZE)}
        return reward

    @property
    def cells(self) -> list[list[str]]:
        grid = [[EMPTY] * self.width for _ in range(self.height)]
        if self.trail is not None:
            grid[self.trail[0]][self.trail[1]] = "trail"
        for r, c in self.bricks:
            grid[r][c] = "brick"
        grid[self.ball[0]][self.ball[1]] = "ball"
        grid[GRID_SIZE - 1][self.paddle_col] = "paddle"
        return grid


@dataclass
class _Car:
    row: int
    col: int
    direction: int  # +1 rightward, -1 leftward
    period: int
    phase: int

    def due(self, tick: int) -> bool:
        return (tick + self.phase) % self.period == 0


class FreewayState:
    """Freeway: walk the chicken from row 9 to row 0 across eight car lanes.

    Actions UP/DOWN/NOOP move the chicken along column 4. Each of rows 1-8
    holds one wrapping car with a per-row speed (one cell every 1-4 ticks)
    and alternating direction; speeds, phases and starting columns come from
    the seed. Reaching row 0 pays +1 and teleports the chicken back to row 9,
    in the same tick. A collision (checked after both the chicken and the
    cars have moved) teleports it back without reward change. No terminal
    state; episodes end at the evaluator's step limit.
    """

    ACTIONS = ("UP", "DOWN", "NOOP")
    AGENT = "chicken"
    STEP_LIMIT = 250

    def __init__(self, seed: int, cars: bool = True):
        self.width = self.height = GRID_SIZE
        self.rng = random.Random(seed)
        self.tick = 0
        self.score = 0.0
        self.terminal = False
        self.chicken_row = 9
        self.chicken_col = 4
        self.cars: list[_Car] = []
        if cars:
            for row in range(1, 9):
                self.cars.append(_Car(
                    row=row,
                    col=self.rng.randrange(GRID_SIZE),
                    direction=1 if row % 2 == 1 else -1,
                    period=self.rng.randint(1, 4),
                    phase=self.rng.randrange(4),
                ))

    def _advance(self, action: str) -> float:
        reward = 0.0
        if action == "UP":
            self.chicken_row = max(0, self.chicken_row - 1)
        elif action == "DOWN":
            self.chicken_row = min(GRID_SIZE - 1, self.chicken_row + 1)
        if self.chicken_row == 0:
            reward = 1.0
            self.chicken_row = 9
        for car in self.cars:
            if car.due(self.tick):
                car.col = (car.col + car.direction) % GRID_SIZE
        for car in self.cars:
            if car.row == self.chicken_row and car.col == self.chicken_col:
                self.chicken_row = 9
                break
        return reward

    @property
    def cells(self) -> list[list[str]]:
        grid = [[EMPTY] * self.width for _ in range(self.height)]
        for car in self.cars:
            grid[car.row][car.col] = "car"
        grid[self.chicken_row][self.chicken_col] = "chicken"
        return grid


@dataclass
class _Entity:
    row: int
    col: int
    direction: int
    gold: bool


class AsterixState:
    """Asterix: collect gold, avoid enemies.

    Actions UP/DOWN/LEFT/RIGHT/NOOP move the player anywhere on the board.
    Every 5 ticks an entity (gold with probability 1/3, enemy otherwise)
    spawns on a random entity-free row 1-8 at the side it will traverse
    from; entities advance one cell every 2 ticks and despawn at the far
    side. Sharing a cell with gold pays +1 and removes it; sharing a cell
    with an enemy ends the game.
    """

    ACTIONS = ("UP", "DOWN", "LEFT", "RIGHT", "NOOP")
    AGENT = "player"
    STEP_LIMIT = 1000

    def __init__(self, seed: int):
        self.width = self.height = GRID_SIZE
        self.rng = random.Random(seed)
        self.tick = 0
        self.score = 0.0
        self.terminal = False
        self.player = (5, 4)
        self.entities: list[_Entity] = []

    def _collide(self) -> float:
        reward = 0.0
        remaining = []
        for ent in self.entities:
            if (ent.row, ent.col) == self.player:
                if ent.gold:
                    reward += 1.0
                else:
                    self.terminal = True
                    remaining.append(ent)
            else:
                remaining.append(ent)
        self.entities = remaining
        return reward

    def _advance(self, action: str) -> float:
        r, c = self.player
        if action == "UP":
            r = max(0, r - 1)
        elif action == "DOWN":
            r = min(GRID_SIZE - 1, r + 1)
        elif action == "LEFT":
            c = max(0, c - 1)
        elif action == "RIGHT":
            c = min(GRID_SIZE - 1, c + 1)
        self.player = (r, c)
        reward = self._collide()
        if self.terminal:
            return reward
        if self.tick % 2 == 0:
            survivors = []
            for ent in self.entities:
                ent.col += ent.direction
                if 0 <= ent.col < GRID_SIZE:
                    survivors.append(ent)
            self.entities = survivors
            reward += self._collide()
            if self.terminal:
                return reward
        if self.tick % 5 == 0:
            occupied = {ent.row for ent in self.entities}
            free_rows = [row for row in range(1, 9) if row not in occupied]
            if free_rows:
                row = self.rng.choice(free_rows)
                direction = self.rng.choice((1, -1))
                col = 0 if direction == 1 else GRID_SIZE - 1
                self.entities.append(_Entity(row, col, direction,
                                             gold=self.rng.random() < 1 / 3))
                reward += self._collide()
        return reward

    @property
    def cells(self) -> list[list[str]]:
        grid = [[EMPTY] * self.width for _ in range(self.height)]
        for ent in self.entities:
            grid[ent.row][ent.col] = "gold" if ent.gold else "enemy"
        grid[self.player[0]][self.player[1]] = "player"
        return grid


GAMES = {
    "breakout": BreakoutState,
    "freeway": FreewayState,
    "asterix": AsterixState,
}

GridState = BreakoutState | FreewayState | AsterixState


def reset(game: str, seed: int, **options) -> GridState:
    """Construct the canonical initial state for `game`."""
    try:
        cls = GAMES[game]
    except KeyError:
        raise UnknownGameError(game) from None
    return cls(seed, **options)


def step(state: GridState, action: str) -> tuple[GridState, float]:
    """Advance one tick in place; returns (state, reward earned this tick)."""
    if state.terminal:
        raise SteppedTerminalError("episode already over")
    if action not in state.ACTIONS:
        raise InvalidActionError(f"{action!r} not in {state.ACTIONS}")
    state.tick += 1
    reward = state._advance(action)
    state.score += reward
    return state, reward


def render_text(state: GridState) -> str:
    """Row 0 first, one line per row, tokens space-separated."""
    return "\n".join(" ".join(row) for row in state.cells)


def parse_grid(text: str) -> list[list[str]]:
    return [line.split() for line in text.strip("\n").splitlines()]


@dataclass
class EpisodeRecord:
    seed: int
    actions: list[str] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    total_reward: float = 0.0
    steps: int = 0
    end_reason: str = "StepLimit"  # Terminal | StepLimit | PolicyError
    failure: str | None = None
    failure_detail: str = ""


@dataclass
class FitnessReport:
    episodes: list[EpisodeRecord]
    fitness: float
    max_reward: float
    mean_reward: float
    sigma: float
    non_executable: bool = False
    failure_status: str | None = None


def state_payload(state: GridState) -> dict:
    return {"grid": state.cells, "aux": {"tick": state.tick, "score": state.score}}


def evaluate_policy(game: str, handle, episodes: int, seed_base: int,
                    step_limit: int | None = None, **game_options) -> FitnessReport:
    """Run the loaded policy for `episodes` seeded episodes; fitness is the
    mean total reward.

    A policy failure mid-episode ends that episode with its partial reward;
    a failure on the very first action of the first episode marks the whole
    program non-executable.
    """
    from .sandbox import ExecStatus

    records: list[EpisodeRecord] = []
    non_exec = False
    failure_status = None
    for e in range(episodes):
        seed = seed_base + e
        state = reset(game, seed, **game_options)
        limit = step_limit if step_limit is not None else state.STEP_LIMIT
        rec = EpisodeRecord(seed=seed)
        while not state.terminal and rec.steps < limit:
            outcome = handle.request_action(state_payload(state), step=rec.steps)
            if outcome.status is not ExecStatus.EXECUTABLE:
                rec.end_reason = "PolicyError"
                rec.failure = outcome.status.value
                rec.failure_detail = outcome.detail
                break
            action = outcome.value
            if action not in state.ACTIONS:
                rec.end_reason = "PolicyError"
                rec.failure = ExecStatus.INVALID_OUTPUT.value
                rec.failure_detail = f"action {action!r} not in {state.ACTIONS}"
                break
            state, reward = step(state, action)
            rec.actions.append(action)
            rec.rewards.append(reward)
            rec.steps += 1
        else:
            rec.end_reason = "Terminal" if state.terminal else "StepLimit"
        if rec.end_reason == "PolicyError" and e == 0 and rec.steps == 0:
            non_exec = True
            failure_status = rec.failure
        rec.total_reward = float(sum(rec.rewards))
        records.append(rec)
    totals = np.asarray([r.total_reward for r in records], dtype=np.float64)
    return FitnessReport(
        episodes=records,
        fitness=float(totals.mean()),
        max_reward=float(totals.max()),
        mean_reward=float(totals.mean()),
        sigma=float(totals.std()),
        non_executable=non_exec,
        failure_status=failure_status,
    )
