"""Maze scoring, generator evaluation, and the evolutionary baseline.

A maze is a rectangular 0/1 occupancy grid (0 = corridor, 1 = wall) with
fixed start and end cells. Its score is the shortest corridor path between
the endpoints under 4-connectivity, or -1 when no path exists or an endpoint
sits on a wall. Generators are asked to maximize that score ("longest
shortest path").
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import MalformedGridError

Cell = tuple[int, int]  # (row, col)


@dataclass
class MazeGrid:
    width: int
    height: int
    cells: list[list[int]]  # cells[row][col], 0 corridor / 1 wall
    start: Cell = (0, 0)
    end: Cell | None = None

    def __post_init__(self):
        if self.end is None:
            self.end = (self.height - 1, self.width - 1)

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise MalformedGridError("empty grid")
        if len(self.cells) != self.height:
            raise MalformedGridError(f"expected {self.height} rows, got {len(self.cells)}")
        for row in self.cells:
            if len(row) != self.width:
                raise MalformedGridError("ragged rows")
            for v in row:
                if v not in (0, 1):
                    raise MalformedGridError(f"cell value {v!r} is not 0/1")
        for r, c in (self.start, self.end):
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise MalformedGridError("endpoint out of bounds")
        if self.start == self.end:
            raise MalformedGridError("start equals end")


def open_grid(width: int, height: int) -> MazeGrid:
    return MazeGrid(width, height, [[0] * width for _ in range(height)])


# Flat-index neighbor tables, cached per grid shape: BFS below is the hot
# loop of the evolutionary baseline.
_NEIGHBORS: dict[tuple[int, int], list[tuple[int, ...]]] = {}


def _neighbor_table(width: int, height: int) -> list[tuple[int, ...]]:
    key = (width, height)
    table = _NEIGHBORS.get(key)
    if table is None:
        table = []
        for r in range(height):
            for c in range(width):
                adj = []
                if r > 0:
                    adj.append((r - 1) * width + c)
                if r < height - 1:
                    adj.append((r + 1) * width + c)
                if c > 0:
                    adj.append(r * width + c - 1)
                if c < width - 1:
                    adj.append(r * width + c + 1)
                table.append(tuple(adj))
        _NEIGHBORS[key] = table
    return table


def _score_flat(flat: list[int], width: int, height: int, start_i: int, end_i: int) -> int:
    if flat[start_i] or flat[end_i]:
        return -1
    if start_i == end_i:
        return 0
    neighbors = _neighbor_table(width, height)
    dist = [-1] * (width * height)
    dist[start_i] = 0
    queue = deque((start_i,))
    while queue:
        i = queue.popleft()
        d = dist[i] + 1
        for j in neighbors[i]:
            if dist[j] < 0 and not flat[j]:
                if j == end_i:
                    return d
                dist[j] = d
                queue.append(j)
    return -1


def score_maze(grid: MazeGrid) -> int:
    """Shortest-path edge count start->end, or -1 when unreachable."""
    grid.validate()
    flat = [v for row in grid.cells for v in row]
    start_i = grid.start[0] * grid.width + grid.start[1]
    end_i = grid.end[0] * grid.width + grid.end[1]
    return _score_flat(flat, grid.width, grid.height, start_i, end_i)


def relaxation_scores(walls: np.ndarray, start: Cell, end: Cell) -> np.ndarray:
    """Independent scoring oracle: batched Bellman-style relaxation.

    `walls` has shape (batch, height, width) with 0/1 entries. Distances are
    propagated by repeatedly relaxing each cell against its four neighbors
    until a fixed point, with no queue and no early exit, so the algorithm
    shares nothing with the BFS path (used to cross-check it exhaustively).
    """
    batch, height, width = walls.shape
    inf = np.float32(np.inf)
    dist = np.full((batch, height, width), inf, dtype=np.float32)
    open_mask = walls == 0
    sr, sc = start
    dist[:, sr, sc] = np.where(open_mask[:, sr, sc], 0.0, inf)
    for _ in range(height * width):
        best = np.full_like(dist, inf)
        best[:, 1:, :] = np.minimum(best[:, 1:, :], dist[:, :-1, :])
        best[:, :-1, :] = np.minimum(best[:, :-1, :], dist[:, 1:, :])
        best[:, :, 1:] = np.minimum(best[:, :, 1:], dist[:, :, :-1])
        best[:, :, :-1] = np.minimum(best[:, :, :-1], dist[:, :, 1:])
        new = np.minimum(dist, best + 1.0)
        new = np.where(open_mask, new, inf)
        if np.array_equal(new, dist, equal_nan=False):
            break
        dist = new
    er, ec = end
    out = dist[:, er, ec]
    scores = np.where(np.isinf(out), -1.0, out)
    scores = np.where(open_mask[:, er, ec] & open_mask[:, sr, sc], scores, -1.0)
    return scores.astype(np.int64)


def verify_exhaustive(width: int, height: int) -> int:
    """Compare score_maze against the relaxation oracle on every wall pattern.

    Returns the number of mismatching patterns (0 means the two independent
    implementations agree on all 2**(width*height) grids).
    """
    n = width * height
    if n > 20:
        raise ValueError("exhaustive verification is only sensible for tiny grids")
    count = 1 << n
    ids = np.arange(count, dtype=np.uint32)
    bits = (ids[:, None] >> np.arange(n, dtype=np.uint32)) & 1
    walls = bits.reshape(count, height, width).astype(np.uint8)
    start = (0, 0)
    end = (height - 1, width - 1)
    expected = relaxation_scores(walls, start, end)
    start_i = 0
    end_i = n - 1
    mismatches = 0
    flat_rows = walls.reshape(count, n).tolist()
    for flat, want in zip(flat_rows, expected.tolist()):
        if _score_flat(flat, width, height, start_i, end_i) != want:
            mismatches += 1
    return mismatches


@dataclass
class GenReport:
    """Outcome of asking a loaded generator for a batch of mazes."""

    scores: list[int]
    grids: list[MazeGrid | None]
    failures: list[str]
    d_max: int
    d_avg: float
    sigma: float
    non_executable: bool = False
    failure_status: str | None = None

    @property
    def fitness(self) -> float:
        return self.d_avg


def _stats(scores: list[int]) -> tuple[int, float, float]:
    arr = np.asarray(scores, dtype=np.float64)
    return int(arr.max()), float(arr.mean()), float(arr.std())


def evaluate_generator(handle, count: int = 5, width: int = 20, height: int = 20,
                       seed_base: int = 0) -> GenReport:
    """Request `count` mazes with distinct seeds and score them.

    Failed or malformed artifacts contribute a score of -1. A failure on the
    very first request marks the program non-executable, mirroring the policy
    evaluator.
    """
    from .sandbox import ExecStatus  # local import to keep this module env-only

    scores: list[int] = []
    grids: list[MazeGrid | None] = []
    failures: list[str] = []
    non_exec = False
    failure_status = None
    for k in range(count):
        outcome = handle.request_artifact({"width": width, "height": height,
                                           "seed": seed_base + k})
        if outcome.status is not ExecStatus.EXECUTABLE:
            if k == 0:
                non_exec = True
                failure_status = outcome.status.value
            scores.append(-1)
            grids.append(None)
            failures.append(f"{outcome.status.value}: {outcome.detail}".strip(": "))
            continue
        grid = MazeGrid(width, height, outcome.grid)
        try:
            scores.append(score_maze(grid))
            grids.append(grid)
            failures.append("")
        except MalformedGridError as e:
            scores.append(-1)
            grids.append(None)
            failures.append(str(e))
            if k == 0:
                non_exec = True
                failure_status = ExecStatus.INVALID_OUTPUT.value
    d_max, d_avg, sigma = _stats(scores)
    return GenReport(scores, grids, failures, d_max, d_avg, sigma,
                     non_executable=non_exec, failure_status=failure_status)


def ea_baseline(width: int = 20, height: int = 20, evaluations: int = 50_000,
                seed: int = 0) -> tuple[MazeGrid, int]:
    """(1+4) evolution strategy directly maximizing the maze score.

    The parent starts as the fully open grid; offspring flip each cell with
    probability 2/(width*height). Equal-score offspring may replace the
    parent (neutral drift), but a disconnected (-1) offspring never replaces
    a connected parent. `evaluations` counts score_maze calls, parent
    included.
    """
    if evaluations < 1:
        raise ValueError("evaluations must be >= 1")
    n = width * height
    start_i, end_i = 0, n - 1
    rng = np.random.default_rng(seed)
    flip_p = 2.0 / n
    parent = np.zeros(n, dtype=np.uint8)
    parent_score = _score_flat(parent.tolist(), width, height, start_i, end_i)
    evals = 1
    while evals < evaluations:
        best_child = None
        best_child_score = -2
        for _ in range(min(4, evaluations - evals)):
            child = parent ^ (rng.random(n) < flip_p)
            child = child.astype(np.uint8)
            s = _score_flat(child.tolist(), width, height, start_i, end_i)
            evals += 1
            if s > best_child_score:
                best_child, best_child_score = child, s
        if best_child is not None and best_child_score >= parent_score and best_child_score >= 0:
            parent, parent_score = best_child, best_child_score
    cells = [parent[r * width:(r + 1) * width].tolist() for r in range(height)]
    return MazeGrid(width, height, cells), parent_score


def maze_to_text(grid: MazeGrid) -> str:
    """Plain-text export: one row per line, cells as 0/1 digits."""
    return "\n".join("".join(str(v) for v in row) for row in grid.cells) + "\n"


def maze_to_pgm(grid: MazeGrid) -> str:
    """ASCII PGM export (walls black, corridors white) for figure use."""
    lines = ["P2", f"{grid.width} {grid.height}", "255"]
    for row in grid.cells:
        lines.append(" ".join("0" if v else "255" for v in row))
    return "\n".join(lines) + "\n"
