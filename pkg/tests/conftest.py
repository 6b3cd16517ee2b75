"""Shared fixtures: candidate program sources and sandbox plumbing."""

from __future__ import annotations

import pytest

from progsearch.logio import sha256_hex, write_jsonl
from progsearch.sandbox import SandboxConfig, spawn

# -- candidate program sources used across the suite ------------------------

NOOP_POLICY = 'def policy(state):\n    return "NOOP"\n'

LEFT_POLICY = 'def policy(state):\n    return "LEFT"\n'

UP_POLICY = 'def policy(state):\n    return "UP"\n'

BROKEN_SYNTAX = "def policy(state:\n    return\n"

RUNTIME_ERROR_POLICY = "def policy(state):\n    return 1 / 0\n"

NUMBER_POLICY = "def policy(state):\n    return 42\n"

BOGUS_TOKEN_POLICY = 'def policy(state):\n    return "WARP"\n'

INFINITE_LOOP_POLICY = "def policy(state):\n    while True:\n        pass\n"

SLEEPY_IMPORT = "import time\ntime.sleep(3600)\ndef policy(state):\n    return 'NOOP'\n"

CRASHING_POLICY = "import os\ndef policy(state):\n    os._exit(7)\n"

# Tracks the ball, predicting its landing column by simulating wall and
# ceiling bounces; reliably scores a few bricks per episode.
TRACKING_POLICY = '''
def policy(state):
    rows = state["grid"]
    ball = pad = trail = None
    for r, row in enumerate(rows):
        for c, tok in enumerate(row):
            if tok == "ball":
                ball = (r, c)
            elif tok == "paddle":
                pad = (r, c)
            elif tok == "trail":
                trail = (r, c)
    if ball is None or pad is None:
        return "NOOP"
    dy = dx = 1
    if trail is not None:
        if ball[1] != trail[1]:
            dx = ball[1] - trail[1]
        if ball[0] != trail[0]:
            dy = ball[0] - trail[0]
    r, c = ball
    steps = 0
    while r != 9 and steps < 60:
        nc = c + dx
        if nc < 0 or nc > 9:
            dx = -dx
            nc = c + dx
        nr = r + dy
        if nr < 0:
            dy = -dy
            nr = r + dy
        r, c = nr, nc
        steps += 1
    if c > pad[1]:
        return "RIGHT"
    if c < pad[1]:
        return "LEFT"
    return "NOOP"
'''

OPEN_GRID_GENERATOR = '''
def generate(params):
    w, h = params["width"], params["height"]
    return [[0] * w for _ in range(h)]
'''

WALL_P_GENERATOR = '''
import random

def generate(params):
    rng = random.Random(params["seed"])
    w, h = params["width"], params["height"]
    grid = [[1 if rng.random() < 0.3 else 0 for _ in range(w)] for _ in range(h)]
    grid[0][0] = 0
    grid[h - 1][w - 1] = 0
    return grid
'''

UNREACHABLE_GENERATOR = '''
def generate(params):
    w, h = params["width"], params["height"]
    grid = [[0] * w for _ in range(h)]
    for c in range(w):
        grid[h // 2][c] = 1
    return grid
'''

RAGGED_GENERATOR = '''
def generate(params):
    return [[0, 0, 0], [0, 0]]
'''

NOOP_VEHICLE_POLICY = 'def policy(state):\n    return "NO_OP"\n'

THRUST_VEHICLE_POLICY = 'def policy(state):\n    return "THRUST"\n'

# Thrusts toward the target at full speed and never brakes: a fly-by.
FLYBY_VEHICLE_POLICY = '''
import math

def policy(state):
    sx, sy = state["ship"]["pos"]
    tx, ty = state["target"]
    want = math.degrees(math.atan2(ty - sy, tx - sx)) % 360.0
    heading = state["ship"]["heading"] % 360.0
    diff = (want - heading + 180.0) % 360.0 - 180.0
    if abs(diff) <= state["omega"] / 2.0:
        return "THRUST"
    return "ROTATE_RIGHT" if diff > 0 else "ROTATE_LEFT"
'''


def fenced(source: str) -> str:
    return f"Here is the function.\n\n```python\n{source}\n```\n"


def make_cassette(path, sources: list[str]) -> None:
    """Write a scripted cassette whose responses are fenced programs."""
    write_jsonl(path, [{"response": fenced(src)} for src in sources])


def load(handle, source: str, entry: str = "policy"):
    return handle.load_program(source, sha256_hex(source), entry=entry)


@pytest.fixture
def sandbox():
    handle = spawn(SandboxConfig(call_timeout_ms=1500))
    yield handle
    handle.shutdown()


@pytest.fixture
def fast_sandbox_config():
    return SandboxConfig(call_timeout_ms=500, load_timeout_ms=4000)
