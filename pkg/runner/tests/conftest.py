"""Drivers for conformance tests: run the real subprocess over raw pipes."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

RUNNER_CMD = [sys.executable, "-m", "policyrunner"]


def run_transcript(requests: list[dict | str], timeout: float = 30.0):
    """Feed a full request script to a fresh runner; returns (stdout lines,
    stderr text, exit code). Requests may be raw strings to test malformed
    input."""
    lines = [r if isinstance(r, str) else json.dumps(r) for r in requests]
    proc = subprocess.run(
        RUNNER_CMD,
        input="".join(line + "\n" for line in lines),
        capture_output=True,
        text=True,
        timeout=timeout,
    )
    return proc.stdout.splitlines(), proc.stderr, proc.returncode


def load_msg(source: str, entry: str = "policy", program_id: str = "p1") -> dict:
    return {"type": "load", "program_id": program_id, "source": source, "entry": entry}


def act_msg(state=None, step: int = 0) -> dict:
    return {"type": "act", "step": step, "state": state if state is not None else {}}


@pytest.fixture
def live_runner():
    proc = subprocess.Popen(RUNNER_CMD, stdin=subprocess.PIPE,
                            stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                            text=True, bufsize=1)
    assert json.loads(proc.stdout.readline())["type"] == "ready"

    def request(msg: dict) -> dict:
        proc.stdin.write(json.dumps(msg) + "\n")
        proc.stdin.flush()
        return json.loads(proc.stdout.readline())

    yield request
    proc.stdin.close()
    proc.wait(timeout=10)
